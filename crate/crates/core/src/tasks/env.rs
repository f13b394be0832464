use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::reward::RewardBreakdown;
use super::{BallInit, TaskId, TaskSpec};
use crate::ball::{
    classify_point, detect_and_resolve_contacts, step_ball, BallState, ContactEvent, ContactKind, CourtRegion, Team,
};
use crate::dynamics::{BodyRateCommand, DroneParams, DroneState, RateController, RotorThrusts, Vec3};
use crate::error::{Error, Result};
use crate::racket::{home_goal, plan_goal, plan_intercept, step_racket, InterceptPlan, RacketConfig, RacketState};
use crate::rules::{
    check_drone_violations, decide_outcome, on_ball_motion, on_event, Outcome, RallyState, TeamDrone, Violation,
    ViolationKind,
};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Rotor(RotorThrusts),
    Ctbr(BodyRateCommand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrillEnd {
    DroneMisbehave,
    BallMisbehave,
    WrongHit,
    /// The ball reached its scoring plane or the floor after the final hit.
    Landed,
    Intercepted,
    Timeout,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum EpisodeEnd {
    Match { outcome: Outcome },
    Drill { reason: DrillEnd },
}

impl EpisodeEnd {
    pub fn outcome(&self) -> Option<Outcome> {
        match self {
            EpisodeEnd::Match { outcome } => Some(*outcome),
            EpisodeEnd::Drill { .. } => None,
        }
    }
}

/// Per-episode bookkeeping for the single-team drills.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DrillProgress {
    pub target_index: usize,
    pub stay_count: u32,
    pub targets_reached: u32,
    pub hits: u32,
    pub expected_hitter: usize,
    /// Predicted apex of the ball since the last hit, paid out on the apex step.
    pub pending_apex: Option<f64>,
    pub spiked: bool,
    pub crossed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefenseState {
    pub config: RacketConfig,
    pub racket: RacketState,
    pub plan: Option<InterceptPlan>,
    /// Time since the current plan was made, s.
    pub elapsed: f64,
    pub planned: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct World {
    pub step: u32,
    pub drones: Vec<DroneState>,
    pub ball: Option<BallState>,
    pub rally: RallyState,
    pub progress: DrillProgress,
    pub defense: Option<DefenseState>,
    pub end: Option<EpisodeEnd>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub events: Vec<ContactEvent>,
    pub violations: Vec<Violation>,
    pub reward: RewardBreakdown,
    pub end: Option<EpisodeEnd>,
}

/// One environment instance.
#[derive(Clone, Debug)]
pub struct Env {
    spec: TaskSpec,
    drone: DroneParams,
    rate: RateController,
    world: World,
}

impl Env {
    pub fn new(spec: TaskSpec, drone: DroneParams) -> Result<Self> {
        spec.validate()?;
        drone.validate()?;
        let rate = RateController::new(&drone)?;
        let world = initial_world(&spec, &drone, &mut seed::stream(0, 0, seed::tag::RESET))?;
        Ok(Env { spec, drone, rate, world })
    }

    pub fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    pub fn drone_params(&self) -> &DroneParams {
        &self.drone
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    /// Replace the world, e.g. to resume from a perturbed state.
    pub fn set_world(&mut self, world: World) {
        self.world = world;
    }

    pub fn reset(&mut self, seed: u64) -> &World {
        self.reset_with(&mut seed::stream(seed, 0, seed::tag::RESET))
    }

    pub fn reset_with(&mut self, rng: &mut dyn RngCore) -> &World {
        self.world = initial_world(&self.spec, &self.drone, rng).expect("spec validated at construction");
        &self.world
    }

    pub fn observe(&self) -> Vec<Vec<f64>> {
        super::observe(&self.spec, &self.world)
    }

    pub fn step(&mut self, actions: &[Action]) -> Result<StepResult> {
        if self.world.end.is_some() {
            return Err(Error::Contract("step after episode end".into()));
        }
        if actions.len() != self.spec.n_drones() {
            return Err(Error::Contract(format!(
                "expected {} actions, got {}",
                self.spec.n_drones(),
                actions.len()
            )));
        }
        let prev = self.world.clone();
        let dt = self.spec.dt;
        let g = self.spec.ball.gravity;

        let mut crashed = vec![false; actions.len()];
        for (i, action) in actions.iter().enumerate() {
            let state = &self.world.drones[i];
            let thrusts = match action {
                Action::Rotor(t) => RotorThrusts::new(t.0),
                Action::Ctbr(cmd) => self.rate.thrusts(state, cmd),
            };
            match crate::dynamics::step_drone(&self.drone, state, &thrusts, g, Vec3::zeros(), dt) {
                Ok(next) => self.world.drones[i] = next,
                Err(_) => crashed[i] = true,
            }
        }

        let mut events = Vec::new();
        if let Some(ball) = &self.world.ball {
            let flown = step_ball(&self.spec.ball, ball, dt);
            let pairs: Vec<(&DroneParams, &DroneState)> =
                self.world.drones.iter().map(|d| (&self.drone, d)).collect();
            let (mut next, mut evs) =
                detect_and_resolve_contacts(&self.spec.ball, &flown, &pairs, &self.spec.court_geometry());
            if let Some(def) = &mut self.world.defense {
                advance_defense(def, &next, self.world.progress.spiked, dt, &self.spec);
                if evs.is_empty() {
                    if let Some(ev) = defense_contact(def, &mut next, &self.spec) {
                        evs.push(ev);
                    }
                }
            }
            events = evs;
            self.world.ball = Some(next);
        }

        let (violations, reward, end) = if self.spec.id.is_competitive() {
            self.competitive_step(&prev, &events, &crashed)?
        } else {
            self.drill_step(&prev, &events, &crashed)
        };
        self.world.step += 1;
        let mut reward = reward;
        if !self.spec.shaping {
            reward.zero_shaping();
        }
        if let Some(e) = end {
            self.world.end = Some(e);
            self.world.rally.terminate();
        }
        Ok(StepResult { events, violations, reward, end })
    }

    fn competitive_step(
        &mut self,
        prev: &World,
        events: &[ContactEvent],
        crashed: &[bool],
    ) -> Result<(Vec<Violation>, RewardBreakdown, Option<EpisodeEnd>)> {
        let spec = &self.spec;
        let court = spec.court_geometry();
        let w = &mut self.world;
        let ball = w.ball.as_ref().expect("competitive tasks always have a ball");
        let mut violations = Vec::new();
        let mut legal_hitter = None;
        let mut rally = w.rally.clone();
        for ev in events {
            let (next, v) = on_event(&rally, ev, &court)?;
            if ev.kind == ContactKind::RacketHit && v.is_none() {
                legal_hitter = ev.drone_id;
            }
            violations.extend(v);
            rally = next;
        }
        rally = on_ball_motion(&rally, ball);
        let teams = spec.teams();
        let limits = spec.limits();
        let members: Vec<TeamDrone<'_>> = w
            .drones
            .iter()
            .zip(&teams)
            .map(|(state, &team)| TeamDrone { team, params: &self.drone, state })
            .collect();
        let mut drone_v = check_drone_violations(&members, &court, &limits);
        for (i, &c) in crashed.iter().enumerate() {
            if c && !drone_v.iter().any(|v| v.offender == i && v.kind == ViolationKind::TooLow) {
                drone_v.push(Violation { kind: ViolationKind::TooLow, offender: i, team: teams[i] });
            }
        }
        violations.extend(drone_v.iter().copied());
        let outcome = decide_outcome(&rally, &violations, w.step + 1, spec.max_steps);
        w.rally = rally;

        let n = spec.n_drones();
        let mut r = RewardBreakdown::zeros(spec.id, n);
        let team_task = spec.team_size() > 1;
        for v in &drone_v {
            match v.kind {
                ViolationKind::CollisionTeammate => r.set("drone_collision", v.offender, -100.0),
                _ => r.set("drone_misbehave", v.offender, -100.0),
            }
        }
        if let Some(Outcome { winner: Some(team), .. }) = outcome {
            for (i, t) in teams.iter().enumerate() {
                r.set("win_or_lose", i, if *t == team { 100.0 } else { -100.0 });
            }
        }
        if let Some(h) = legal_hitter {
            if team_task {
                for i in spec.team_members(teams[h]) {
                    r.set("success_hit", i, 10.0);
                }
            } else {
                r.set("success_hit", h, 5.0);
            }
        }
        for (i, d) in w.drones.iter().enumerate() {
            r.set("dist_to_ball", i, 0.5 * (-(ball.position - d.position).norm()).exp());
            if team_task {
                r.set("dist_to_anchor", i, 0.05 * (-(d.position - spec.anchor(i)).norm()).exp());
            } else {
                let out = crate::rules::distance_outside_half(teams[i], d.position.x, d.position.y, &court);
                r.set("drone_out_of_court", i, 0.2 * (-out).exp());
            }
        }
        let _ = prev;
        Ok((violations, r, outcome.map(|outcome| EpisodeEnd::Match { outcome })))
    }

    fn drill_step(
        &mut self,
        prev: &World,
        events: &[ContactEvent],
        crashed: &[bool],
    ) -> (Vec<Violation>, RewardBreakdown, Option<EpisodeEnd>) {
        let spec = &self.spec;
        let court = spec.court_geometry();
        let n = spec.n_drones();
        let w = &mut self.world;
        let mut r = RewardBreakdown::zeros(spec.id, n);
        let mut end: Option<DrillEnd> = None;
        let mut violations = Vec::new();
        let g = spec.ball.gravity;

        // Drone misbehavior.
        for (i, d) in w.drones.iter().enumerate() {
            let p = d.position;
            let kind = if crashed[i] || p.z < spec.z_min {
                Some(ViolationKind::TooLow)
            } else if p.x - self.drone.hull_radius < 0.0 {
                Some(ViolationKind::CrossNet)
            } else if outside_stay_region(spec, i, &p) {
                Some(ViolationKind::Remote)
            } else {
                None
            };
            if let Some(kind) = kind {
                violations.push(Violation { kind, offender: i, team: Team::Red });
                r.set("drone_misbehave", i, -10.0);
                end = Some(DrillEnd::DroneMisbehave);
            }
        }

        if spec.id == TaskId::BackAndForth {
            let p = w.drones[0].position;
            let stay = spec.stay.expect("validated");
            let target = Vec3::from(spec.waypoints[w.progress.target_index]);
            let d = (p - target).norm();
            r.set("dist_to_target", 0, 0.5 * (-d).exp());
            if d <= stay.radius {
                r.set("target_stay", 0, 2.5);
                w.progress.stay_count += 1;
                if w.progress.stay_count >= stay.steps {
                    w.progress.targets_reached += 1;
                    w.progress.target_index ^= 1;
                    w.progress.stay_count = 0;
                }
            } else {
                w.progress.stay_count = 0;
            }
        } else if let Some(ball) = w.ball.clone() {
            let prev_ball = prev.ball.as_ref().expect("ball tasks keep their ball");
            let mut ball_bad = false;
            for ev in events {
                match ev.kind {
                    ContactKind::BodyHit => {
                        let d = ev.drone_id.expect("body hits carry a drone");
                        violations.push(Violation { kind: ViolationKind::BodyHit, offender: d, team: Team::Red });
                        r.set("wrong_hit", d, -10.0);
                        end.get_or_insert(DrillEnd::WrongHit);
                    }
                    ContactKind::RacketHit => {
                        let d = ev.drone_id.expect("racket hits carry a drone");
                        if !drill_hit(spec, w, d, &ball, ev, &mut r) {
                            violations.push(Violation {
                                kind: ViolationKind::WrongTurnHit,
                                offender: d,
                                team: Team::Red,
                            });
                            r.set("wrong_hit", d, -10.0);
                            end.get_or_insert(DrillEnd::WrongHit);
                        }
                    }
                    ContactKind::Net | ContactKind::OutSimulationBounds => ball_bad = true,
                    ContactKind::Floor => {
                        let region = classify_point(ev.point.x, ev.point.y, ev.pre_velocity.x, &court);
                        if spec.id.is_set_and_spike() && w.progress.spiked {
                            if region == CourtRegion::OutOfCourt {
                                ball_bad = true;
                            } else {
                                score_spike_landing(spec, ev, region, &mut r);
                                end.get_or_insert(DrillEnd::Landed);
                            }
                        } else {
                            ball_bad = true;
                        }
                    }
                    ContactKind::DefenseRacket => {
                        end.get_or_insert(DrillEnd::Intercepted);
                    }
                }
            }

            // Ball too low before the play is complete.
            if let Some(zmin) = spec.ball_z_min {
                if ball.position.z < zmin && !(spec.id.is_set_and_spike() && w.progress.spiked) {
                    ball_bad = true;
                }
            }

            // Apex payout.
            if let Some(apex) = w.progress.pending_apex {
                if prev_ball.velocity.z > 0.0 && ball.velocity.z <= 0.0 {
                    if spec.id == TaskId::SoloBump && apex > spec.min_height.unwrap_or(f64::INFINITY) {
                        r.set_all("success_height", 8.0);
                    }
                    w.progress.pending_apex = None;
                }
            }

            if spec.id.is_set_and_spike() && !w.progress.crossed && ball.crossed_net_plane() && ball.position.x < 0.0 {
                w.progress.crossed = true;
                r.set_all("success_cross", 5.0);
            }

            if spec.id == TaskId::HitTheBall {
                let plane = spec.landing_plane.unwrap_or(2.0);
                if prev_ball.position.z >= plane && ball.position.z < plane && ball.velocity.z < 0.0 {
                    if w.progress.hits > 0 {
                        let xy = plane_crossing(prev_ball, &ball, plane);
                        let a = spec.anchor(0);
                        r.set("distance", 0, (xy[0] - a.x).hypot(xy[1] - a.y));
                        end.get_or_insert(DrillEnd::Landed);
                    } else {
                        ball_bad = true;
                    }
                }
            }

            if ball_bad {
                r.set_all("ball_misbehave", -10.0);
                end.get_or_insert(DrillEnd::BallMisbehave);
            }

            // Dense terms.
            for (i, d) in w.drones.iter().enumerate() {
                let rel = ball.position - d.position;
                match spec.id {
                    TaskId::HitTheBall => r.set("dist_to_anchor", i, -(d.position - spec.anchor(i)).norm()),
                    TaskId::SoloBump => {
                        r.set("dist_to_ball_xy", i, (-rel.xy().norm()).exp());
                        r.set("dist_to_ball_z", i, (-rel.z.abs().min(10.0)).exp());
                    }
                    _ => r.set("dist_to_ball", i, 0.05 * (-rel.norm()).exp()),
                }
            }
            if matches!(spec.id, TaskId::BumpAndPass | TaskId::SetAndSpikeEasy | TaskId::SetAndSpikeHard) {
                let total: f64 = (0..n).map(|i| (w.drones[i].position - spec.anchor(i)).norm()).sum();
                r.set_all("dist_to_anchor", -total);
            }
            let _ = g;
        }

        if end.is_none() && w.step + 1 >= spec.max_steps {
            end = Some(DrillEnd::Timeout);
        }
        (violations, r, end.map(|reason| EpisodeEnd::Drill { reason }))
    }
}

/// Apply a drill racket hit. Returns false when the hit is out of turn.
fn drill_hit(
    spec: &TaskSpec,
    w: &mut World,
    d: usize,
    ball: &BallState,
    ev: &ContactEvent,
    r: &mut RewardBreakdown,
) -> bool {
    let g = spec.ball.gravity;
    let post = ev.post_velocity;
    let apex = ball.position.z + post.z.max(0.0).powi(2) / (2.0 * g);
    let p = &mut w.progress;
    match spec.id {
        TaskId::HitTheBall => {
            if p.hits > 0 {
                return false;
            }
            r.set("success_hit", d, 1.0);
        }
        TaskId::SoloBump => {
            r.set("success_hit", d, 1.0);
            p.pending_apex = Some(apex);
        }
        TaskId::BumpAndPass => {
            if d != p.expected_hitter {
                return false;
            }
            r.set_all("success_hit", 1.0);
            if apex > spec.min_height.unwrap_or(4.0) {
                r.set_all("success_cross", 1.0);
            }
            let other = w.drones[1 - d].position;
            if heads_toward(ball, &post, other.x, other.y) {
                r.set("hit_direction", d, 1.0);
            }
            p.expected_hitter = 1 - d;
        }
        TaskId::SetAndSpikeEasy | TaskId::SetAndSpikeHard => {
            if p.hits as usize != d || p.hits >= 2 {
                return false;
            }
            r.set_all("success_hit", 5.0);
            if d == 0 {
                let other = w.drones[1].position;
                if heads_toward(ball, &post, other.x, other.y) {
                    r.set("hit_direction", d, 1.0);
                }
            } else {
                p.spiked = true;
                if post.z < 0.0 {
                    r.set_all("downward_spike", 5.0);
                    r.set_all("spike_velocity", -post.z);
                }
                let t = spec.attack_target();
                if heads_toward(ball, &post, t[0], t[1]) {
                    r.set("hit_direction", d, 1.0);
                }
            }
        }
        _ => {}
    }
    p.hits += 1;
    true
}

/// Horizontal velocity within 45 degrees of the bearing to (x, y).
fn heads_toward(ball: &BallState, v: &Vec3, x: f64, y: f64) -> bool {
    let bearing = nalgebra::Vector2::new(x - ball.position.x, y - ball.position.y);
    let h = v.xy();
    if bearing.norm() == 0.0 || h.norm() == 0.0 {
        return false;
    }
    h.dot(&bearing) / (h.norm() * bearing.norm()) > std::f64::consts::FRAC_1_SQRT_2
}

fn score_spike_landing(spec: &TaskSpec, ev: &ContactEvent, region: CourtRegion, r: &mut RewardBreakdown) {
    match (&spec.target, spec.id) {
        (Some(t), TaskId::SetAndSpikeEasy) => {
            if t.contains(ev.point.x, ev.point.y) {
                r.set_all("in_target", 5.0);
            }
            let d = (ev.point.x - t.center[0]).hypot(ev.point.y - t.center[1]);
            r.set_all("dist_to_target", 2.0 * (-d).exp());
        }
        _ => {
            if region == CourtRegion::BlueCourt {
                r.set_all("success_spike", 5.0);
            }
        }
    }
}

/// Linear interpolation of the xy point where the step crossed `plane`.
pub(crate) fn plane_crossing(prev: &BallState, cur: &BallState, plane: f64) -> [f64; 2] {
    let dz = prev.position.z - cur.position.z;
    let f = if dz > 0.0 { (prev.position.z - plane) / dz } else { 1.0 };
    let p = prev.position + (cur.position - prev.position) * f;
    [p.x, p.y]
}

fn outside_stay_region(spec: &TaskSpec, i: usize, p: &Vec3) -> bool {
    if spec.id == TaskId::BackAndForth {
        let a = Vec3::from(spec.waypoints[0]);
        let b = Vec3::from(spec.waypoints[1]);
        let mid = (a + b) * 0.5;
        return (p - mid).norm() > (a - b).norm() / 2.0 + spec.remote_margin;
    }
    match spec.stay_radius_of(i) {
        Some(rad) => (p - spec.anchor(i)).norm() > rad,
        None => false,
    }
}

fn advance_defense(def: &mut DefenseState, ball: &BallState, spiked: bool, dt: f64, spec: &TaskSpec) {
    let cfg = def.config;
    if !def.planned && spiked && ball.velocity.x < 0.0 {
        def.planned = true;
        def.plan = plan_intercept(
            ball,
            cfg.h_pre,
            Vec3::from(cfg.target),
            cfg.t_post,
            cfg.restitution,
            spec.ball.gravity,
        )
        .ok()
        .filter(|p| p.p_collision.x < 0.0);
        def.elapsed = 0.0;
    }
    let (goal, t_rem) = match &def.plan {
        Some(p) => (plan_goal(p, spec.ball.radius), p.t_pre - def.elapsed),
        None => (home_goal(&cfg), cfg.t_post),
    };
    def.racket = step_racket(&def.racket, goal, t_rem, dt, cfg.d_max, cfg.theta_max);
    def.elapsed += dt;
}

fn defense_contact(def: &DefenseState, ball: &mut BallState, spec: &TaskSpec) -> Option<ContactEvent> {
    let surface_v = def.plan.as_ref().map_or(def.racket.linear_velocity, |p| p.v_collision);
    let disc = def.racket.disc(surface_v);
    let e = def.config.restitution.min(spec.ball.restitution);
    let post = disc.strike(ball, spec.ball.radius, e)?;
    let ev = ContactEvent {
        kind: ContactKind::DefenseRacket,
        drone_id: None,
        point: ball.position,
        pre_velocity: ball.velocity,
        post_velocity: post,
    };
    ball.velocity = post;
    Some(ev)
}

fn sample_box(rng: &mut dyn RngCore, lo: &[f64; 3], hi: &[f64; 3]) -> Vec3 {
    let mut v = [0.0; 3];
    for k in 0..3 {
        v[k] = if hi[k] > lo[k] { rng.random_range(lo[k]..=hi[k]) } else { lo[k] };
    }
    Vec3::from(v)
}

fn initial_world(spec: &TaskSpec, drone: &DroneParams, rng: &mut dyn RngCore) -> Result<World> {
    let hover = drone.hover_fraction(spec.ball.gravity);
    let drones: Vec<DroneState> = spec
        .drones
        .iter()
        .map(|slot| DroneState::at_rest(sample_box(rng, &slot.init_low, &slot.init_high), hover))
        .collect();
    let server = if spec.id.is_competitive() {
        let team = if rng.random_bool(0.5) { Team::Red } else { Team::Blue };
        spec.team_members(team)[0]
    } else {
        0
    };
    let ball = match &spec.ball_init {
        BallInit::None => None,
        BallInit::Fixed { position } => Some(BallState::at_rest(Vec3::from(*position))),
        BallInit::AboveServer { height } => {
            Some(BallState::at_rest(drones[server].position + Vec3::new(0.0, 0.0, *height)))
        }
    };
    let rally = RallyState::new(spec.teams(), server, spec.hit_limit)?;
    let defense = spec.racket.map(|config| DefenseState {
        config,
        racket: RacketState::at_home(&config),
        plan: None,
        elapsed: 0.0,
        planned: false,
    });
    Ok(World { step: 0, drones, ball, rally, progress: DrillProgress::default(), defense, end: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::OutcomeReason;

    fn env(id: TaskId) -> Env {
        Env::new(TaskSpec::preset(id), DroneParams::default()).unwrap()
    }

    fn hover_actions(e: &Env) -> Vec<Action> {
        let f = e.drone_params().hover_fraction(9.81);
        vec![Action::Rotor(RotorThrusts::uniform(f)); e.spec().n_drones()]
    }

    #[test]
    fn solo_bump_reset_matches_preset() {
        let mut e = env(TaskId::SoloBump);
        for s in 0..20 {
            let w = e.reset(s);
            assert_eq!(w.ball.as_ref().unwrap().position, Vec3::new(4.5, 0.0, 4.0));
            let p = w.drones[0].position;
            assert!((4.0..=5.0).contains(&p.x) && (-0.5..=0.5).contains(&p.y) && (1.8..=2.2).contains(&p.z));
        }
    }

    #[test]
    fn reset_is_deterministic() {
        let mut a = env(TaskId::OneVsOne);
        let mut b = env(TaskId::OneVsOne);
        assert_eq!(a.reset(9).clone(), *b.reset(9));
    }

    #[test]
    fn team_serve_ball_sits_above_server() {
        let mut e = env(TaskId::ThreeVsThree);
        let mut servers = [0usize; 2];
        for s in 0..40 {
            let w = e.reset(s).clone();
            let server = w.rally.server;
            servers[w.rally.serving_team.index()] += 1;
            assert_eq!(w.ball.unwrap().position, w.drones[server].position + Vec3::new(0.0, 0.0, 3.0));
        }
        assert!(servers[0] > 0 && servers[1] > 0);
    }

    #[test]
    fn drone_too_low_is_punished_once_and_ends() {
        let mut e = env(TaskId::SoloBump);
        e.reset(1);
        let mut w = e.world().clone();
        w.drones[0].position.z = 0.2;
        e.set_world(w);
        let r = e.step(&hover_actions(&e)).unwrap();
        assert_eq!(r.reward.value("drone_misbehave", 0), -10.0);
        assert_eq!(r.end, Some(EpisodeEnd::Drill { reason: DrillEnd::DroneMisbehave }));
        assert!(e.step(&hover_actions(&e)).is_err());
    }

    #[test]
    fn hover_team_times_out_or_loses() {
        let mut e = env(TaskId::OneVsOne);
        e.reset(3);
        loop {
            let r = e.step(&hover_actions(&e)).unwrap();
            if let Some(end) = r.end {
                let o = end.outcome().unwrap();
                assert_ne!(o.reason, OutcomeReason::Timeout);
                let loser = e.world().rally.serving_team;
                assert_eq!(o.winner, Some(loser.opponent()));
                let server = e.world().rally.server;
                assert_eq!(r.reward.value("win_or_lose", server), -100.0);
                break;
            }
        }
    }

    #[test]
    fn wrong_action_count_is_a_contract_error() {
        let mut e = env(TaskId::BumpAndPass);
        assert!(matches!(e.step(&[]), Err(Error::Contract(_))));
    }
}
