//! Baselines and per-task scripted drills.

use rand::{Rng, RngCore};

use super::control::{Reference, TrackGains, Tracker};
use super::drills::{strike_to, team_frame, DrillFamily, DrillInput, PolicyParams, RECEIVE_HEIGHT};
use super::{Policy, PolicyContext};
use crate::dynamics::{BodyRateCommand, RotorThrusts, Vec3, ROTORS};
use crate::rules::Phase;
use crate::tasks::{Action, ActionMode, TaskId};

fn input<'a>(
    ctx: &'a PolicyContext<'a>,
    tracker: &'a Tracker,
    court: &'a crate::ball::CourtGeometry,
    stations: &'a [Vec3],
    d: usize,
) -> DrillInput<'a> {
    DrillInput {
        tracker,
        mode: ctx.spec.action_mode,
        state: &ctx.world.drones[d],
        home: stations[d],
        team: ctx.spec.drones[d].team,
        court,
        ball: ctx.world.ball.as_ref(),
        ball_radius: ctx.spec.ball.radius,
        ball_restitution: ctx.spec.ball.restitution,
        stations,
        leash: ctx.spec.stay_radius_of(d),
    }
}

fn stations(ctx: &PolicyContext<'_>) -> Vec<Vec3> {
    (0..ctx.spec.n_drones()).map(|i| ctx.spec.anchor(i)).collect()
}

/// Every drone holds its anchor.
#[derive(Default)]
pub struct HoverPolicy {
    tracker: Option<Tracker>,
}

impl Policy for HoverPolicy {
    fn reset(&mut self, ctx: &PolicyContext<'_>, _rng: &mut dyn RngCore) {
        self.tracker = Some(Tracker::new(ctx.drone, ctx.spec.ball.gravity));
    }

    fn act(&mut self, ctx: &PolicyContext<'_>, _rng: &mut dyn RngCore) -> Vec<Action> {
        let tracker = self.tracker.as_ref().expect("reset before act");
        ctx.controlled
            .iter()
            .map(|&d| tracker.hover(&ctx.world.drones[d], ctx.spec.anchor(d), &TrackGains::default(), ctx.spec.action_mode))
            .collect()
    }

    fn name(&self) -> String {
        "hover".into()
    }
}

/// Uniformly random actions over the action space.
#[derive(Default)]
pub struct RandomPolicy {
    rate_limit: f64,
}

impl Policy for RandomPolicy {
    fn reset(&mut self, ctx: &PolicyContext<'_>, _rng: &mut dyn RngCore) {
        self.rate_limit = ctx.drone.rate_limit;
    }

    fn act(&mut self, ctx: &PolicyContext<'_>, rng: &mut dyn RngCore) -> Vec<Action> {
        ctx.controlled
            .iter()
            .map(|_| match ctx.spec.action_mode {
                ActionMode::Prt => {
                    let mut t = [0.0; ROTORS];
                    t.iter_mut().for_each(|x| *x = rng.random::<f64>());
                    Action::Rotor(RotorThrusts::new(t))
                }
                ActionMode::Ctbr => {
                    let l = self.rate_limit;
                    Action::Ctbr(BodyRateCommand {
                        thrust: rng.random::<f64>(),
                        rates: [rng.random_range(-l..=l), rng.random_range(-l..=l), rng.random_range(-l..=l)],
                    })
                }
            })
            .collect()
    }

    fn name(&self) -> String {
        "random".into()
    }
}

/// Serve and single-touch return for the 1 vs 1 task.
pub struct DuelPolicy {
    params: PolicyParams,
    tracker: Option<Tracker>,
}

impl DuelPolicy {
    pub fn new(params: PolicyParams) -> Self {
        assert_eq!(params.family, DrillFamily::Duel);
        DuelPolicy { params, tracker: None }
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    /// Strike parameters for a serve or return at the given depth.
    fn strike(&self, offset: &str, flight: &str) -> PolicyParams {
        let p = &self.params;
        PolicyParams::clamped(
            DrillFamily::Serve,
            &[p.get("kp"), p.get("kd"), p.get("lead"), p.get(offset), p.get(flight), 0.0, 0.0],
        )
    }
}

impl Policy for DuelPolicy {
    fn reset(&mut self, ctx: &PolicyContext<'_>, _rng: &mut dyn RngCore) {
        self.tracker = Some(Tracker::new(ctx.drone, ctx.spec.ball.gravity));
    }

    fn act(&mut self, ctx: &PolicyContext<'_>, _rng: &mut dyn RngCore) -> Vec<Action> {
        let tracker = self.tracker.as_ref().expect("reset before act");
        let court = ctx.spec.court_geometry();
        let st = stations(ctx);
        let rally = &ctx.world.rally;
        ctx.controlled
            .iter()
            .map(|&d| {
                let inp = input(ctx, tracker, &court, &st, d);
                let serving = rally.phase == Phase::Serve && rally.server == d;
                let opponent_hit = rally.last_hitter.is_some_and(|h| rally.team_of(h) != inp.team);
                let returning = rally.phase == Phase::Rally && (opponent_hit || rally.may_hit(d));
                if !(serving || returning) {
                    return tracker.hover(inp.state, inp.home, &self.params.gains(), inp.mode);
                }
                let (offset, flight, depth) = if serving {
                    ("strike_offset", "serve_flight", "serve_depth")
                } else {
                    ("return_offset", "return_flight", "return_depth")
                };
                let target = team_frame(inp.team, self.params.get(depth) * court.half_length, self.params.get("aim_y"))
                    + Vec3::new(0.0, 0.0, ctx.spec.ball.radius);
                let sp = self.strike(offset, flight);
                strike_to(&inp, &sp, target, sp.get("flight_time"), true)
            })
            .collect()
    }

    fn name(&self) -> String {
        "duel".into()
    }
}

/// Hand-written drill for each single-team task.
#[derive(Default)]
pub struct ScriptedDrill {
    tracker: Option<Tracker>,
}

impl Policy for ScriptedDrill {
    fn reset(&mut self, ctx: &PolicyContext<'_>, _rng: &mut dyn RngCore) {
        self.tracker = Some(Tracker::new(ctx.drone, ctx.spec.ball.gravity));
    }

    fn act(&mut self, ctx: &PolicyContext<'_>, _rng: &mut dyn RngCore) -> Vec<Action> {
        let tracker = self.tracker.as_ref().expect("reset before act");
        let spec = ctx.spec;
        let court = spec.court_geometry();
        let st = stations(ctx);
        let progress = &ctx.world.progress;
        let r_ball = spec.ball.radius;
        ctx.controlled
            .iter()
            .map(|&d| {
                let inp = input(ctx, tracker, &court, &st, d);
                let hold = |target: Vec3| {
                    tracker.action(inp.state, &Reference::hold(target), &TrackGains::default(), inp.mode)
                };
                let strike = |family: DrillFamily, target: Vec3, flight: f64, over_net: bool| {
                    let params = PolicyParams::defaults(family).with("strike_offset", RECEIVE_HEIGHT);
                    strike_to(&inp, &params, target, flight, over_net)
                };
                let contact = |i: usize| st[i] + Vec3::new(0.0, 0.0, RECEIVE_HEIGHT);
                match spec.id {
                    TaskId::BackAndForth => hold(Vec3::from(spec.waypoints[progress.target_index])),
                    TaskId::HitTheBall => {
                        if progress.hits > 0 {
                            hold(inp.home)
                        } else {
                            let target = inp.home + Vec3::new(-12.0, 0.0, 0.0);
                            strike(DrillFamily::Serve, target, 1.4, false)
                        }
                    }
                    TaskId::SoloBump => strike(DrillFamily::Pass, contact(d), 1.3, false),
                    TaskId::BumpAndPass => {
                        if progress.expected_hitter == d {
                            strike(DrillFamily::Pass, contact(1 - d), 1.35, false)
                        } else {
                            hold(inp.home)
                        }
                    }
                    TaskId::SetAndSpikeEasy | TaskId::SetAndSpikeHard => match (d, progress.hits) {
                        (0, 0) => strike(DrillFamily::Set, contact(1), 1.2, false),
                        (1, 1) => {
                            let t = spec.attack_target();
                            strike(DrillFamily::Attack, Vec3::new(t[0], t[1], r_ball), 0.8, true)
                        }
                        _ => hold(inp.home),
                    },
                    TaskId::OneVsOne | TaskId::ThreeVsThree | TaskId::SixVsSix => hold(inp.home),
                }
            })
            .collect()
    }

    fn name(&self) -> String {
        "scripted".into()
    }
}
