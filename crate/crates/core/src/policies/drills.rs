//! Parameterized low-level drills: hover plus four intercept-and-strike skills.

use serde::{Deserialize, Serialize};

use super::control::{plan_strike, strike_reference, Reference, StrikePlan, TrackGains, Tracker};
use crate::ball::{BallState, CourtGeometry, Team};
use crate::dynamics::{DroneState, Vec3};
use crate::error::{Error, Result};
use crate::tasks::{Action, ActionMode};

/// Final seconds before contact in which the racket attitude takes priority
/// over position.
pub const ATTITUDE_LOCK: f64 = 0.2;

/// Height above a receiver's station that passes and sets aim for.
pub const RECEIVE_HEIGHT: f64 = 0.3;
/// Distance kept from the edge of a leash.
pub const LEASH_MARGIN: f64 = 0.1;
/// Largest horizontal offset between the racket center and the ball at contact, m.
pub const CONTACT_SLACK: f64 = 0.12;

/// One tunable entry of a drill's parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub default: f64,
}

const fn p(name: &'static str, lo: f64, hi: f64, default: f64) -> ParamSpec {
    ParamSpec { name, lo, hi, default }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrillFamily {
    Hover,
    Serve,
    Pass,
    Set,
    Attack,
    /// Serve and single-touch return of the 1 vs 1 task.
    Duel,
}

impl DrillFamily {
    pub fn schema(self) -> Vec<ParamSpec> {
        let gains = [p("kp", 2.0, 40.0, 25.0), p("kd", 1.0, 20.0, 10.0)];
        let strike = |offset: f64, flight: f64| {
            vec![
                gains[0],
                gains[1],
                p("lead", 0.1, 0.8, 0.3),
                p("strike_offset", -1.2, 1.2, offset),
                p("flight_time", 0.5, 2.5, flight),
                p("aim_x", -1.5, 1.5, 0.0),
                p("aim_y", -1.5, 1.5, 0.0),
            ]
        };
        match self {
            DrillFamily::Hover => gains.to_vec(),
            DrillFamily::Serve => {
                let mut v = strike(0.3, 2.0);
                v[5].default = 1.5;
                v
            }
            DrillFamily::Pass => strike(-0.8, 1.3),
            DrillFamily::Set => strike(0.3, 1.2),
            DrillFamily::Attack => strike(0.3, 1.0),
            DrillFamily::Duel => vec![
                gains[0],
                gains[1],
                p("lead", 0.1, 0.8, 0.3),
                p("strike_offset", 0.0, 1.2, 0.3),
                p("serve_flight", 0.6, 2.5, 1.3),
                p("serve_depth", 0.1, 0.9, 0.5),
                p("return_offset", -1.2, 1.2, -0.8),
                p("return_flight", 0.6, 2.5, 1.2),
                p("return_depth", 0.1, 0.9, 0.5),
                p("aim_y", -0.9, 0.9, 0.0),
            ],
        }
    }
}

/// Flat parameter vector of one drill family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub family: DrillFamily,
    pub values: Vec<f64>,
}

impl PolicyParams {
    pub fn defaults(family: DrillFamily) -> Self {
        PolicyParams { family, values: family.schema().iter().map(|s| s.default).collect() }
    }

    /// Checked construction: fixed length and every entry within bounds.
    pub fn new(family: DrillFamily, values: Vec<f64>) -> Result<Self> {
        let schema = family.schema();
        if values.len() != schema.len() {
            return Err(Error::config(format!(
                "{family:?} parameters need {} values, got {}",
                schema.len(),
                values.len()
            )));
        }
        for (s, v) in schema.iter().zip(&values) {
            if !(s.lo..=s.hi).contains(v) {
                return Err(Error::config(format!("{family:?}.{} = {v} outside [{}, {}]", s.name, s.lo, s.hi)));
            }
        }
        Ok(PolicyParams { family, values })
    }

    /// Project arbitrary values onto the bounds.
    pub fn clamped(family: DrillFamily, values: &[f64]) -> Self {
        let schema = family.schema();
        let values = schema
            .iter()
            .enumerate()
            .map(|(i, s)| values.get(i).copied().unwrap_or(s.default).clamp(s.lo, s.hi))
            .collect();
        PolicyParams { family, values }
    }

    pub fn get(&self, name: &str) -> f64 {
        let i = self
            .family
            .schema()
            .iter()
            .position(|s| s.name == name)
            .unwrap_or_else(|| panic!("{:?} has no parameter `{name}`", self.family));
        self.values[i]
    }

    /// Copy with one parameter replaced, clamped to its bounds.
    pub fn with(&self, name: &str, value: f64) -> Self {
        let schema = self.family.schema();
        let i = schema
            .iter()
            .position(|s| s.name == name)
            .unwrap_or_else(|| panic!("{:?} has no parameter `{name}`", self.family));
        let mut out = self.clone();
        out.values[i] = value.clamp(schema[i].lo, schema[i].hi);
        out
    }

    pub fn gains(&self) -> TrackGains {
        TrackGains { kp: self.get("kp"), kd: self.get("kd"), ..TrackGains::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn one_hot(self) -> [f64; 2] {
        match self {
            Side::Left => [1.0, 0.0],
            Side::Right => [0.0, 1.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Skill {
    Hover { target: [f64; 3] },
    Serve,
    Pass { receiver: usize },
    Set { receiver: usize },
    Attack { side: Side },
}

impl Skill {
    pub fn family(&self) -> DrillFamily {
        match self {
            Skill::Hover { .. } => DrillFamily::Hover,
            Skill::Serve => DrillFamily::Serve,
            Skill::Pass { .. } => DrillFamily::Pass,
            Skill::Set { .. } => DrillFamily::Set,
            Skill::Attack { .. } => DrillFamily::Attack,
        }
    }

    pub fn is_strike(&self) -> bool {
        !matches!(self, Skill::Hover { .. })
    }
}

/// What a drill sees of the game.
#[derive(Clone, Copy, Debug)]
pub struct DrillInput<'a> {
    pub tracker: &'a Tracker,
    pub mode: ActionMode,
    pub state: &'a DroneState,
    /// Station the drone returns to and strikes around.
    pub home: Vec3,
    pub team: Team,
    pub court: &'a CourtGeometry,
    pub ball: Option<&'a BallState>,
    pub ball_radius: f64,
    pub ball_restitution: f64,
    /// Home stations of all drones, for pass and set receivers.
    pub stations: &'a [Vec3],
    /// Radius around `home` the drone must not leave.
    pub leash: Option<f64>,
}

/// Convert a team-frame offset (x deeper into the far court, y to the team's
/// left) into world coordinates.
pub fn team_frame(team: Team, x: f64, y: f64) -> Vec3 {
    let s = team.side_sign();
    Vec3::new(-s * x, -s * y, 0.0)
}

/// Smallest flight time from `t0` up that carries the ball over the net.
pub fn clear_net(
    target: Vec3,
    t0: f64,
    court: &CourtGeometry,
    ball_radius: f64,
    g: f64,
    plan: impl Fn(f64) -> Option<StrikePlan>,
) -> Option<StrikePlan> {
    let clearance = court.net_height + ball_radius + 0.25;
    let mut t = t0;
    while t <= 3.0 {
        if let Some(sp) = plan(t) {
            let p = sp.ball_at_contact;
            let v = sp.ball_post;
            let crosses = p.x * target.x < 0.0 && v.x != 0.0;
            let ok = !crosses || {
                let tn = -p.x / v.x;
                p.z + v.z * tn - 0.5 * g * tn * tn >= clearance
            };
            if ok {
                return Some(sp);
            }
        }
        t += 0.05;
    }
    None
}

/// Low-level action for one drone executing `skill`.
pub fn skill_controller(skill: &Skill, params: &PolicyParams, input: &DrillInput<'_>) -> Action {
    let tracker = input.tracker;
    let gains = params.gains();
    let hover = |target: Vec3| tracker.action(input.state, &Reference::hold(target), &gains, input.mode);
    let target = match (skill, input.ball) {
        (Skill::Hover { target }, _) => return hover(Vec3::from(*target)),
        (_, None) => return hover(input.home),
        (s, Some(_)) => strike_target(s, params, input),
    };
    let over_net = matches!(skill, Skill::Serve | Skill::Attack { .. });
    strike_to(input, params, target, params.get("flight_time"), over_net)
}

/// Meet the ball at the drone's contact height and send it to `target`,
/// arriving after `flight` seconds. Hovers at home when no strike is feasible.
pub fn strike_to(input: &DrillInput<'_>, params: &PolicyParams, target: Vec3, flight: f64, over_net: bool) -> Action {
    let tracker = input.tracker;
    let gains = params.gains();
    let Some(ball) = input.ball else {
        return tracker.action(input.state, &Reference::hold(input.home), &gains, input.mode);
    };
    let g = tracker.gravity();
    let contact_z = input.home.z + params.get("strike_offset");
    let offset = tracker.params().racket_offset().z;
    let plan = |t: f64| {
        plan_strike(ball, contact_z, target, t, input.ball_restitution, input.ball_radius, offset, g)
    };
    let plan = if over_net { clear_net(target, flight, input.court, input.ball_radius, g, plan) } else { plan(flight) };
    match plan {
        Some(mut sp) if reachable(&sp, input) => {
            // Contact off the racket center is fine; only move as far as needed.
            let mut off = input.state.position - sp.com_at_contact;
            off.z = 0.0;
            if off.norm() > CONTACT_SLACK {
                off *= CONTACT_SLACK / off.norm();
            }
            sp.com_at_contact += off;
            let mut r = strike_reference(&sp, params.get("lead"), g);
            if let Some(leash) = input.leash {
                let room = (leash - LEASH_MARGIN).max(0.0);
                let off = r.position - input.home;
                if off.norm() > room {
                    r.position = input.home + off * (room / off.norm());
                }
            }
            if sp.tau <= ATTITUDE_LOCK {
                tracker.wrap(input.state, tracker.attitude_command(input.state, sp.normal, &r, &gains), input.mode)
            } else {
                tracker.action(input.state, &r, &gains, input.mode)
            }
        }
        _ => tracker.action(input.state, &Reference::hold(input.home), &gains, input.mode),
    }
}

fn reachable(sp: &StrikePlan, input: &DrillInput<'_>) -> bool {
    let c = sp.com_at_contact;
    let own_side = input.team.side_sign() * c.x >= input.tracker.params().hull_radius + 0.2;
    let near_home = (c - input.home).xy().norm() <= 4.0;
    own_side && near_home && c.z > 0.6
}

fn strike_target(skill: &Skill, params: &PolicyParams, input: &DrillInput<'_>) -> Vec3 {
    let (l, w) = (input.court.half_length, input.court.half_width);
    let bias = team_frame(input.team, params.get("aim_x"), params.get("aim_y"));
    let floor = Vec3::new(0.0, 0.0, input.ball_radius);
    match skill {
        Skill::Hover { target } => Vec3::from(*target),
        Skill::Serve => team_frame(input.team, 0.5 * l, 0.0) + bias + floor,
        Skill::Pass { receiver } | Skill::Set { receiver } => {
            let r = input.stations[*receiver];
            Vec3::new(r.x, r.y, r.z + RECEIVE_HEIGHT) + bias
        }
        Skill::Attack { side } => {
            let y = match side {
                Side::Left => 0.5 * w,
                Side::Right => -0.5 * w,
            };
            team_frame(input.team, 0.5 * l, y) + bias + floor
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DroneParams;

    #[test]
    fn defaults_are_within_bounds() {
        for f in [
            DrillFamily::Hover,
            DrillFamily::Serve,
            DrillFamily::Pass,
            DrillFamily::Set,
            DrillFamily::Attack,
            DrillFamily::Duel,
        ] {
            let d = PolicyParams::defaults(f);
            assert!(PolicyParams::new(f, d.values.clone()).is_ok());
        }
    }

    #[test]
    fn bad_vectors_are_rejected() {
        assert!(PolicyParams::new(DrillFamily::Hover, vec![1.0]).unwrap_err().is_config());
        assert!(PolicyParams::new(DrillFamily::Hover, vec![100.0, 5.0]).unwrap_err().is_config());
        let c = PolicyParams::clamped(DrillFamily::Hover, &[100.0, -3.0]);
        assert_eq!(c.values, vec![40.0, 1.0]);
    }

    #[test]
    fn team_frame_mirrors() {
        assert_eq!(team_frame(Team::Red, 1.0, 2.0), -team_frame(Team::Blue, 1.0, 2.0));
        // Red faces negative x, so its left is negative y.
        assert!(team_frame(Team::Red, 0.0, 1.0).y < 0.0);
    }

    #[test]
    fn hover_at_station_is_equilibrium() {
        let params = DroneParams::default();
        let tracker = Tracker::new(&params, 9.81);
        let state = DroneState::at_rest(Vec3::new(3.0, -1.5, 2.0), params.hover_fraction(9.81));
        let court = CourtGeometry::three_vs_three();
        let input = DrillInput {
            tracker: &tracker,
            mode: ActionMode::Ctbr,
            state: &state,
            home: state.position,
            team: Team::Red,
            court: &court,
            ball: None,
            ball_radius: 0.1,
            ball_restitution: 0.8,
            stations: &[],
            leash: None,
        };
        let skill = Skill::Hover { target: [3.0, -1.5, 2.0] };
        match skill_controller(&skill, &PolicyParams::defaults(DrillFamily::Hover), &input) {
            Action::Ctbr(c) => {
                assert!((c.thrust - params.hover_fraction(9.81)).abs() < 1e-9);
                assert!(c.rates.iter().all(|r| r.abs() < 1e-9));
            }
            a => panic!("unexpected {a:?}"),
        }
    }
}
