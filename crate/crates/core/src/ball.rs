//! Ball flight, restitution contacts against rackets, hulls, net and floor,
//! court classification and closed-form landing prediction.

use serde::{Deserialize, Serialize};

use crate::dynamics::{DroneParams, DroneState, Vec3, GRAVITY};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallParams {
    pub radius: f64,
    /// Carried for completeness; the restitution-only contact model never uses it.
    pub mass: f64,
    pub restitution: f64,
    pub gravity: f64,
}

impl Default for BallParams {
    fn default() -> Self {
        BallParams { radius: 0.1, mass: 0.005, restitution: 0.8, gravity: GRAVITY }
    }
}

impl BallParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.mass > 0.0) {
            return Err(Error::config("ball radius and mass must be positive"));
        }
        if !(self.restitution > 0.0 && self.restitution <= 1.0) {
            return Err(Error::config("ball restitution must lie in (0, 1]"));
        }
        if !(self.gravity.is_finite() && self.gravity >= 0.0) {
            return Err(Error::config("gravity must be finite and non-negative"));
        }
        Ok(())
    }

    fn gravity_vec(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, -self.gravity)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallState {
    pub position: Vec3,
    pub velocity: Vec3,
    /// Position before the most recent flight step; used for swept net tests.
    pub prev_position: Vec3,
    pub last_hitter: Option<usize>,
    pub hits_since_cross: u32,
    pub airborne: bool,
}

impl BallState {
    pub fn at_rest(position: Vec3) -> Self {
        BallState {
            position,
            velocity: Vec3::zeros(),
            prev_position: position,
            last_hitter: None,
            hits_since_cross: 0,
            airborne: true,
        }
    }

    pub fn with_velocity(position: Vec3, velocity: Vec3) -> Self {
        BallState { velocity, ..Self::at_rest(position) }
    }

    /// Whether the last flight step carried the center across the x = 0 plane.
    pub fn crossed_net_plane(&self) -> bool {
        side_of(self.prev_position.x) != side_of(self.position.x)
            && self.prev_position.x != 0.0
            && self.position.x != 0.0
    }
}

fn side_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactKind {
    RacketHit,
    BodyHit,
    Floor,
    Net,
    OutSimulationBounds,
    /// Contact with the scripted defense racket.
    DefenseRacket,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactEvent {
    pub kind: ContactKind,
    pub drone_id: Option<usize>,
    pub point: Vec3,
    pub pre_velocity: Vec3,
    pub post_velocity: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CourtGeometry {
    pub half_length: f64,
    pub half_width: f64,
    pub net_height: f64,
}

impl CourtGeometry {
    /// Full 18 m x 9 m court.
    pub fn full() -> Self {
        CourtGeometry { half_length: 9.0, half_width: 4.5, net_height: 2.43 }
    }

    pub fn one_vs_one() -> Self {
        CourtGeometry { half_length: 3.0, half_width: 1.5, net_height: 2.43 }
    }

    pub fn three_vs_three() -> Self {
        CourtGeometry { half_length: 4.5, half_width: 2.25, net_height: 2.43 }
    }

    pub fn six_vs_six() -> Self {
        CourtGeometry { half_length: 6.0, half_width: 3.0, net_height: 2.43 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_length > 0.0 && self.half_width > 0.0 && self.net_height > 0.0 {
            Ok(())
        } else {
            Err(Error::config("court dimensions must be positive"))
        }
    }

    /// Closed-boundary test on the xy footprint.
    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        x.abs() <= self.half_length && y.abs() <= self.half_width
    }
}

/// Team identity; red owns the positive-x half.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Team {
    Red,
    Blue,
}

impl Team {
    pub fn opponent(self) -> Team {
        match self {
            Team::Red => Team::Blue,
            Team::Blue => Team::Red,
        }
    }

    /// +1 for red, -1 for blue: the sign of x on the team's own half.
    pub fn side_sign(self) -> f64 {
        match self {
            Team::Red => 1.0,
            Team::Blue => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Team::Red => 0,
            Team::Blue => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CourtRegion {
    RedCourt,
    BlueCourt,
    OutOfCourt,
}

impl CourtRegion {
    pub fn team(self) -> Option<Team> {
        match self {
            CourtRegion::RedCourt => Some(Team::Red),
            CourtRegion::BlueCourt => Some(Team::Blue),
            CourtRegion::OutOfCourt => None,
        }
    }
}

/// Exact constant-gravity flight step.
pub fn step_ball(params: &BallParams, ball: &BallState, dt: f64) -> BallState {
    let g = params.gravity_vec();
    let mut next = ball.clone();
    next.prev_position = ball.position;
    next.position = ball.position + ball.velocity * dt + g * (0.5 * dt * dt);
    next.velocity = ball.velocity + g * dt;
    if next.crossed_net_plane() {
        next.hits_since_cross = 0;
    }
    next
}

/// Impulse response of a ball against a moving plane.
///
/// Returns the post-contact ball velocity: the normal component of the
/// velocity relative to the surface is reversed and scaled by `restitution`,
/// the tangential component is kept.
pub fn reflect_off_surface(
    ball_velocity: Vec3,
    surface_velocity: Vec3,
    normal: Vec3,
    restitution: f64,
) -> Vec3 {
    let rel = ball_velocity - surface_velocity;
    let vn = rel.dot(&normal);
    surface_velocity + rel - normal * ((1.0 + restitution) * vn)
}

/// A thin disc the ball can strike from either face.
#[derive(Clone, Copy, Debug)]
pub struct Disc {
    pub center: Vec3,
    pub normal: Vec3,
    pub velocity: Vec3,
    pub radius: f64,
}

impl Disc {
    pub fn of_drone(params: &DroneParams, state: &DroneState) -> Self {
        Disc {
            center: state.racket_center(params),
            normal: state.heading_up(),
            velocity: state.racket_velocity(params),
            radius: params.racket_radius,
        }
    }

    /// Signed distance of the ball center above the disc plane.
    pub fn height_of(&self, p: &Vec3) -> f64 {
        (p - self.center).dot(&self.normal)
    }

    /// Post-contact velocity if the ball touches the disc while approaching it.
    pub fn strike(&self, ball: &BallState, ball_radius: f64, restitution: f64) -> Option<Vec3> {
        let offset = ball.position - self.center;
        let s = offset.dot(&self.normal);
        if s.abs() > ball_radius {
            return None;
        }
        let in_plane = (offset - self.normal * s).norm();
        if in_plane > self.radius + ball_radius {
            return None;
        }
        let vn = (ball.velocity - self.velocity).dot(&self.normal);
        let approaching = if s > 0.0 {
            vn < 0.0
        } else if s < 0.0 {
            vn > 0.0
        } else {
            vn != 0.0
        };
        approaching.then(|| reflect_off_surface(ball.velocity, self.velocity, self.normal, restitution))
    }
}

/// Margin beyond the court footprint, and ceiling, past which the ball is
/// considered lost.
const SIM_BOUNDS_MARGIN: f64 = 6.0;
const SIM_CEILING: f64 = 25.0;

/// Resolve at most one contact for this step.
///
/// Priority when several apply: racket (lowest drone id) > body > net > floor
/// > simulation bounds.
pub fn detect_and_resolve_contacts(
    params: &BallParams,
    ball: &BallState,
    drones: &[(&DroneParams, &DroneState)],
    court: &CourtGeometry,
) -> (BallState, Vec<ContactEvent>) {
    for (id, (dp, ds)) in drones.iter().enumerate() {
        let disc = Disc::of_drone(dp, ds);
        let e = dp.racket_restitution.min(params.restitution);
        if let Some(post) = disc.strike(ball, params.radius, e) {
            let mut next = ball.clone();
            next.velocity = post;
            next.last_hitter = Some(id);
            next.hits_since_cross += 1;
            let point = ball.position - disc.normal * disc.height_of(&ball.position);
            return (
                next,
                vec![ContactEvent {
                    kind: ContactKind::RacketHit,
                    drone_id: Some(id),
                    point,
                    pre_velocity: ball.velocity,
                    post_velocity: post,
                }],
            );
        }
    }

    for (id, (dp, ds)) in drones.iter().enumerate() {
        let disc = Disc::of_drone(dp, ds);
        let d = ball.position - ds.position;
        if d.norm() <= params.radius + dp.body_radius && disc.height_of(&ball.position) < 0.0 {
            return (
                ball.clone(),
                vec![ContactEvent {
                    kind: ContactKind::BodyHit,
                    drone_id: Some(id),
                    point: ds.position + d * (dp.body_radius / d.norm().max(1e-12)),
                    pre_velocity: ball.velocity,
                    post_velocity: ball.velocity,
                }],
            );
        }
    }

    if let Some(hit) = net_contact(params, ball, court) {
        return hit;
    }
    if let Some(hit) = floor_contact(params, ball) {
        return hit;
    }

    let p = &ball.position;
    if p.x.abs() > court.half_length + SIM_BOUNDS_MARGIN
        || p.y.abs() > court.half_width + SIM_BOUNDS_MARGIN
        || p.z > SIM_CEILING
    {
        return (
            ball.clone(),
            vec![ContactEvent {
                kind: ContactKind::OutSimulationBounds,
                drone_id: None,
                point: *p,
                pre_velocity: ball.velocity,
                post_velocity: ball.velocity,
            }],
        );
    }

    (ball.clone(), Vec::new())
}

fn net_contact(
    params: &BallParams,
    ball: &BallState,
    court: &CourtGeometry,
) -> Option<(BallState, Vec<ContactEvent>)> {
    let r = params.radius;
    let from = side_of(ball.prev_position.x) as f64;
    if from == 0.0 {
        return None;
    }
    // Surface of the ball reaches the net plane while moving toward it.
    if from * ball.position.x > r || from * ball.velocity.x >= 0.0 {
        return None;
    }
    let dx = ball.position.x - ball.prev_position.x;
    let frac = if dx.abs() > 0.0 {
        ((from * r - ball.prev_position.x) / dx).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let at = ball.prev_position + (ball.position - ball.prev_position) * frac;
    if at.z >= court.net_height || at.y.abs() > court.half_width {
        return None;
    }
    let mut next = ball.clone();
    let depth = r - from * ball.position.x;
    next.position.x = from * (r + params.restitution * depth);
    next.velocity.x = -params.restitution * ball.velocity.x;
    // The ball never gets through, so it is still on its original side.
    next.hits_since_cross = ball.hits_since_cross;
    Some((
        next.clone(),
        vec![ContactEvent {
            kind: ContactKind::Net,
            drone_id: None,
            point: Vec3::new(0.0, at.y, at.z),
            pre_velocity: ball.velocity,
            post_velocity: next.velocity,
        }],
    ))
}

/// Floor bounce with the impact instant reconstructed inside the step, so the
/// rebound follows the continuous-time arc.
fn floor_contact(params: &BallParams, ball: &BallState) -> Option<(BallState, Vec<ContactEvent>)> {
    let r = params.radius;
    let (z, vz) = (ball.position.z, ball.velocity.z);
    if z > r || vz >= 0.0 {
        return None;
    }
    let g = params.gravity;
    // Time since the center passed z = r on the current arc.
    let since = if g > 0.0 {
        let disc = vz * vz - 2.0 * g * (r - z);
        (-vz - disc.max(0.0).sqrt()) / g
    } else {
        (r - z) / -vz
    };
    let since = since.max(0.0);
    let impact_vz = vz + g * since;
    let rebound = -params.restitution * impact_vz;
    let mut next = ball.clone();
    next.position.z = r + rebound * since - 0.5 * g * since * since;
    next.velocity.z = rebound - g * since;
    next.airborne = false;
    let back = ball.velocity.xy() * since;
    let point = Vec3::new(ball.position.x - back.x, ball.position.y - back.y, 0.0);
    let mut pre = ball.velocity;
    pre.z = impact_vz;
    let mut post = ball.velocity;
    post.z = rebound;
    Some((
        next,
        vec![ContactEvent {
            kind: ContactKind::Floor,
            drone_id: None,
            point,
            pre_velocity: pre,
            post_velocity: post,
        }],
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Landing {
    pub xy: [f64; 2],
    pub time: f64,
}

/// First non-negative time at which the ballistic arc meets `plane_z`.
pub fn predict_landing(ball: &BallState, plane_z: f64, gravity: f64) -> Option<Landing> {
    let t = time_to_height(ball.position.z, ball.velocity.z, plane_z, gravity, false)?;
    let xy = ball.position.xy() + ball.velocity.xy() * t;
    Some(Landing { xy: [xy.x, xy.y], time: t })
}

/// Time for a ballistic height `z0 + vz t - g t²/2` to reach `target`.
///
/// With `descending_only` the rising crossing is skipped.
pub fn time_to_height(z0: f64, vz: f64, target: f64, g: f64, descending_only: bool) -> Option<f64> {
    let c = z0 - target;
    if c == 0.0 && !(descending_only && vz > 0.0) {
        return Some(0.0);
    }
    if g == 0.0 {
        if vz == 0.0 {
            return None;
        }
        let t = -c / vz;
        return (t >= 0.0 && !(descending_only && vz > 0.0)).then_some(t);
    }
    // g/2 t² - vz t - c = 0
    let disc = vz * vz + 2.0 * g * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let late = (vz + sq) / g;
    let early = (vz - sq) / g;
    if descending_only {
        return (late >= 0.0).then_some(late);
    }
    if early >= 0.0 {
        Some(early)
    } else if late >= 0.0 {
        Some(late)
    } else {
        None
    }
}

/// Court half containing the ball's xy footprint.
///
/// Boundaries are closed. On the net line the ball belongs to the half it is
/// moving toward; a ball with no x-velocity there counts as red.
pub fn classify_ball_region(ball: &BallState, court: &CourtGeometry) -> CourtRegion {
    classify_point(ball.position.x, ball.position.y, ball.velocity.x, court)
}

pub fn classify_point(x: f64, y: f64, vx: f64, court: &CourtGeometry) -> CourtRegion {
    if !court.contains_xy(x, y) {
        return CourtRegion::OutOfCourt;
    }
    if x > 0.0 || (x == 0.0 && vx >= 0.0) {
        CourtRegion::RedCourt
    } else {
        CourtRegion::BlueCourt
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn level_drone_at(p: Vec3) -> (DroneParams, DroneState) {
        (DroneParams::default(), DroneState::at_rest(p, 0.5))
    }

    #[test]
    fn free_fall_one_second() {
        let bp = BallParams::default();
        let mut b = BallState::at_rest(Vec3::new(0.0, 0.0, 10.0));
        for _ in 0..100 {
            b = step_ball(&bp, &b, 0.01);
        }
        assert_abs_diff_eq!(b.position.z - 10.0, -4.905, epsilon = 1e-9);
    }

    #[test]
    fn horizontal_motion_is_decoupled() {
        let bp = BallParams::default();
        let mut b = BallState::with_velocity(Vec3::new(0.0, 0.0, 100.0), Vec3::new(2.0, 0.0, 0.0));
        for _ in 0..150 {
            b = step_ball(&bp, &b, 0.01);
        }
        assert_abs_diff_eq!(b.position.x, 3.0, epsilon = 1e-12);
        assert_eq!(b.position.y, 0.0);
    }

    #[test]
    fn flight_matches_closed_form() {
        let bp = BallParams::default();
        let p0 = Vec3::new(1.0, -2.0, 3.0);
        let v0 = Vec3::new(-1.5, 0.7, 4.2);
        let mut b = BallState::with_velocity(p0, v0);
        for _ in 0..50 {
            b = step_ball(&bp, &b, 0.01);
        }
        let t = 0.5;
        let want = p0 + v0 * t + Vec3::new(0.0, 0.0, -0.5 * GRAVITY * t * t);
        assert!((b.position - want).norm() < 1e-3);
    }

    #[test]
    fn racket_reflects_with_restitution() {
        let bp = BallParams::default();
        let (dp, ds) = level_drone_at(Vec3::new(0.0, 0.0, 2.0));
        // Disc plane at z = 2.05; ball center 0.09 above it, falling at 10 m/s.
        let ball = BallState::with_velocity(Vec3::new(0.0, 0.0, 2.14), Vec3::new(0.0, 0.0, -10.0));
        let (next, events) =
            detect_and_resolve_contacts(&bp, &ball, &[(&dp, &ds)], &CourtGeometry::full());
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].kind, ContactKind::RacketHit);
        assert_eq!(events[0].drone_id, Some(0));
        assert_abs_diff_eq!(next.velocity.z, 8.0, epsilon = 1e-12);
        assert_eq!(next.last_hitter, Some(0));
    }

    #[test]
    fn far_ball_is_untouched() {
        let bp = BallParams::default();
        let (dp, ds) = level_drone_at(Vec3::new(4.0, 0.0, 2.0));
        let ball = BallState::with_velocity(Vec3::new(-3.0, 1.0, 5.0), Vec3::new(1.0, 0.0, 0.0));
        let (next, events) =
            detect_and_resolve_contacts(&bp, &ball, &[(&dp, &ds)], &CourtGeometry::full());
        assert!(events.is_empty());
        assert_eq!(next, ball);
    }

    #[test]
    fn co_moving_racket_applies_no_impulse() {
        let bp = BallParams::default();
        let (dp, mut ds) = level_drone_at(Vec3::new(0.0, 0.0, 2.0));
        ds.velocity = Vec3::new(0.0, 0.0, -3.0);
        let ball = BallState::with_velocity(Vec3::new(0.0, 0.0, 2.12), Vec3::new(0.0, 0.0, -3.0));
        let (next, events) =
            detect_and_resolve_contacts(&bp, &ball, &[(&dp, &ds)], &CourtGeometry::full());
        assert!(events.is_empty());
        assert_eq!(next.velocity, ball.velocity);
    }

    #[test]
    fn ball_below_racket_plane_is_a_body_hit() {
        let bp = BallParams::default();
        let (dp, ds) = level_drone_at(Vec3::new(0.0, 0.0, 2.0));
        let ball = BallState::with_velocity(Vec3::new(0.2, 0.0, 1.95), Vec3::new(-1.0, 0.0, 0.0));
        let (next, events) =
            detect_and_resolve_contacts(&bp, &ball, &[(&dp, &ds)], &CourtGeometry::full());
        assert_eq!(events[0].kind, ContactKind::BodyHit);
        assert_eq!(next.velocity, ball.velocity);
    }

    #[test]
    fn only_one_racket_hit_per_step() {
        let bp = BallParams::default();
        let (dp, a) = level_drone_at(Vec3::new(0.0, 0.0, 2.0));
        let b = DroneState::at_rest(Vec3::new(0.3, 0.0, 2.0), 0.5);
        let ball = BallState::with_velocity(Vec3::new(0.15, 0.0, 2.12), Vec3::new(0.0, 0.0, -4.0));
        let (_, events) =
            detect_and_resolve_contacts(&bp, &ball, &[(&dp, &a), (&dp, &b)], &CourtGeometry::full());
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].drone_id, Some(0));
    }

    #[test]
    fn net_blocks_low_ball() {
        let bp = BallParams::default();
        let mut ball = BallState::with_velocity(Vec3::new(0.2, 0.5, 1.5), Vec3::new(-8.0, 0.0, 0.0));
        ball = step_ball(&bp, &ball, 0.02);
        let (next, events) = detect_and_resolve_contacts(&bp, &ball, &[], &CourtGeometry::full());
        assert_eq!(events[0].kind, ContactKind::Net);
        assert!(next.position.x > 0.0);
        assert_abs_diff_eq!(next.velocity.x, 6.4, epsilon = 1e-12);
    }

    #[test]
    fn high_ball_clears_net() {
        let bp = BallParams::default();
        let mut ball = BallState::with_velocity(Vec3::new(0.05, 0.0, 3.0), Vec3::new(-8.0, 0.0, 0.0));
        ball = step_ball(&bp, &ball, 0.01);
        let (_, events) = detect_and_resolve_contacts(&bp, &ball, &[], &CourtGeometry::full());
        assert!(events.is_empty());
        assert!(ball.crossed_net_plane());
    }

    #[test]
    fn floor_bounce_restitution_is_exact() {
        let bp = BallParams::default();
        let mut ball = BallState::at_rest(Vec3::new(1.0, 1.0, 2.1));
        loop {
            ball = step_ball(&bp, &ball, 0.01);
            let (next, events) = detect_and_resolve_contacts(&bp, &ball, &[], &CourtGeometry::full());
            ball = next;
            if let Some(e) = events.first() {
                assert_eq!(e.kind, ContactKind::Floor);
                assert_abs_diff_eq!(e.post_velocity.z, -0.8 * e.pre_velocity.z, epsilon = 1e-12);
                assert_abs_diff_eq!(e.pre_velocity.z, -(2.0 * GRAVITY * 2.0f64).sqrt(), epsilon = 1e-9);
                break;
            }
        }
        let apex = ball.position.z + ball.velocity.z.powi(2) / (2.0 * GRAVITY) - bp.radius;
        assert_abs_diff_eq!(apex, 0.64 * 2.0, epsilon = 1e-9);
    }

    #[test]
    fn out_of_bounds_is_reported() {
        let bp = BallParams::default();
        let ball = BallState::with_velocity(Vec3::new(20.0, 0.0, 3.0), Vec3::new(5.0, 0.0, 0.0));
        let (_, events) = detect_and_resolve_contacts(&bp, &ball, &[], &CourtGeometry::full());
        assert_eq!(events[0].kind, ContactKind::OutSimulationBounds);
    }

    #[test]
    fn landing_of_vertical_drop() {
        let b = BallState::at_rest(Vec3::new(4.5, 0.0, 5.0));
        let l = predict_landing(&b, 2.0, 9.81).unwrap();
        assert_abs_diff_eq!(l.time, (6.0f64 / 9.81).sqrt(), epsilon = 1e-12);
        assert_eq!(l.xy, [4.5, 0.0]);
        assert!((l.time - 0.782).abs() < 1e-3);
    }

    #[test]
    fn landing_on_plane_is_immediate() {
        let b = BallState::with_velocity(Vec3::new(0.0, 0.0, 3.0), Vec3::new(1.0, 0.0, 0.0));
        let l = predict_landing(&b, 3.0, 9.81).unwrap();
        assert_eq!(l.time, 0.0);
        assert_eq!(l.xy, [0.0, 0.0]);
    }

    #[test]
    fn landing_never_when_arc_stays_below() {
        let b = BallState::with_velocity(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 1.0));
        assert!(predict_landing(&b, 5.0, 9.81).is_none());
    }

    /// Fine-step rollout with linear interpolation of the crossing.
    fn rollout_landing(ball: &BallState, plane_z: f64) -> [f64; 2] {
        let bp = BallParams { gravity: 9.81, ..Default::default() };
        let dt = 1e-4;
        let mut b = ball.clone();
        loop {
            let n = step_ball(&bp, &b, dt);
            if (n.position.z - plane_z) * (b.position.z - plane_z) <= 0.0 {
                let f = (b.position.z - plane_z) / (b.position.z - n.position.z);
                let p = b.position + (n.position - b.position) * f;
                return [p.x, p.y];
            }
            b = n;
        }
    }

    #[test]
    fn landing_matches_fine_rollout() {
        let b = BallState::with_velocity(Vec3::new(0.0, 0.0, 2.0), Vec3::new(3.0, -1.0, 4.0));
        let l = predict_landing(&b, 0.0, 9.81).unwrap();
        let o = rollout_landing(&b, 0.0);
        assert!((l.xy[0] - o[0]).hypot(l.xy[1] - o[1]) < 1e-3);
    }

    #[test]
    fn region_classification() {
        let c = CourtGeometry::full();
        let at = |x, y, vx| classify_ball_region(&BallState::with_velocity(Vec3::new(x, y, 1.0), Vec3::new(vx, 0.0, 0.0)), &c);
        assert_eq!(at(4.5, 0.0, 0.0), CourtRegion::RedCourt);
        assert_eq!(at(-4.5, 0.0, 0.0), CourtRegion::BlueCourt);
        assert_eq!(at(0.0, 10.0, 0.0), CourtRegion::OutOfCourt);
        assert_eq!(at(9.0, 4.5, 0.0), CourtRegion::RedCourt);
        assert_eq!(at(0.0, 0.0, -1.0), CourtRegion::BlueCourt);
        assert_eq!(at(0.0, 0.0, 0.0), CourtRegion::RedCourt);
        assert_eq!(at(9.01, 0.0, 0.0), CourtRegion::OutOfCourt);
    }

    proptest! {
        #[test]
        fn racket_restitution_bound(
            vx in -3.0f64..3.0, vy in -3.0f64..3.0, vz in -12.0f64..-0.1,
            tilt in -0.5f64..0.5,
        ) {
            let bp = BallParams::default();
            let dp = DroneParams::default();
            let mut ds = DroneState::at_rest(Vec3::new(0.0, 0.0, 2.0), 0.5);
            ds.orientation = nalgebra::UnitQuaternion::from_euler_angles(tilt, 0.0, 0.0).into_inner();
            let disc = Disc::of_drone(&dp, &ds);
            let ball = BallState::with_velocity(disc.center + disc.normal * 0.05, Vec3::new(vx, vy, vz));
            let (next, events) = detect_and_resolve_contacts(&bp, &ball, &[(&dp, &ds)], &CourtGeometry::full());
            if let Some(e) = events.first() {
                prop_assert_eq!(e.kind, ContactKind::RacketHit);
                let pre = ball.velocity.dot(&disc.normal);
                let post = next.velocity.dot(&disc.normal);
                prop_assert!((post.abs() - 0.8 * pre.abs()).abs() < 1e-12);
            }
        }

        #[test]
        fn contacts_are_deterministic_and_single(
            x in -1.0f64..1.0, z in 1.5f64..2.5, vz in -5.0f64..5.0,
        ) {
            let bp = BallParams::default();
            let (dp, ds) = level_drone_at(Vec3::new(0.0, 0.0, 2.0));
            let ball = BallState::with_velocity(Vec3::new(x, 0.0, z), Vec3::new(0.0, 0.0, vz));
            let a = detect_and_resolve_contacts(&bp, &ball, &[(&dp, &ds)], &CourtGeometry::full());
            let b = detect_and_resolve_contacts(&bp, &ball, &[(&dp, &ds)], &CourtGeometry::full());
            prop_assert!(a.1.len() <= 1);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn landing_agrees_with_rollout(
            x in -5.0f64..5.0, y in -3.0f64..3.0, z in 0.5f64..6.0,
            vx in -3.0f64..3.0, vy in -3.0f64..3.0, vz in -5.0f64..5.0,
        ) {
            let b = BallState::with_velocity(Vec3::new(x, y, z), Vec3::new(vx, vy, vz));
            let l = predict_landing(&b, 0.0, 9.81).unwrap();
            let o = rollout_landing(&b, 0.0);
            prop_assert!((l.xy[0] - o[0]).hypot(l.xy[1] - o[1]) < 1e-3);
        }
    }
}
