//! Rule-based defense racket: projectile intercept planning and rate-limited
//! motion toward the planned collision pose.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::{reflect_off_surface, time_to_height, BallState, Disc};
use crate::dynamics::Vec3;
use crate::error::{Error, Result};

/// Minimum velocity change the planner accepts.
pub const MIN_DELTA_V: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RacketConfig {
    /// Interception height, m.
    pub h_pre: f64,
    /// Flight time of the returned ball, s.
    pub t_post: f64,
    /// Per-step displacement limit, m.
    pub d_max: f64,
    /// Per-step rotation limit, rad.
    pub theta_max: f64,
    pub home: [f64; 3],
    pub radius: f64,
    pub restitution: f64,
    /// Where the returned ball should land.
    pub target: [f64; 3],
}

impl Default for RacketConfig {
    fn default() -> Self {
        RacketConfig {
            h_pre: 1.0,
            t_post: 1.2,
            d_max: 0.06,
            theta_max: 0.05,
            home: [-4.0, 0.0, 0.5],
            radius: 0.2,
            restitution: 0.8,
            target: [4.5, 0.0, 0.1],
        }
    }
}

impl RacketConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.h_pre, self.t_post, self.d_max, self.theta_max, self.radius];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::config("racket limits and timings must be positive"));
        }
        if !(self.restitution > 0.0 && self.restitution <= 1.0) {
            return Err(Error::config("racket restitution must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RacketState {
    pub position: Vec3,
    pub roll: f64,
    pub pitch: f64,
    pub linear_velocity: Vec3,
    /// Roll and pitch rates, rad/s.
    pub angular_velocity: [f64; 2],
    pub radius: f64,
    pub restitution: f64,
}

impl RacketState {
    pub fn at_home(cfg: &RacketConfig) -> Self {
        RacketState {
            position: Vec3::from(cfg.home),
            roll: 0.0,
            pitch: 0.0,
            linear_velocity: Vec3::zeros(),
            angular_velocity: [0.0; 2],
            radius: cfg.radius,
            restitution: cfg.restitution,
        }
    }

    pub fn normal(&self) -> Vec3 {
        normal_from_angles(self.roll, self.pitch)
    }

    pub fn disc(&self, surface_velocity: Vec3) -> Disc {
        Disc { center: self.position, normal: self.normal(), velocity: surface_velocity, radius: self.radius }
    }
}

/// `[sin p cos r, -sin r, cos p cos r]`.
pub fn normal_from_angles(roll: f64, pitch: f64) -> Vec3 {
    Vec3::new(pitch.sin() * roll.cos(), -roll.sin(), pitch.cos() * roll.cos())
}

/// Inverse of [`normal_from_angles`] for normals with a positive z component.
pub fn angles_from_normal(n: &Vec3) -> (f64, f64) {
    (-n.y.clamp(-1.0, 1.0).asin(), n.x.atan2(n.z))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterceptPlan {
    pub p_collision: Vec3,
    pub n_collision: Vec3,
    pub roll: f64,
    pub pitch: f64,
    pub v_collision: Vec3,
    pub t_pre: f64,
    pub v_ball_pre: Vec3,
    pub v_ball_post: Vec3,
}

impl InterceptPlan {
    /// Racket center that puts the disc surface on the ball at contact.
    pub fn racket_center(&self, ball_radius: f64) -> Vec3 {
        self.p_collision - self.n_collision * ball_radius
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("ball never descends through the interception height")]
    Unreachable,
    #[error("required velocity change is too small to define a racket normal")]
    DegenerateNormal,
}

/// Collision point, orientation and racket velocity that return the ball to
/// `p_target` after `t_post` seconds of flight.
pub fn plan_intercept(
    ball: &BallState,
    h_pre: f64,
    p_target: Vec3,
    t_post: f64,
    beta: f64,
    gravity: f64,
) -> Result<InterceptPlan, PlanError> {
    let t_pre = time_to_height(ball.position.z, ball.velocity.z, h_pre, gravity, true)
        .ok_or(PlanError::Unreachable)?;
    let g = Vec3::new(0.0, 0.0, -gravity);
    let p_land = ball.position + ball.velocity * t_pre + g * (0.5 * t_pre * t_pre);
    let v_pre = ball.velocity + g * t_pre;
    let v_post = (p_target - p_land) / t_post - g * (0.5 * t_post);
    plan_exchange(p_land, v_pre, v_post, t_pre, beta)
}

/// Racket pose and velocity that turn `v_pre` into `v_post` at `p`.
pub fn plan_exchange(p: Vec3, v_pre: Vec3, v_post: Vec3, t_pre: f64, beta: f64) -> Result<InterceptPlan, PlanError> {
    let dv = v_post - v_pre;
    let norm = dv.norm();
    if !(norm > MIN_DELTA_V) {
        return Err(PlanError::DegenerateNormal);
    }
    let n = dv / norm;
    let (roll, pitch) = angles_from_normal(&n);
    Ok(InterceptPlan {
        p_collision: p,
        n_collision: n,
        roll,
        pitch,
        v_collision: (v_pre * beta + v_post) / (1.0 + beta),
        t_pre,
        v_ball_pre: v_pre,
        v_ball_post: v_post,
    })
}

/// Ball velocity after meeting a racket that follows `plan` exactly.
pub fn exchange(plan: &InterceptPlan, ball_velocity: Vec3, restitution: f64) -> Vec3 {
    reflect_off_surface(ball_velocity, plan.v_collision, plan.n_collision, restitution)
}

fn clamp_step(step: Vec3, limit: f64) -> Vec3 {
    let c = step.map(|v| v.clamp(-limit, limit));
    let n = c.norm();
    if n > limit {
        c * (limit / n)
    } else {
        c
    }
}

/// Advance the racket one step toward its goal pose.
///
/// The goal is the plan's collision pose, or home when there is no plan. Each
/// step covers the remaining offset divided by the remaining time, clamped to
/// the per-step limits.
pub fn step_racket(
    racket: &RacketState,
    goal: (Vec3, f64, f64),
    t_remaining: f64,
    dt: f64,
    d_max: f64,
    theta_max: f64,
) -> RacketState {
    let (goal_p, goal_roll, goal_pitch) = goal;
    let frac = dt / t_remaining.max(dt);
    let d = clamp_step((goal_p - racket.position) * frac, d_max);
    let rot = [(goal_roll - racket.roll) * frac, (goal_pitch - racket.pitch) * frac];
    let rn = rot[0].hypot(rot[1]);
    let rot = if rn > theta_max { rot.map(|r| r * theta_max / rn) } else { rot };
    RacketState {
        position: racket.position + d,
        roll: racket.roll + rot[0],
        pitch: racket.pitch + rot[1],
        linear_velocity: d / dt,
        angular_velocity: rot.map(|r| r / dt),
        ..racket.clone()
    }
}

/// Goal pose for a plan: racket center, roll, pitch.
pub fn plan_goal(plan: &InterceptPlan, ball_radius: f64) -> (Vec3, f64, f64) {
    (plan.racket_center(ball_radius), plan.roll, plan.pitch)
}

pub fn home_goal(cfg: &RacketConfig) -> (Vec3, f64, f64) {
    (Vec3::from(cfg.home), 0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn vertical_exchange_matches_hand_evaluation() {
        let plan = plan_exchange(
            Vec3::zeros(),
            Vec3::new(0.0, 0.0, -5.0),
            Vec3::new(0.0, 0.0, 5.0),
            0.0,
            0.8,
        )
        .unwrap();
        assert_abs_diff_eq!(plan.n_collision, Vec3::new(0.0, 0.0, 1.0), epsilon = 1e-15);
        assert_eq!((plan.roll, plan.pitch), (0.0, 0.0));
        assert_abs_diff_eq!(plan.v_collision.z, 1.0 / 1.8, epsilon = 1e-12);
        assert_abs_diff_eq!(plan.v_collision.z, 0.556, epsilon = 1e-3);
    }

    #[test]
    fn identical_velocities_have_no_normal() {
        let v = Vec3::new(1.0, 2.0, -3.0);
        assert_eq!(plan_exchange(Vec3::zeros(), v, v, 0.0, 0.8), Err(PlanError::DegenerateNormal));
    }

    #[test]
    fn rising_ball_below_height_is_unreachable() {
        let ball = BallState::with_velocity(Vec3::new(-3.0, 0.0, 0.2), Vec3::new(0.0, 0.0, 1.0));
        let r = plan_intercept(&ball, 1.0, Vec3::new(4.5, 0.0, 0.1), 1.2, 0.8, 9.81);
        assert_eq!(r, Err(PlanError::Unreachable));
    }

    #[test]
    fn proportional_step() {
        let cfg = RacketConfig::default();
        let r = RacketState::at_home(&cfg);
        let goal = r.position + Vec3::new(1.0, 0.0, 0.0);
        let n = step_racket(&r, (goal, 0.0, 0.0), 1.0, 0.01, 0.05, 0.05);
        assert_abs_diff_eq!(n.position.x - r.position.x, 0.01, epsilon = 1e-12);
    }

    #[test]
    fn clamped_step() {
        let cfg = RacketConfig::default();
        let r = RacketState::at_home(&cfg);
        let goal = r.position + Vec3::new(10.0, 0.0, 0.0);
        let n = step_racket(&r, (goal, 0.0, 0.0), 1.0, 0.01, 0.05, 0.05);
        assert_abs_diff_eq!(n.position.x - r.position.x, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn reachable_goal_is_hit_on_time() {
        let cfg = RacketConfig::default();
        let mut r = RacketState::at_home(&cfg);
        let goal = (r.position + Vec3::new(0.3, -0.2, 0.4), 0.1, -0.2);
        let dt = 0.01;
        let steps = 100;
        for k in 0..steps {
            let t_rem = (steps - k) as f64 * dt;
            r = step_racket(&r, goal, t_rem, dt, 0.06, 0.05);
        }
        assert!((r.position - goal.0).norm() < 1e-6);
        assert!((r.roll - goal.1).abs() < 1e-6 && (r.pitch - goal.2).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn angle_round_trip(roll in -1.5f64..1.5, pitch in -1.5f64..1.5) {
            let n = normal_from_angles(roll, pitch);
            let (r, p) = angles_from_normal(&n);
            prop_assert!((normal_from_angles(r, p) - n).norm() < 1e-9);
        }

        #[test]
        fn planned_exchange_returns_planned_velocity(
            x in -8.0f64..-1.0, y in -4.0f64..4.0, z in 2.0f64..6.0,
            vx in -10.0f64..-1.0, vy in -2.0f64..2.0, vz in -8.0f64..2.0,
        ) {
            let ball = BallState::with_velocity(Vec3::new(x, y, z), Vec3::new(vx, vy, vz));
            let plan = plan_intercept(&ball, 1.0, Vec3::new(4.5, 0.0, 0.1), 1.2, 0.8, 9.81).unwrap();
            prop_assert!((plan.n_collision.norm() - 1.0).abs() < 1e-12);
            let post = exchange(&plan, plan.v_ball_pre, 0.8);
            prop_assert!((post - plan.v_ball_post).norm() < 1e-6);
        }

        #[test]
        fn steps_respect_limits(
            gx in -20.0f64..20.0, gy in -20.0f64..20.0, gz in -5.0f64..5.0,
            gr in -1.0f64..1.0, gp in -1.0f64..1.0, t in 0.0f64..2.0,
        ) {
            let cfg = RacketConfig::default();
            let r = RacketState::at_home(&cfg);
            let n = step_racket(&r, (Vec3::new(gx, gy, gz), gr, gp), t, 0.01, cfg.d_max, cfg.theta_max);
            prop_assert!((n.position - r.position).norm() <= cfg.d_max + 1e-12);
            prop_assert!((n.roll - r.roll).hypot(n.pitch - r.pitch) <= cfg.theta_max + 1e-12);
        }
    }
}
