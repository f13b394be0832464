//! Trajectory tracking and strike planning shared by the scripted drills.

use serde::{Deserialize, Serialize};

use crate::ball::{time_to_height, BallState};
use crate::dynamics::{BodyRateCommand, DroneParams, DroneState, RateController, Vec3, ROTORS};
use crate::racket::plan_exchange;
use crate::tasks::{Action, ActionMode};

/// Tilt acceleration the attitude loop plans with when braking, rad/s^2.
const TILT_ACCEL: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackGains {
    pub kp: f64,
    pub kd: f64,
    /// Attitude error to body rate, 1/s.
    pub k_att: f64,
    pub k_yaw: f64,
    /// Largest commanded tilt, rad.
    pub max_tilt: f64,
}

impl Default for TrackGains {
    fn default() -> Self {
        TrackGains { kp: 25.0, kd: 10.0, k_att: 20.0, k_yaw: 2.0, max_tilt: 0.5 }
    }
}

/// Desired position, velocity and feed-forward acceleration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reference {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
}

impl Reference {
    pub fn hold(position: Vec3) -> Self {
        Reference { position, velocity: Vec3::zeros(), acceleration: Vec3::zeros() }
    }
}

/// Geometric tracking controller producing a collective-thrust/body-rate command.
#[derive(Clone, Debug)]
pub struct Tracker {
    params: DroneParams,
    rate: RateController,
    gravity: f64,
}

impl Tracker {
    pub fn new(params: &DroneParams, gravity: f64) -> Self {
        let rate = RateController::new(params).expect("validated drone params have an invertible mixer");
        Tracker { params: params.clone(), rate, gravity }
    }

    pub fn command(&self, state: &DroneState, r: &Reference, gains: &TrackGains) -> BodyRateCommand {
        let g = self.gravity;
        let mut a = r.acceleration + (r.position - state.position) * gains.kp + (r.velocity - state.velocity) * gains.kd;
        a.z = a.z.max(-0.8 * g);
        let lateral_cap = (g + a.z) * gains.max_tilt.tan();
        let lateral = a.xy().norm();
        if lateral > lateral_cap {
            let s = lateral_cap / lateral;
            a.x *= s;
            a.y *= s;
        }
        let force = (a + Vec3::new(0.0, 0.0, g)) * self.params.mass;
        let rot = state.rotation();
        let b3: Vec3 = rot.column(2).into();
        let b3d = force.normalize();
        let thrust = force.dot(&b3).max(0.0) / (ROTORS as f64 * self.params.max_rotor_thrust);
        self.tilt_rates(state, b3d, thrust, gains)
    }

    /// Body rates turning body z toward `b3d`, braking along a square-root
    /// profile so the tilt settles without overshoot.
    fn tilt_rates(&self, state: &DroneState, b3d: Vec3, thrust: f64, gains: &TrackGains) -> BodyRateCommand {
        let rot = state.rotation();
        let b3: Vec3 = rot.column(2).into();
        let axis = rot.transpose() * b3.cross(&b3d);
        let angle = axis.norm().min(1.0).asin().max(b3.dot(&b3d).acos().min(std::f64::consts::PI));
        let speed = (gains.k_att * angle).min((2.0 * TILT_ACCEL * angle).sqrt());
        let w = if axis.norm() > 1e-12 { axis * (speed / axis.norm()) } else { Vec3::zeros() };
        let yaw = rot[(1, 0)].atan2(rot[(0, 0)]);
        BodyRateCommand { thrust: thrust.clamp(0.0, 1.0), rates: [w.x, w.y, -gains.k_yaw * yaw] }
            .saturate(self.rate.rate_limit())
    }

    /// Hold body z along `axis` and track only the vertical velocity of `r`.
    pub fn attitude_command(&self, state: &DroneState, axis: Vec3, r: &Reference, gains: &TrackGains) -> BodyRateCommand {
        let g = self.gravity;
        let az = r.acceleration.z + gains.kd * (r.velocity.z - state.velocity.z);
        let rot = state.rotation();
        let b3: Vec3 = rot.column(2).into();
        let b3d = axis.normalize();
        let force = self.params.mass * (g + az).max(0.2 * g) / b3.z.max(0.3);
        self.tilt_rates(state, b3d, force / (ROTORS as f64 * self.params.max_rotor_thrust), gains)
    }

    pub fn action(&self, state: &DroneState, r: &Reference, gains: &TrackGains, mode: ActionMode) -> Action {
        self.wrap(state, self.command(state, r, gains), mode)
    }

    /// Turn a CTBR command into an action of the requested mode.
    pub fn wrap(&self, state: &DroneState, cmd: BodyRateCommand, mode: ActionMode) -> Action {
        match mode {
            ActionMode::Ctbr => Action::Ctbr(cmd),
            ActionMode::Prt => Action::Rotor(self.rate.thrusts(state, &cmd)),
        }
    }

    pub fn hover(&self, state: &DroneState, target: Vec3, gains: &TrackGains, mode: ActionMode) -> Action {
        self.action(state, &Reference::hold(target), gains, mode)
    }

    pub fn params(&self) -> &DroneParams {
        &self.params
    }

    pub fn gravity(&self) -> f64 {
        self.gravity
    }
}

/// Where and how to meet the ball so it leaves toward `target`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrikePlan {
    /// Time until contact, s.
    pub tau: f64,
    pub ball_at_contact: Vec3,
    pub normal: Vec3,
    /// Racket velocity at contact.
    pub racket_velocity: Vec3,
    /// Center of mass at contact.
    pub com_at_contact: Vec3,
    pub ball_post: Vec3,
}

/// Plan a strike at the descending crossing of `contact_z` that sends the ball
/// to `target` in `flight_time` seconds.
pub fn plan_strike(
    ball: &BallState,
    contact_z: f64,
    target: Vec3,
    flight_time: f64,
    restitution: f64,
    ball_radius: f64,
    racket_offset: f64,
    gravity: f64,
) -> Option<StrikePlan> {
    let tau = time_to_height(ball.position.z, ball.velocity.z, contact_z, gravity, true)?;
    let g = Vec3::new(0.0, 0.0, -gravity);
    let p = ball.position + ball.velocity * tau + g * (0.5 * tau * tau);
    let v_pre = ball.velocity + g * tau;
    let v_post = (target - p) / flight_time - g * (0.5 * flight_time);
    let plan = plan_exchange(p, v_pre, v_post, tau, restitution).ok()?;
    let n = plan.n_collision;
    if n.z < 0.3 {
        return None;
    }
    Some(StrikePlan {
        tau,
        ball_at_contact: p,
        normal: n,
        racket_velocity: plan.v_collision,
        com_at_contact: p - n * (ball_radius + racket_offset),
        ball_post: v_post,
    })
}

/// Reference that arrives at the contact pose with the racket's normal speed
/// and the tilt held by a constant lateral acceleration.
///
/// Beyond `lead` seconds before contact the reference waits at the start of
/// the final approach.
pub fn strike_reference(plan: &StrikePlan, lead: f64, gravity: f64) -> Reference {
    let n = plan.normal;
    let a_ff = Vec3::new(n.x / n.z, n.y / n.z, 0.0) * gravity;
    let speed = plan.racket_velocity.dot(&n);
    // Contact velocity whose lateral part is exactly what the approach builds up.
    let lateral = a_ff * lead;
    let lambda = (speed - lateral.dot(&n)) / n.z;
    let v_contact = lateral + Vec3::new(0.0, 0.0, lambda);
    let tau = plan.tau.min(lead);
    let position = plan.com_at_contact - v_contact * tau + a_ff * (0.5 * tau * tau);
    if plan.tau > lead {
        Reference { position, velocity: Vec3::new(0.0, 0.0, lambda), acceleration: Vec3::zeros() }
    } else {
        Reference { position, velocity: v_contact - a_ff * tau, acceleration: a_ff }
    }
}
