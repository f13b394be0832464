//! Rigid-body quadrotor model: per-rotor thrust wrench, 6-DoF integration and
//! the collective-thrust/body-rate inner loop.

use nalgebra::{Matrix3, Matrix4, Quaternion, UnitQuaternion, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Number of rotors on every supported airframe.
pub const ROTORS: usize = 4;

/// Length of the flattened root state.
pub const ROOT_STATE_LEN: usize = 23;

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;

const DEFAULT_DRONE: &str = include_str!("../configs/drone_iris.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotorSpec {
    /// Rotor hub position in the body frame, m.
    pub position: [f64; 3],
    /// Unit thrust direction in the body frame.
    pub axis: [f64; 3],
    /// +1 for clockwise propellers, -1 for counter-clockwise.
    pub spin: i8,
    /// Yaw moment per newton of thrust, m.
    pub force_to_moment: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DroneParams {
    pub mass: f64,
    pub inertia_diag: [f64; 3],
    pub max_rotor_thrust: f64,
    pub racket_radius: f64,
    pub racket_restitution: f64,
    pub racket_offset_body: [f64; 3],
    pub body_radius: f64,
    pub hull_radius: f64,
    pub rate_gains: [f64; 3],
    pub rate_limit: f64,
    pub rotors: Vec<RotorSpec>,
}

impl Default for DroneParams {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_DRONE).expect("shipped drone config is valid")
    }
}

impl DroneParams {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let params: DroneParams =
            toml::from_str(text).map_err(|e| Error::config(format!("drone config: {e}")))?;
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("drone {name} must be positive, got {v}")))
            }
        };
        positive("mass", self.mass)?;
        for (i, j) in self.inertia_diag.iter().enumerate() {
            positive(&format!("inertia_diag[{i}]"), *j)?;
        }
        positive("max_rotor_thrust", self.max_rotor_thrust)?;
        positive("racket_radius", self.racket_radius)?;
        positive("body_radius", self.body_radius)?;
        positive("hull_radius", self.hull_radius)?;
        positive("rate_limit", self.rate_limit)?;
        if !(self.racket_restitution > 0.0 && self.racket_restitution <= 1.0) {
            return Err(Error::config("racket_restitution must lie in (0, 1]"));
        }
        if self.rotors.len() != ROTORS {
            return Err(Error::config(format!(
                "expected {ROTORS} rotors, found {}",
                self.rotors.len()
            )));
        }
        let cw = self.rotors.iter().filter(|r| r.spin == 1).count();
        let ccw = self.rotors.iter().filter(|r| r.spin == -1).count();
        if cw != 2 || ccw != 2 {
            return Err(Error::config("need exactly two rotors of each spin sign"));
        }
        for r in &self.rotors {
            let axis = Vec3::from(r.axis);
            if (axis.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::config("rotor axes must be unit vectors"));
            }
        }
        Ok(())
    }

    pub fn inertia(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vec3::from(self.inertia_diag))
    }

    /// Normalized per-rotor command that balances gravity when level.
    pub fn hover_fraction(&self, gravity: f64) -> f64 {
        self.mass * gravity / (ROTORS as f64 * self.max_rotor_thrust)
    }

    pub fn racket_offset(&self) -> Vec3 {
        Vec3::from(self.racket_offset_body)
    }

    /// Columns map one newton on rotor `i` to (body-z force, body torque).
    fn allocation(&self) -> Matrix4<f64> {
        let mut a = Matrix4::zeros();
        for (i, r) in self.rotors.iter().enumerate() {
            let axis = Vec3::from(r.axis);
            let arm = Vec3::from(r.position);
            let torque = arm.cross(&axis) + axis * (r.spin as f64 * r.force_to_moment);
            a[(0, i)] = axis.z;
            a[(1, i)] = torque.x;
            a[(2, i)] = torque.y;
            a[(3, i)] = torque.z;
        }
        a
    }
}

/// Normalized per-rotor thrust, each in [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotorThrusts(pub [f64; ROTORS]);

impl RotorThrusts {
    pub fn new(raw: [f64; ROTORS]) -> Self {
        // NaN maps to zero so a broken command cannot poison the integrator.
        RotorThrusts(raw.map(|f| if f.is_nan() { 0.0 } else { f.clamp(0.0, 1.0) }))
    }

    pub fn uniform(f: f64) -> Self {
        Self::new([f; ROTORS])
    }

    pub fn zero() -> Self {
        RotorThrusts([0.0; ROTORS])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyRateCommand {
    /// Collective thrust as a fraction of the total available thrust.
    pub thrust: f64,
    /// Commanded roll, pitch and yaw rates, rad/s, body frame.
    pub rates: [f64; 3],
}

impl BodyRateCommand {
    /// Clamp into the valid command box.
    pub fn saturate(self, rate_limit: f64) -> Self {
        let clean = |v: f64| if v.is_nan() { 0.0 } else { v };
        BodyRateCommand {
            thrust: clean(self.thrust).clamp(0.0, 1.0),
            rates: self.rates.map(|r| clean(r).clamp(-rate_limit, rate_limit)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DroneState {
    pub position: Vec3,
    pub velocity: Vec3,
    /// Body-to-world rotation as a unit quaternion (w, i, j, k).
    pub orientation: Quaternion<f64>,
    /// Angular velocity in the body frame, rad/s.
    pub angular_velocity: Vec3,
    pub rotor_thrust: [f64; ROTORS],
}

impl DroneState {
    /// Level and at rest at `position`, rotors at `throttle`.
    pub fn at_rest(position: Vec3, throttle: f64) -> Self {
        DroneState {
            position,
            velocity: Vec3::zeros(),
            orientation: Quaternion::identity(),
            angular_velocity: Vec3::zeros(),
            rotor_thrust: [throttle; ROTORS],
        }
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        rotation_matrix(&self.orientation)
    }

    pub fn heading_forward(&self) -> Vec3 {
        self.rotation().column(0).into()
    }

    pub fn heading_up(&self) -> Vec3 {
        self.rotation().column(2).into()
    }

    /// Racket disc center in the world frame.
    pub fn racket_center(&self, params: &DroneParams) -> Vec3 {
        self.position + self.rotation() * params.racket_offset()
    }

    /// World-frame velocity of the racket center.
    pub fn racket_velocity(&self, params: &DroneParams) -> Vec3 {
        let r = self.rotation();
        self.velocity + r * self.angular_velocity.cross(&params.racket_offset())
    }

    /// position | quaternion (w,x,y,z) | velocity | angular velocity | forward | up | rotors.
    pub fn root_state(&self) -> [f64; ROOT_STATE_LEN] {
        let q = &self.orientation;
        let fwd = self.heading_forward();
        let up = self.heading_up();
        let p = &self.position;
        let v = &self.velocity;
        let w = &self.angular_velocity;
        let f = &self.rotor_thrust;
        [
            p.x, p.y, p.z, q.w, q.i, q.j, q.k, v.x, v.y, v.z, w.x, w.y, w.z, fwd.x, fwd.y, fwd.z,
            up.x, up.y, up.z, f[0], f[1], f[2], f[3],
        ]
    }
}

/// Rotation matrix of a (not necessarily normalized) quaternion.
pub fn rotation_matrix(q: &Quaternion<f64>) -> Matrix3<f64> {
    UnitQuaternion::from_quaternion(*q).to_rotation_matrix().into_inner()
}

/// Integration fault carrying the first state field that went non-finite.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("non-finite drone state in `{field}`")]
pub struct DynamicsFault {
    pub field: &'static str,
}

/// Total rotor force in the world frame and torque in the body frame.
pub fn rotor_wrench(
    params: &DroneParams,
    thrusts: &RotorThrusts,
    orientation: &Quaternion<f64>,
) -> (Vec3, Vec3) {
    let mut force_body = Vec3::zeros();
    let mut torque = Vec3::zeros();
    for (rotor, frac) in params.rotors.iter().zip(thrusts.0) {
        let f = frac * params.max_rotor_thrust;
        let axis = Vec3::from(rotor.axis);
        let force = axis * f;
        force_body += force;
        torque += Vec3::from(rotor.position).cross(&force)
            + force * (rotor.spin as f64 * rotor.force_to_moment);
    }
    (rotation_matrix(orientation) * force_body, torque)
}

/// Semi-implicit Euler step: velocities first, then positions and attitude.
pub fn step_drone(
    params: &DroneParams,
    state: &DroneState,
    thrusts: &RotorThrusts,
    gravity: f64,
    external_force: Vec3,
    dt: f64,
) -> Result<DroneState, DynamicsFault> {
    let (force, torque) = rotor_wrench(params, thrusts, &state.orientation);
    let accel = (force + external_force) / params.mass - Vec3::new(0.0, 0.0, gravity);
    let velocity = state.velocity + accel * dt;
    let position = state.position + velocity * dt;

    let j = Vec3::from(params.inertia_diag);
    let w = state.angular_velocity;
    let gyro = w.cross(&j.component_mul(&w));
    let w_dot = (torque - gyro).component_div(&j);
    let angular_velocity = w + w_dot * dt;

    let q = state.orientation;
    let omega = Quaternion::new(0.0, angular_velocity.x, angular_velocity.y, angular_velocity.z);
    let q_dot = (q * omega) * 0.5;
    let mut orientation = q + q_dot * dt;
    let norm = orientation.norm();
    if norm.is_finite() && norm > 0.0 {
        orientation /= norm;
    }

    let next = DroneState {
        position,
        velocity,
        orientation,
        angular_velocity,
        rotor_thrust: thrusts.0,
    };
    check_finite(&next)?;
    Ok(next)
}

fn check_finite(s: &DroneState) -> Result<(), DynamicsFault> {
    let finite = |v: &Vec3| v.iter().all(|x| x.is_finite());
    if !finite(&s.position) {
        return Err(DynamicsFault { field: "position" });
    }
    if !finite(&s.velocity) {
        return Err(DynamicsFault { field: "velocity" });
    }
    if !s.orientation.coords.iter().all(|x| x.is_finite()) {
        return Err(DynamicsFault { field: "orientation" });
    }
    if !finite(&s.angular_velocity) {
        return Err(DynamicsFault { field: "angular_velocity" });
    }
    Ok(())
}

/// Proportional body-rate loop mapping CTBR commands onto rotor thrusts.
#[derive(Clone, Debug)]
pub struct RateController {
    mixer: Matrix4<f64>,
    inertia: Vec3,
    gains: Vec3,
    rate_limit: f64,
    total_thrust: f64,
    max_rotor_thrust: f64,
}

impl RateController {
    pub fn new(params: &DroneParams) -> Result<Self> {
        let mixer = params
            .allocation()
            .try_inverse()
            .ok_or_else(|| Error::config("rotor allocation matrix is singular"))?;
        Ok(RateController {
            mixer,
            inertia: Vec3::from(params.inertia_diag),
            gains: Vec3::from(params.rate_gains),
            rate_limit: params.rate_limit,
            total_thrust: ROTORS as f64 * params.max_rotor_thrust,
            max_rotor_thrust: params.max_rotor_thrust,
        })
    }

    pub fn rate_limit(&self) -> f64 {
        self.rate_limit
    }

    /// Desired (body-z force, body torque) for a command.
    pub fn desired_wrench(&self, state: &DroneState, cmd: &BodyRateCommand) -> Vector4<f64> {
        let cmd = cmd.saturate(self.rate_limit);
        let err = Vec3::from(cmd.rates) - state.angular_velocity;
        let torque = self.inertia.component_mul(&self.gains.component_mul(&err));
        Vector4::new(cmd.thrust * self.total_thrust, torque.x, torque.y, torque.z)
    }

    pub fn thrusts(&self, state: &DroneState, cmd: &BodyRateCommand) -> RotorThrusts {
        let f = self.mixer * self.desired_wrench(state, cmd);
        RotorThrusts::new([0, 1, 2, 3].map(|i| f[i] / self.max_rotor_thrust))
    }
}

/// One-shot form of [`RateController::thrusts`].
pub fn ctbr_controller(
    params: &DroneParams,
    state: &DroneState,
    cmd: &BodyRateCommand,
) -> Result<RotorThrusts> {
    Ok(RateController::new(params)?.thrusts(state, cmd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params() -> DroneParams {
        DroneParams::default()
    }

    #[test]
    fn shipped_config_matches_documented_defaults() {
        let p = params();
        assert_eq!(p.mass, 1.5);
        assert_eq!(p.inertia_diag, [0.029, 0.029, 0.055]);
        assert_eq!(p.max_rotor_thrust, 7.0);
        assert_eq!(p.racket_radius, 0.2);
        assert_eq!(p.racket_restitution, 0.8);
        assert_eq!(p.rate_gains, [20.0, 20.0, 4.0]);
        assert_eq!(p.rate_limit, 6.0);
    }

    #[test]
    fn rejects_unbalanced_spin_layout() {
        let mut p = params();
        p.rotors[0].spin = 1;
        assert!(p.validate().is_err());
        let mut p = params();
        p.mass = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn equal_thrusts_level_give_pure_lift() {
        let p = params();
        let (f, t) = rotor_wrench(&p, &RotorThrusts::uniform(0.5), &Quaternion::identity());
        assert_abs_diff_eq!(t, Vec3::zeros(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.z, 14.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_thrust_zero_wrench() {
        let (f, t) = rotor_wrench(&params(), &RotorThrusts::zero(), &Quaternion::identity());
        assert_eq!(f, Vec3::zeros());
        assert_eq!(t, Vec3::zeros());
    }

    #[test]
    fn single_rotor_torque_matches_hand_evaluation() {
        // Rotor 0 sits at (a, -a, 0) with a = 0.23/sqrt(2), thrust along +z,
        // spin -1. T x f = (y f, -x f, 0) = (-a f, -a f, 0); yaw = -k f.
        let p = params();
        let f = p.max_rotor_thrust;
        let a = 0.23 / 2f64.sqrt();
        let (_, t) = rotor_wrench(&p, &RotorThrusts([1.0, 0.0, 0.0, 0.0]), &Quaternion::identity());
        assert_abs_diff_eq!(t.x, -a * f, epsilon = 1e-12);
        assert_abs_diff_eq!(t.y, -a * f, epsilon = 1e-12);
        assert_abs_diff_eq!(t.z, -0.016 * f, epsilon = 1e-12);
        assert_abs_diff_eq!(t.xy().norm(), 0.23 * f, epsilon = 1e-12);
        // Front-left rotor, clockwise: (a, a) -> (a f, -a f), yaw +k f.
        let (_, t) = rotor_wrench(&p, &RotorThrusts([0.0, 0.0, 1.0, 0.0]), &Quaternion::identity());
        assert_abs_diff_eq!(t.x, a * f, epsilon = 1e-12);
        assert_abs_diff_eq!(t.y, -a * f, epsilon = 1e-12);
        assert_abs_diff_eq!(t.z, 0.016 * f, epsilon = 1e-12);
    }

    #[test]
    fn hover_holds_position() {
        let p = params();
        let dt = 0.01;
        let hover = RotorThrusts::uniform(p.hover_fraction(GRAVITY));
        let mut s = DroneState::at_rest(Vec3::new(1.0, 2.0, 3.0), hover.0[0]);
        for _ in 0..100 {
            s = step_drone(&p, &s, &hover, GRAVITY, Vec3::zeros(), dt).unwrap();
        }
        assert!((s.position - Vec3::new(1.0, 2.0, 3.0)).norm() < 1e-6 * dt * dt * 100.0);
        assert_eq!(s.angular_velocity, Vec3::zeros());
    }

    #[test]
    fn free_fall_matches_ballistic_drop() {
        let p = params();
        let dt = 0.01;
        let mut s = DroneState::at_rest(Vec3::new(0.0, 0.0, 100.0), 0.0);
        let n = 200;
        for _ in 0..n {
            s = step_drone(&p, &s, &RotorThrusts::zero(), GRAVITY, Vec3::zeros(), dt).unwrap();
        }
        let t = n as f64 * dt;
        let expected = -0.5 * GRAVITY * t * t;
        // Semi-implicit Euler overshoots by g t dt / 2.
        assert!(((s.position.z - 100.0) - expected).abs() <= GRAVITY * t * dt);
    }

    #[test]
    fn pure_yaw_torque_spins_up_linearly() {
        let p = params();
        let dt = 0.001;
        // Rotors 2 and 3 are clockwise; raise them and lower the others so the
        // roll/pitch arms cancel and only yaw remains.
        let thrusts = RotorThrusts([0.4, 0.4, 0.6, 0.6]);
        let (_, torque) = rotor_wrench(&p, &thrusts, &Quaternion::identity());
        assert_abs_diff_eq!(torque.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(torque.y, 0.0, epsilon = 1e-12);
        let mut s = DroneState::at_rest(Vec3::new(0.0, 0.0, 10.0), 0.5);
        let t = 0.5;
        for _ in 0..(t / dt) as usize {
            s = step_drone(&p, &s, &thrusts, GRAVITY, Vec3::zeros(), dt).unwrap();
        }
        let expected = torque.z * t / p.inertia_diag[2];
        assert!((s.angular_velocity.z - expected).abs() < 1e-9);
        assert_abs_diff_eq!(s.angular_velocity.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.angular_velocity.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn non_finite_input_faults_with_field() {
        let p = params();
        let mut s = DroneState::at_rest(Vec3::zeros(), 0.0);
        s.velocity.x = f64::INFINITY;
        let err = step_drone(&p, &s, &RotorThrusts::zero(), GRAVITY, Vec3::zeros(), 0.01).unwrap_err();
        assert_eq!(err.field, "position");
    }

    #[test]
    fn vacuum_energy_drift_is_small() {
        let p = params();
        let dt = 0.01;
        let mut s = DroneState::at_rest(Vec3::new(0.0, 0.0, 500.0), 0.0);
        s.velocity = Vec3::new(3.0, -1.0, 2.0);
        let energy = |s: &DroneState| {
            0.5 * p.mass * s.velocity.norm_squared() + p.mass * GRAVITY * s.position.z
        };
        let e0 = energy(&s);
        for _ in 0..1000 {
            s = step_drone(&p, &s, &RotorThrusts::zero(), GRAVITY, Vec3::zeros(), dt).unwrap();
        }
        assert!(((energy(&s) - e0) / e0).abs() < 0.005);
    }

    #[test]
    fn ctbr_equilibrium_gives_equal_thrusts() {
        let p = params();
        let hover = p.hover_fraction(GRAVITY);
        let mut s = DroneState::at_rest(Vec3::zeros(), hover);
        s.angular_velocity = Vec3::new(0.3, -0.2, 0.1);
        let cmd = BodyRateCommand { thrust: hover, rates: [0.3, -0.2, 0.1] };
        let f = ctbr_controller(&p, &s, &cmd).unwrap();
        for v in f.0 {
            assert_abs_diff_eq!(v, hover, epsilon = 1e-12);
        }
        let idle = BodyRateCommand { thrust: 0.0, rates: [0.0; 3] };
        let s = DroneState::at_rest(Vec3::zeros(), 0.0);
        assert_eq!(ctbr_controller(&p, &s, &idle).unwrap(), RotorThrusts::zero());
    }

    #[test]
    fn roll_rate_error_matches_pseudo_inverse_oracle() {
        let p = params();
        let s = DroneState::at_rest(Vec3::zeros(), 0.5);
        let cmd = BodyRateCommand { thrust: 0.5, rates: [1.0, 0.0, 0.0] };
        let ctrl = RateController::new(&p).unwrap();
        let got = ctrl.thrusts(&s, &cmd);

        // Independent route: SVD pseudo-inverse of the allocation matrix.
        let pinv = p.allocation().pseudo_inverse(1e-12).unwrap();
        let want = pinv * ctrl.desired_wrench(&s, &cmd) / p.max_rotor_thrust;
        for i in 0..ROTORS {
            assert_abs_diff_eq!(got.0[i], want[i], epsilon = 1e-9);
        }
        // Positive roll torque: rotors on the +y side (front-left, rear-left)
        // must push harder than those on -y.
        let (_, torque) = rotor_wrench(&p, &got, &Quaternion::identity());
        assert!(torque.x > 0.0);
        assert!(got.0[2] > got.0[0] && got.0[1] > got.0[3]);
    }

    #[test]
    fn singular_allocation_is_a_config_error() {
        let mut p = params();
        for r in &mut p.rotors {
            r.position = [0.0, 0.0, 0.0];
        }
        assert!(RateController::new(&p).is_err());
    }

    #[test]
    fn root_state_layout() {
        let s = DroneState::at_rest(Vec3::new(1.0, 2.0, 3.0), 0.25);
        let r = s.root_state();
        assert_eq!(r.len(), 23);
        assert_eq!(&r[0..3], &[1.0, 2.0, 3.0]);
        assert_eq!(&r[3..7], &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(&r[13..16], &[1.0, 0.0, 0.0]);
        assert_eq!(&r[16..19], &[0.0, 0.0, 1.0]);
        assert_eq!(&r[19..23], &[0.25; 4]);
    }

    proptest! {
        #[test]
        fn wrench_is_linear_in_thrust(
            f in prop::array::uniform4(0.0f64..0.5),
            scale in 0.0f64..2.0,
            qw in -1.0f64..1.0, qx in -1.0f64..1.0, qy in -1.0f64..1.0, qz in -1.0f64..1.0,
        ) {
            prop_assume!((qw * qw + qx * qx + qy * qy + qz * qz) > 1e-3);
            let q = Quaternion::new(qw, qx, qy, qz).normalize();
            let p = params();
            let (f1, t1) = rotor_wrench(&p, &RotorThrusts::new(f), &q);
            let (f2, t2) = rotor_wrench(&p, &RotorThrusts::new(f.map(|x| x * scale)), &q);
            prop_assert!((f2 - f1 * scale).norm() <= 1e-12 * (1.0 + f1.norm()));
            prop_assert!((t2 - t1 * scale).norm() <= 1e-12 * (1.0 + t1.norm()));
        }

        #[test]
        fn quaternion_stays_unit(
            thrusts in prop::array::uniform4(0.0f64..1.0),
            steps in 1usize..400,
        ) {
            let p = params();
            let mut s = DroneState::at_rest(Vec3::new(0.0, 0.0, 50.0), 0.5);
            let t = RotorThrusts::new(thrusts);
            for _ in 0..steps {
                s = step_drone(&p, &s, &t, GRAVITY, Vec3::zeros(), 0.01).unwrap();
                prop_assert!((s.orientation.norm() - 1.0).abs() < 1e-6);
            }
        }

        #[test]
        fn step_is_deterministic(thrusts in prop::array::uniform4(0.0f64..1.0)) {
            let p = params();
            let s = DroneState::at_rest(Vec3::new(0.0, 0.0, 5.0), 0.5);
            let t = RotorThrusts::new(thrusts);
            let a = step_drone(&p, &s, &t, GRAVITY, Vec3::zeros(), 0.01).unwrap();
            let b = step_drone(&p, &s, &t, GRAVITY, Vec3::zeros(), 0.01).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
