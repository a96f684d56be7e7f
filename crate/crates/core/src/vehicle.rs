//! The plant: differential-drive kinematics, tracked-vehicle load and the
//! DC motor driving each side.
//!
//! Every function here is pure. Motor speed equals wheel speed (direct
//! drive); gearbox and bearing losses are lumped into the motor's viscous
//! friction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::normalize_angle;

/// Below this wheel speed (rad/s) a side is treated as stationary when
/// deciding the direction of Coulomb friction.
pub const STICTION_DEADBAND: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum VehicleError {
    #[error("time step must be positive and finite, got {0}")]
    BadTimeStep(f64),
    #[error("non-finite drive input: {0}")]
    NonFinite(&'static str),
}

/// Robot pose: COM position (m) and heading (rad, counterclockwise from +X).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    /// Builds a pose with the heading wrapped into (−π, π].
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta: normalize_angle(theta) }
    }
}

/// Body-frame velocity. `v` is the lateral speed and is always zero for a
/// nonholonomic vehicle.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BodyVelocity {
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PoseRate {
    pub x_dot: f64,
    pub y_dot: f64,
    pub theta_dot: f64,
}

/// Half length (along the heading) and half width of the robot rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfExtents {
    pub length: f64,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    /// Drive wheel radius R_t (m).
    pub wheel_radius: f64,
    /// Distance between left and right drive wheels T_r (m).
    pub track_width: f64,
    pub mass: f64,
    pub gravity: f64,
    /// Lever arm k of the normal-force split (m).
    pub drive_arm: f64,
    /// Lever arm L_r of the normal-force split (m).
    pub rear_arm: f64,
    /// Belt length term L_2 of the wheel-train inertia (m).
    pub belt_span: f64,
    /// Effective friction coefficient μ.
    pub friction_coeff: f64,
    /// Effective rotational inertia of one wheel (kg·m²).
    pub wheel_inertia: f64,
    pub footprint: HalfExtents,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            wheel_radius: 0.03,
            track_width: 0.20,
            mass: 2.0,
            gravity: 9.81,
            drive_arm: 0.05,
            rear_arm: 0.15,
            belt_span: 0.03,
            friction_coeff: 0.5,
            wheel_inertia: 1e-5,
            footprint: HalfExtents { length: 0.10, width: 0.12 },
        }
    }
}

impl VehicleParams {
    /// Inertia multiplier of one side's wheel train: a drive wheel, two
    /// sprockets and the belt.
    pub fn wheel_train_factor(&self) -> f64 {
        2.0 + self.belt_span / self.wheel_radius
    }

    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, x) in [
            ("wheel_radius", self.wheel_radius),
            ("track_width", self.track_width),
            ("mass", self.mass),
            ("gravity", self.gravity),
            ("drive_arm", self.drive_arm),
            ("rear_arm", self.rear_arm),
            ("belt_span", self.belt_span),
            ("wheel_inertia", self.wheel_inertia),
            ("footprint.length", self.footprint.length),
            ("footprint.width", self.footprint.width),
        ] {
            if !(x.is_finite() && x > 0.0) {
                v.push(format!("vehicle.{name} must be positive, got {x}"));
            }
        }
        if !(self.friction_coeff.is_finite() && self.friction_coeff >= 0.0) {
            v.push(format!("vehicle.friction_coeff must be >= 0, got {}", self.friction_coeff));
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotorParams {
    /// Torque constant K_i (N·m/A).
    pub torque_constant: f64,
    /// Back-emf constant K_b (V·s/rad).
    pub back_emf_constant: f64,
    /// Armature resistance R_a (Ω).
    pub armature_resistance: f64,
    /// Armature inductance L_a (H). Zero selects the algebraic armature.
    pub armature_inductance: f64,
    /// Rotor inertia J_m (kg·m²).
    pub rotor_inertia: f64,
    /// Lumped viscous friction B_m (N·m·s/rad).
    pub viscous_friction: f64,
}

impl Default for MotorParams {
    fn default() -> Self {
        Self {
            torque_constant: 0.05,
            back_emf_constant: 0.05,
            armature_resistance: 2.0,
            armature_inductance: 0.0,
            rotor_inertia: 1e-5,
            viscous_friction: 1e-4,
        }
    }
}

impl MotorParams {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, x) in [
            ("torque_constant", self.torque_constant),
            ("back_emf_constant", self.back_emf_constant),
            ("armature_resistance", self.armature_resistance),
            ("rotor_inertia", self.rotor_inertia),
            ("viscous_friction", self.viscous_friction),
        ] {
            if !(x.is_finite() && x > 0.0) {
                v.push(format!("motor.{name} must be positive, got {x}"));
            }
        }
        if !(self.armature_inductance.is_finite() && self.armature_inductance >= 0.0) {
            v.push(format!("motor.armature_inductance must be >= 0, got {}", self.armature_inductance));
        }
        v
    }

    /// Steady-state speed under constant voltage with no Coulomb load.
    pub fn steady_state_speed(&self, voltage: f64) -> f64 {
        self.torque_constant * voltage
            / (self.armature_resistance * self.viscous_friction + self.torque_constant * self.back_emf_constant)
    }
}

/// Wheel speeds (rad/s) and armature currents (A) of both sides.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriveState {
    pub omega_r: f64,
    pub omega_l: f64,
    pub current_r: f64,
    pub current_l: f64,
}

pub fn body_velocity(d: &DriveState, p: &VehicleParams) -> BodyVelocity {
    BodyVelocity {
        u: (d.omega_r + d.omega_l) * p.wheel_radius / 2.0,
        v: 0.0,
        r: (d.omega_r - d.omega_l) * p.wheel_radius / p.track_width,
    }
}

pub fn world_rates(pose: &Pose, d: &DriveState, p: &VehicleParams) -> PoseRate {
    let b = body_velocity(d, p);
    let (s, c) = pose.theta.sin_cos();
    PoseRate { x_dot: b.u * c, y_dot: b.u * s, theta_dot: b.r }
}

/// Normal force on one drive wheel.
pub fn drive_normal_force(p: &VehicleParams) -> f64 {
    p.drive_arm / (2.0 * (p.rear_arm + p.drive_arm)) * p.mass * p.gravity
}

/// Coulomb friction torque at one drive wheel, μ·N_c·R_t.
pub fn friction_torque(p: &VehicleParams) -> f64 {
    p.friction_coeff * drive_normal_force(p) * p.wheel_radius
}

/// Torsional load one motor overcomes while the wheel train accelerates
/// at `alpha` (rad/s²).
pub fn friction_torque_load(p: &VehicleParams, alpha: f64) -> f64 {
    let accel_moment = p.wheel_inertia * alpha * p.wheel_train_factor();
    accel_moment + friction_torque(p)
}

pub fn motor_torque(current: f64, mp: &MotorParams) -> f64 {
    mp.torque_constant * current
}

/// One side's motor and wheel train.
struct SideModel {
    inertia: f64,
    viscous: f64,
    coulomb: f64,
    k_i: f64,
    k_b: f64,
    r_a: f64,
    l_a: f64,
}

impl SideModel {
    fn new(p: &VehicleParams, mp: &MotorParams) -> Self {
        Self {
            inertia: mp.rotor_inertia + p.wheel_inertia * p.wheel_train_factor(),
            viscous: mp.viscous_friction,
            coulomb: friction_torque(p),
            k_i: mp.torque_constant,
            k_b: mp.back_emf_constant,
            r_a: mp.armature_resistance,
            l_a: mp.armature_inductance,
        }
    }

    fn current(&self, omega: f64, current: f64, volts: f64) -> f64 {
        if self.l_a == 0.0 {
            (volts - self.k_b * omega) / self.r_a
        } else {
            current
        }
    }

    /// Net torque at the wheel before Coulomb friction.
    fn drive_torque(&self, omega: f64, current: f64) -> f64 {
        self.k_i * current - self.viscous * omega
    }

    fn deriv(&self, omega: f64, current: f64, volts: f64) -> [f64; 2] {
        let i = self.current(omega, current, volts);
        let drive = self.drive_torque(omega, i);
        let domega = if self.coulomb == 0.0 {
            drive / self.inertia
        } else if omega.abs() > STICTION_DEADBAND {
            (drive - self.coulomb * omega.signum()) / self.inertia
        } else if drive.abs() <= self.coulomb {
            0.0
        } else {
            (drive - self.coulomb * drive.signum()) / self.inertia
        };
        let di = if self.l_a == 0.0 { 0.0 } else { (volts - self.r_a * i - self.k_b * omega) / self.l_a };
        [domega, di]
    }

    fn step(&self, omega: f64, current: f64, volts: f64, dt: f64) -> (f64, f64) {
        let f = |s: [f64; 2]| self.deriv(s[0], s[1], volts);
        let s0 = [omega, current];
        let add = |s: [f64; 2], k: [f64; 2], h: f64| [s[0] + h * k[0], s[1] + h * k[1]];
        let k1 = f(s0);
        let k2 = f(add(s0, k1, 0.5 * dt));
        let k3 = f(add(s0, k2, 0.5 * dt));
        let k4 = f(add(s0, k3, dt));
        let mut w = omega + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        let mut i = current + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);

        if self.coulomb > 0.0 {
            // Coulomb friction stops a wheel; it never reverses one.
            let crosses = |x: f64| omega != 0.0 && x != 0.0 && omega.signum() != x.signum();
            let reversed = crosses(w) || crosses(omega + dt * k1[0]);
            let at_rest = omega.abs() <= STICTION_DEADBAND && w.abs() <= STICTION_DEADBAND;
            if reversed || at_rest {
                let i0 = self.current(0.0, i, volts);
                if self.drive_torque(0.0, i0).abs() <= self.coulomb {
                    w = 0.0;
                }
            }
        }
        if self.l_a == 0.0 {
            i = self.current(w, i, volts);
        }
        (w, i)
    }
}

/// RK4 substeps per call of [`step_drive`].
pub const DRIVE_SUBSTEPS: u32 = 4;

/// Advances both sides' motor and wheel dynamics by `dt` with
/// [`DRIVE_SUBSTEPS`] equal RK4 steps.
pub fn step_drive(
    d: &DriveState,
    volts_r: f64,
    volts_l: f64,
    p: &VehicleParams,
    mp: &MotorParams,
    dt: f64,
) -> Result<DriveState, VehicleError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(VehicleError::BadTimeStep(dt));
    }
    for (name, x) in [
        ("omega_r", d.omega_r),
        ("omega_l", d.omega_l),
        ("current_r", d.current_r),
        ("current_l", d.current_l),
        ("volts_r", volts_r),
        ("volts_l", volts_l),
    ] {
        if !x.is_finite() {
            return Err(VehicleError::NonFinite(name));
        }
    }
    let side = SideModel::new(p, mp);
    let h = dt / f64::from(DRIVE_SUBSTEPS);
    let (mut wr, mut ir, mut wl, mut il) = (d.omega_r, d.current_r, d.omega_l, d.current_l);
    for _ in 0..DRIVE_SUBSTEPS {
        (wr, ir) = side.step(wr, ir, volts_r, h);
        (wl, il) = side.step(wl, il, volts_l, h);
    }
    Ok(DriveState { omega_r: wr, omega_l: wl, current_r: ir, current_l: il })
}

/// Moves the pose along the exact arc traced at constant body velocity.
pub fn advance_pose_with(pose: &Pose, u: f64, r: f64, dt: f64) -> Pose {
    let th = pose.theta;
    if r == 0.0 {
        let (s, c) = th.sin_cos();
        return Pose { x: pose.x + u * c * dt, y: pose.y + u * s * dt, theta: th };
    }
    let th1 = th + r * dt;
    let rho = u / r;
    Pose {
        x: pose.x + rho * (th1.sin() - th.sin()),
        y: pose.y - rho * (th1.cos() - th.cos()),
        theta: normalize_angle(th1),
    }
}

/// Integrates the world-frame rates over `dt`, holding the wheel speeds.
pub fn advance_pose(pose: &Pose, d: &DriveState, p: &VehicleParams, dt: f64) -> Pose {
    let b = body_velocity(d, p);
    advance_pose_with(pose, b.u, b.r, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn params(r: f64, track: f64) -> VehicleParams {
        VehicleParams { wheel_radius: r, track_width: track, ..Default::default() }
    }

    fn drive(r: f64, l: f64) -> DriveState {
        DriveState { omega_r: r, omega_l: l, ..Default::default() }
    }

    #[test]
    fn body_velocity_examples() {
        let b = body_velocity(&drive(10.0, 10.0), &params(0.03, 0.2));
        assert!((b.u - 0.3).abs() < 1e-15 && b.r == 0.0 && b.v == 0.0);
        let b = body_velocity(&drive(10.0, -10.0), &params(0.03, 0.2));
        assert!(b.u == 0.0 && (b.r - 3.0).abs() < 1e-12);
        assert_eq!(body_velocity(&drive(0.0, 0.0), &params(0.03, 0.2)), BodyVelocity::default());
    }

    #[test]
    fn world_rates_examples() {
        // u = 0.3 from ω = 10 on both sides with R = 0.03.
        let p = params(0.03, 0.2);
        let w = world_rates(&Pose::new(0.0, 0.0, 0.0), &drive(10.0, 10.0), &p);
        assert!((w.x_dot - 0.3).abs() < 1e-15 && w.y_dot == 0.0 && w.theta_dot == 0.0);
        let w = world_rates(&Pose::new(0.0, 0.0, FRAC_PI_2), &drive(10.0, 10.0), &p);
        assert!(w.x_dot.abs() < 1e-15 && (w.y_dot - 0.3).abs() < 1e-15);
        // u = 0.3, r = 1 with R = 0.03, T = 0.2: ω_r + ω_l = 20, ω_r − ω_l = 20/3.
        let d = drive(10.0 + 10.0 / 3.0, 10.0 - 10.0 / 3.0);
        let w = world_rates(&Pose::new(0.0, 0.0, FRAC_PI_4), &d, &p);
        assert!((w.x_dot - 0.21213203435596426).abs() < 1e-9);
        assert!((w.y_dot - 0.21213203435596426).abs() < 1e-9);
        assert!((w.theta_dot - 1.0).abs() < 1e-9);
    }

    #[test]
    fn normal_force_examples() {
        let p = VehicleParams { mass: 2.0, drive_arm: 0.05, rear_arm: 0.05, ..Default::default() };
        assert!((drive_normal_force(&p) - 2.0 * 9.81 / 4.0).abs() < 1e-12);
        let p = VehicleParams { mass: 2.0, drive_arm: 0.05, rear_arm: 0.15, gravity: 9.81, ..Default::default() };
        assert!((drive_normal_force(&p) - 2.4525).abs() < 1e-12);
        let p = VehicleParams { mass: 0.0, ..Default::default() };
        assert_eq!(drive_normal_force(&p), 0.0);
    }

    #[test]
    fn load_torque_examples() {
        let p = VehicleParams { friction_coeff: 0.0, ..Default::default() };
        assert_eq!(friction_torque_load(&p, 0.0), 0.0);
        // N_c = 2.4525 N from the nominal set; L_2/R_t = 1.
        let p = VehicleParams {
            wheel_inertia: 1e-5,
            belt_span: 0.03,
            wheel_radius: 0.03,
            friction_coeff: 0.5,
            ..Default::default()
        };
        assert!((friction_torque_load(&p, 10.0) - (3e-4 + 0.5 * 2.4525 * 0.03)).abs() < 1e-15);
        assert!((friction_torque_load(&p, 10.0) - 0.0370875).abs() < 1e-6);
        assert!((friction_torque_load(&p, 10.0) - 0.03709).abs() < 5e-6);
        // μ = 1 and N_c = 1 N: m g k / (2 (L_r + k)) = 1 with k = L_r, m g = 4.
        let p = VehicleParams { friction_coeff: 1.0, mass: 4.0, gravity: 1.0, drive_arm: 0.1, rear_arm: 0.1, ..Default::default() };
        assert!((friction_torque_load(&p, 0.0) - 0.03).abs() < 1e-15);
    }

    #[test]
    fn motor_torque_examples() {
        let mp = MotorParams { torque_constant: 0.05, ..Default::default() };
        assert!((motor_torque(2.0, &mp) - 0.1).abs() < 1e-15);
        assert_eq!(motor_torque(0.0, &mp), 0.0);
        assert!((motor_torque(-2.0, &mp) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn drive_at_rest_stays_at_rest() {
        let d = step_drive(&DriveState::default(), 0.0, 0.0, &VehicleParams::default(), &MotorParams::default(), 1e-3).unwrap();
        assert_eq!(d, DriveState::default());
    }

    #[test]
    fn drive_rejects_bad_inputs() {
        let (p, mp) = (VehicleParams::default(), MotorParams::default());
        assert_eq!(step_drive(&DriveState::default(), 1.0, 1.0, &p, &mp, 0.0), Err(VehicleError::BadTimeStep(0.0)));
        assert_eq!(
            step_drive(&DriveState::default(), f64::NAN, 1.0, &p, &mp, 1e-3),
            Err(VehicleError::NonFinite("volts_r"))
        );
    }

    #[test]
    fn stiction_holds_below_breakaway() {
        let (p, mp) = (VehicleParams::default(), MotorParams::default());
        // Stall torque K_i·E/R_a = 0.025·E against 0.0368 N·m of friction.
        let mut d = DriveState::default();
        for _ in 0..1000 {
            d = step_drive(&d, 1.4, -1.4, &p, &mp, 1e-3).unwrap();
        }
        assert_eq!((d.omega_r, d.omega_l), (0.0, 0.0));
        for _ in 0..1000 {
            d = step_drive(&d, 1.6, -1.6, &p, &mp, 1e-3).unwrap();
        }
        assert!(d.omega_r > 1.0 && d.omega_l < -1.0);
    }

    #[test]
    fn coulomb_friction_stops_without_reversal() {
        let (p, mp) = (VehicleParams::default(), MotorParams::default());
        let mut d = drive(20.0, -20.0);
        for _ in 0..500 {
            d = step_drive(&d, 0.0, 0.0, &p, &mp, 1e-3).unwrap();
            assert!(d.omega_r >= 0.0 && d.omega_l <= 0.0);
        }
        assert_eq!((d.omega_r, d.omega_l), (0.0, 0.0));
    }

    #[test]
    fn inductive_armature_approaches_algebraic_model() {
        let p = VehicleParams { friction_coeff: 0.0, ..Default::default() };
        let mp0 = MotorParams::default();
        let mp1 = MotorParams { armature_inductance: 1e-4, ..Default::default() };
        let (mut a, mut b) = (DriveState::default(), DriveState::default());
        for _ in 0..500 {
            a = step_drive(&a, 3.0, 3.0, &p, &mp0, 1e-4).unwrap();
            b = step_drive(&b, 3.0, 3.0, &p, &mp1, 1e-4).unwrap();
        }
        assert!((a.omega_r - b.omega_r).abs() / a.omega_r < 5e-3);
        assert!((a.current_r - b.current_r).abs() < 5e-3);
    }

    #[test]
    fn advance_pose_examples() {
        let p0 = Pose::new(0.0, 0.0, 0.0);
        let q = advance_pose_with(&p0, 0.3, 0.0, 1.0);
        assert_eq!((q.x, q.y, q.theta), (0.3, 0.0, 0.0));
        let q = advance_pose_with(&p0, 0.0, PI, 1.0);
        assert_eq!((q.x, q.y), (0.0, 0.0));
        assert!((q.theta - PI).abs() < 1e-15);
    }
}
