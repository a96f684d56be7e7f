mod common;

use std::f64::consts::PI;

use ffsim::arena::{Arena, WallSegment};
use ffsim::geom::Vec2;
use ffsim::navigator::{wall_follow_command, NavConfig, Side};
use ffsim::vehicle::{advance_pose_with, step_drive, DriveState, MotorParams, Pose, VehicleParams};

use common::Rig;

fn both(w: f64) -> DriveState {
    DriveState { omega_r: w, omega_l: w, ..Default::default() }
}

#[test]
fn steady_state_speed_without_friction() {
    let mp = MotorParams::default();
    let p = VehicleParams { friction_coeff: 0.0, ..VehicleParams::default() };
    for e in [1.0, 3.0, 6.0, -4.0] {
        let w_ss = mp.torque_constant * e
            / (mp.armature_resistance * mp.viscous_friction + mp.torque_constant * mp.back_emf_constant);
        let mut d = DriveState::default();
        for _ in 0..300 {
            d = step_drive(&d, e, e, &p, &mp, 1e-3).unwrap();
        }
        assert!((d.omega_r - w_ss).abs() <= 1e-3 * w_ss.abs(), "{e} V: {} vs {w_ss}", d.omega_r);
        assert_eq!(d.omega_r, d.omega_l);
    }
}

#[test]
fn halving_the_step_changes_little() {
    let mp = MotorParams::default();
    let p = VehicleParams::default();
    let mut worst = 0.0f64;
    for w0 in [0.0, 5.0, 20.0, 45.0, -30.0] {
        for e in [-6.0, -2.0, 0.0, 1.0, 3.0, 6.0] {
            let one = step_drive(&both(w0), e, e, &p, &mp, 1e-3).unwrap();
            let half = step_drive(&both(w0), e, e, &p, &mp, 5e-4).unwrap();
            let two = step_drive(&half, e, e, &p, &mp, 5e-4).unwrap();
            // Skip steps in which friction brings the wheel to rest.
            if one.omega_r == 0.0 || two.omega_r == 0.0 {
                continue;
            }
            let diff = (one.omega_r - two.omega_r).abs();
            worst = worst.max(diff);
            assert!(diff < 1e-9, "w0 {w0}, {e} V: {diff:e}");
        }
    }
    assert!(worst > 0.0);
}

#[test]
fn equal_turn_and_speed_trace_unit_circle() {
    let (u, r) = (0.3, 0.3);
    let mut pose = Pose::new(0.0, 0.0, 0.0);
    // Center of rotation sits one radius to the left of the start.
    let center = Vec2::new(0.0, 1.0);
    for dt in [1e-3, 0.01, 0.37, 2.5] {
        for _ in 0..100 {
            pose = advance_pose_with(&pose, u, r, dt);
            let d = (pose.x - center.x).hypot(pose.y - center.y);
            assert!((d - 1.0).abs() <= 1e-9, "dt {dt}: radius {d}");
        }
    }
}

#[test]
fn odometry_heading_matches_true_heading() {
    let mut rig = Rig::new(common::open_arena(), Pose::new(0.0, 0.0, 0.2));
    let (rt, tr) = (rig.vehicle.wheel_radius, rig.vehicle.track_width);
    let mut unwrapped = 0.0;
    let mut prev = rig.pose.theta;
    let volts = [(3.0, -3.0), (2.0, 1.0), (-1.5, 2.5), (0.0, 0.0), (4.0, 4.0)];
    for (k, &(vr, vl)) in volts.iter().enumerate() {
        for _ in 0..(500 + 100 * k) {
            rig.apply(ffsim::navigator::Command { volts_r: vr, volts_l: vl, fan_on: false });
            unwrapped += ffsim::geom::normalize_angle(rig.pose.theta - prev);
            prev = rig.pose.theta;
        }
    }
    let from_encoders = (rig.odom.right - rig.odom.left) * rt / tr;
    assert!((from_encoders - unwrapped).abs() <= 1e-9, "{from_encoders} vs {unwrapped}");
}

#[test]
fn wall_follow_settles_from_skew() {
    // Long straight wall on the robot's left.
    let wall_y = 0.5;
    let arena = Arena::from_walls(vec![WallSegment::new(Vec2::new(-1.0, wall_y), Vec2::new(4.0, wall_y), 0.013)]);
    let cfg = NavConfig::default();
    let mut rig = Rig::new(arena, Pose::new(0.0, 0.0, 0.0));
    let mounts = rig.mounts.clone();
    let face = wall_y - 0.0065;
    let lateral = |pose: &Pose| face - (pose.y + mounts.fl.y);
    let y0 = face - mounts.fl.y - cfg.wall_setpoint;
    rig.pose = Pose::new(0.0, y0, -10f64.to_radians());
    let start_x = rig.pose.x;
    let mut settled_at = None;
    while rig.pose.x - start_x < 2.0 {
        let cmd = wall_follow_command(&rig.frame(), Side::Left, &rig.cal, &cfg).expect("wall lost");
        rig.apply(cmd);
        let err = (lateral(&rig.pose) - cfg.wall_setpoint).abs();
        if err < 0.01 && rig.pose.theta.abs() < 3f64.to_radians() {
            settled_at.get_or_insert(rig.pose.x - start_x);
        } else if settled_at.is_some() && err >= 0.01 {
            settled_at = None;
        }
        assert!(rig.pose.theta.abs() < PI / 2.0);
    }
    let at = settled_at.expect("never settled");
    assert!(at <= 1.5, "settled after {at} m");
}
