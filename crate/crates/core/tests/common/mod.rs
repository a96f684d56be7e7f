#![allow(dead_code)]

use ffsim::arena::{Arena, WallSegment};
use ffsim::geom::Vec2;
use ffsim::navigator::{Command, NavState, Navigator};
use ffsim::sensors::{proximity_scan, Mounts, IrCalibration, SensorFrame, WheelOdometry};
use ffsim::vehicle::{advance_pose, step_drive, DriveState, MotorParams, Pose, VehicleParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Point-in-wall test written from the segment description alone: inside
/// the centerline extended by half the thickness at both ends, within half
/// the thickness sideways.
pub fn inside_wall(w: &WallSegment, p: Vec2) -> bool {
    let dx = w.b.x - w.a.x;
    let dy = w.b.y - w.a.y;
    let len = (dx * dx + dy * dy).sqrt();
    let (ux, uy) = (dx / len, dy / len);
    let (px, py) = (p.x - w.a.x, p.y - w.a.y);
    let along = px * ux + py * uy;
    let across = (px * uy - py * ux).abs();
    let h = w.thickness / 2.0;
    along >= -h && along <= len + h && across <= h
}

pub fn inside_any_wall(a: &Arena, p: Vec2) -> bool {
    a.walls().iter().any(|w| inside_wall(w, p))
}

/// First 0.5 mm step along the ray that lands inside a wall.
pub fn march(a: &Arena, origin: Vec2, dir: Vec2, max_range: f64) -> Option<f64> {
    let step = 5e-4;
    let n = (max_range / step).floor() as usize;
    (0..=n).map(|i| i as f64 * step).find(|&t| inside_any_wall(a, Vec2::new(origin.x + t * dir.x, origin.y + t * dir.y)))
}

pub fn random_free_point(a: &Arena, r: &mut ChaCha8Rng) -> Vec2 {
    let b = a.bounds();
    loop {
        let p = Vec2::new(r.gen_range(0.0..b.x), r.gen_range(0.0..b.y));
        if !inside_any_wall(a, p) {
            return p;
        }
    }
}

/// Navigator plus plant without the simulation loop, for closed-loop
/// checks on a bare arena.
pub struct Rig {
    pub arena: Arena,
    pub vehicle: VehicleParams,
    pub motor: MotorParams,
    pub mounts: Mounts,
    pub cal: IrCalibration,
    pub pose: Pose,
    pub drive: DriveState,
    pub odom: WheelOdometry,
    pub dt: f64,
}

impl Rig {
    pub fn new(arena: Arena, pose: Pose) -> Rig {
        Rig {
            arena,
            vehicle: VehicleParams::default(),
            motor: MotorParams::default(),
            mounts: Mounts::default(),
            cal: IrCalibration::default(),
            pose,
            drive: DriveState::default(),
            odom: WheelOdometry::default(),
            dt: 1e-3,
        }
    }

    pub fn frame(&self) -> SensorFrame {
        SensorFrame {
            proximity: proximity_scan(&self.pose, &self.mounts, &self.arena, &self.cal).unwrap(),
            odometry: self.odom,
            ..SensorFrame::default()
        }
    }

    pub fn apply(&mut self, cmd: Command) {
        self.drive = step_drive(&self.drive, cmd.volts_r, cmd.volts_l, &self.vehicle, &self.motor, self.dt).unwrap();
        self.odom.left += self.drive.omega_l * self.dt;
        self.odom.right += self.drive.omega_r * self.dt;
        self.pose = advance_pose(&self.pose, &self.drive, &self.vehicle, self.dt);
    }

    pub fn nav_tick(&mut self, nav: &Navigator, s: &NavState) -> NavState {
        let (next, cmd) = nav.step(s, &self.frame(), self.dt);
        self.apply(cmd);
        next
    }

    /// Coasts with zero voltage until both wheels stop.
    pub fn coast(&mut self) {
        for _ in 0..10_000 {
            if self.drive.omega_l == 0.0 && self.drive.omega_r == 0.0 {
                return;
            }
            self.apply(Command::STOP);
        }
        panic!("wheels never stopped");
    }
}

/// Arena with one far-away wall, so raycasts have something to miss.
pub fn open_arena() -> Arena {
    Arena::from_walls(vec![WallSegment::new(Vec2::new(100.0, 100.0), Vec2::new(101.0, 100.0), 0.013)])
}
