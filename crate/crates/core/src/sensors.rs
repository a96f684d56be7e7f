//! Sensor models: five infrared proximity sensors with a piecewise-linear
//! distance-to-voltage calibration, one downward white-line sensor and two
//! forward flame sensors with inverse-square intensity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arena::{Arena, ArenaError, MarkerId};
use crate::geom::{normalize_angle, Vec2};
use crate::vehicle::Pose;

#[derive(Debug, Error, PartialEq)]
pub enum SensorError {
    #[error("flame intensity is undefined at zero distance")]
    ZeroDistance,
    #[error(transparent)]
    Arena(#[from] ArenaError),
}

/// Proximity sensor positions: center-front and the four corners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProximityId {
    CF,
    FL,
    FR,
    RL,
    RR,
}

impl ProximityId {
    pub const ALL: [ProximityId; 5] = [ProximityId::CF, ProximityId::FL, ProximityId::FR, ProximityId::RL, ProximityId::RR];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// A sensor's body-frame position and pointing direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorMount {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub bearing: f64,
}

impl SensorMount {
    pub const fn new(x: f64, y: f64, bearing: f64) -> Self {
        Self { x, y, bearing }
    }

    pub fn world_position(&self, pose: &Pose) -> Vec2 {
        Vec2::new(pose.x, pose.y) + Vec2::new(self.x, self.y).rotated(pose.theta)
    }

    pub fn world_bearing(&self, pose: &Pose) -> f64 {
        pose.theta + self.bearing
    }
}

/// Mount points for every sensor on the robot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Mounts {
    pub cf: SensorMount,
    pub fl: SensorMount,
    pub fr: SensorMount,
    pub rl: SensorMount,
    pub rr: SensorMount,
    pub line: SensorMount,
    pub flame_left: SensorMount,
    pub flame_right: SensorMount,
}

impl Default for Mounts {
    fn default() -> Self {
        use std::f64::consts::FRAC_PI_2;
        let ten_deg = 10f64.to_radians();
        Self {
            cf: SensorMount::new(0.10, 0.0, 0.0),
            fl: SensorMount::new(0.08, 0.10, FRAC_PI_2),
            fr: SensorMount::new(0.08, -0.10, -FRAC_PI_2),
            rl: SensorMount::new(-0.08, 0.10, FRAC_PI_2),
            rr: SensorMount::new(-0.08, -0.10, -FRAC_PI_2),
            line: SensorMount::new(0.0, 0.0, 0.0),
            flame_left: SensorMount::new(0.05, 0.0, ten_deg),
            flame_right: SensorMount::new(0.05, 0.0, -ten_deg),
        }
    }
}

impl Mounts {
    pub fn proximity(&self, id: ProximityId) -> &SensorMount {
        match id {
            ProximityId::CF => &self.cf,
            ProximityId::FL => &self.fl,
            ProximityId::FR => &self.fr,
            ProximityId::RL => &self.rl,
            ProximityId::RR => &self.rr,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.cf.bearing != 0.0 {
            v.push(format!("mounts.cf must face forward (bearing 0), got {}", self.cf.bearing));
        }
        let all = [
            ("cf", &self.cf),
            ("fl", &self.fl),
            ("fr", &self.fr),
            ("rl", &self.rl),
            ("rr", &self.rr),
            ("line", &self.line),
            ("flame_left", &self.flame_left),
            ("flame_right", &self.flame_right),
        ];
        for (name, m) in all {
            if !(m.x.is_finite() && m.y.is_finite() && m.bearing.is_finite()) {
                v.push(format!("mounts.{name} has non-finite coordinates"));
            }
        }
        v
    }
}

/// Distance-to-voltage anchor table of an infrared range sensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IrCalibration {
    /// `(distance m, voltage V)` pairs, distance ascending.
    pub table: Vec<(f64, f64)>,
}

impl Default for IrCalibration {
    fn default() -> Self {
        Self {
            table: vec![
                (0.10, 2.25),
                (0.20, 1.30),
                (0.30, 0.92),
                (0.40, 0.72),
                (0.50, 0.60),
                (0.60, 0.52),
                (0.70, 0.46),
                (0.80, 0.42),
            ],
        }
    }
}

impl IrCalibration {
    pub fn valid_range(&self) -> (f64, f64) {
        (self.table[0].0, self.table[self.table.len() - 1].0)
    }

    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.table.len() < 2 {
            v.push("ir_calibration.table needs at least two anchors".to_string());
            return v;
        }
        for w in self.table.windows(2) {
            if !(w[1].0 > w[0].0) {
                v.push(format!("ir_calibration distances must increase strictly ({} then {})", w[0].0, w[1].0));
            }
            if !(w[1].1 < w[0].1) {
                v.push(format!("ir_calibration voltages must decrease strictly ({} then {})", w[0].1, w[1].1));
            }
        }
        if !(self.table[0].0 >= 0.0) {
            v.push("ir_calibration distances must be non-negative".to_string());
        }
        v
    }
}

/// Output voltage for a target at distance `d`, clamped to the end anchors.
pub fn ir_voltage(d: f64, cal: &IrCalibration) -> f64 {
    interpolate(&cal.table, d)
}

/// Distance implied by a voltage reading, the inverse of [`ir_voltage`] on
/// the valid range.
pub fn ir_distance(voltage: f64, cal: &IrCalibration) -> f64 {
    let t = &cal.table;
    if voltage >= t[0].1 {
        return t[0].0;
    }
    for w in t.windows(2) {
        let ((d0, v0), (d1, v1)) = (w[0], w[1]);
        if voltage >= v1 {
            return d0 + (v0 - voltage) / (v0 - v1) * (d1 - d0);
        }
    }
    t[t.len() - 1].0
}

fn interpolate(table: &[(f64, f64)], x: f64) -> f64 {
    let first = table[0];
    let last = table[table.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = table.partition_point(|&(xi, _)| xi <= x);
    let ((x0, y0), (x1, y1)) = (table[k - 1], table[k]);
    y0 + (x - x0) / (x1 - x0) * (y1 - y0)
}

/// Angular sensitivity and inverse-square constant of the flame sensors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlameModel {
    /// `(|dθ| rad, K)` pairs, angle ascending from 0.
    pub k_table: Vec<(f64, f64)>,
    /// Half field of view (rad); K is zero at and beyond it.
    pub fov: f64,
    /// Intensity constant (footcandle·m²).
    pub constant: f64,
    /// Detection threshold (footcandle).
    pub threshold: f64,
}

impl Default for FlameModel {
    fn default() -> Self {
        let fov = 45f64.to_radians();
        Self { k_table: vec![(0.0, 1.0), (fov, 0.0)], fov, constant: 0.0125, threshold: 0.02 }
    }
}

impl FlameModel {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.fov > 0.0 && self.fov.is_finite()) {
            v.push(format!("flame.fov must be positive, got {}", self.fov));
        }
        if !(self.constant > 0.0 && self.constant.is_finite()) {
            v.push(format!("flame.constant must be positive, got {}", self.constant));
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            v.push(format!("flame.threshold must be positive, got {}", self.threshold));
        }
        match self.k_table.first() {
            Some(&(a, k)) if a == 0.0 && k == 1.0 => {}
            _ => v.push("flame.k_table must start at (0, 1)".to_string()),
        }
        for w in self.k_table.windows(2) {
            if !(w[1].0 > w[0].0) {
                v.push("flame.k_table angles must increase strictly".to_string());
            }
        }
        if self.k_table.iter().any(|&(_, k)| !(0.0..=1.0).contains(&k)) {
            v.push("flame.k_table coefficients must lie in [0, 1]".to_string());
        }
        v
    }
}

pub fn intensity_coefficient(dtheta: f64, fm: &FlameModel) -> f64 {
    let a = normalize_angle(dtheta).abs();
    if a >= fm.fov {
        return 0.0;
    }
    interpolate(&fm.k_table, a)
}

pub fn flame_distance(robot: Vec2, candle: Vec2) -> f64 {
    ((candle.x - robot.x).powi(2) + (candle.y - robot.y).powi(2)).sqrt()
}

/// Illuminance (footcandle) seen by a flame sensor. Zero without a lit
/// candle or when a wall blocks the line of sight.
pub fn flame_intensity(pose: &Pose, mount: &SensorMount, arena: &Arena, fm: &FlameModel) -> Result<f64, SensorError> {
    let Some(candle) = arena.lit_candle() else {
        return Ok(0.0);
    };
    let pos = mount.world_position(pose);
    let target = candle.flame_position();
    let r = flame_distance(pos, target);
    if r == 0.0 {
        return Err(SensorError::ZeroDistance);
    }
    let k = intensity_coefficient((target - pos).angle() - mount.world_bearing(pose), fm);
    if k == 0.0 {
        return Ok(0.0);
    }
    let dir = (target - pos) * (1.0 / r);
    if arena.raycast(pos, dir, r)?.is_some() {
        return Ok(0.0);
    }
    Ok(fm.constant / (r * r) * k)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProximityReading {
    pub distance: f64,
    pub voltage: f64,
    pub hit: bool,
}

/// Raycasts every proximity sensor up to the far end of the calibration
/// range. Order follows [`ProximityId::ALL`].
pub fn proximity_scan(
    pose: &Pose,
    mounts: &Mounts,
    arena: &Arena,
    cal: &IrCalibration,
) -> Result<[ProximityReading; 5], SensorError> {
    let max_range = cal.valid_range().1;
    let mut out = [ProximityReading::default(); 5];
    for id in ProximityId::ALL {
        let m = mounts.proximity(id);
        let hit = arena.raycast(m.world_position(pose), Vec2::from_angle(m.world_bearing(pose)), max_range)?;
        let distance = hit.unwrap_or(max_range);
        out[id.index()] = ProximityReading { distance, voltage: ir_voltage(distance, cal), hit: hit.is_some() };
    }
    Ok(out)
}

/// Samples the downward line sensor: `(1, marker)` on white, `(0, None)`
/// on bare floor.
pub fn line_sense(pose: &Pose, mount: &SensorMount, arena: &Arena) -> (u8, Option<MarkerId>) {
    match arena.on_white(mount.world_position(pose)) {
        Some(m) => (1, Some(m)),
        None => (0, None),
    }
}

/// Cumulative wheel rotation (rad) reported by the encoders.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WheelOdometry {
    pub left: f64,
    pub right: f64,
}

/// Everything the controller observes in one tick.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SensorFrame {
    pub t: f64,
    pub proximity: [ProximityReading; 5],
    pub line: u8,
    pub line_marker: Option<MarkerId>,
    pub flame_left: f64,
    pub flame_right: f64,
    pub odometry: WheelOdometry,
}

impl SensorFrame {
    pub fn reading(&self, id: ProximityId) -> &ProximityReading {
        &self.proximity[id.index()]
    }
}
