//! Hierarchical navigation controller.
//!
//! Four tasks run in order: travel to the next room of the tour, scan the
//! room for a flame, approach and blow out the flame, and return home. The
//! controller sees only sensor frames and wheel encoder angles. It keeps a
//! dead-reckoned pose in its own frame, with the origin at the start pose,
//! and uses it to time turns, hold headings and retrace its way out of a
//! room.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::arena::MarkerId;
use crate::geom::{normalize_angle, Vec2};
use crate::sensors::{ir_distance, FlameModel, IrCalibration, Mounts, ProximityId, SensorFrame};
use crate::vehicle::{advance_pose_with, Pose, VehicleParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// +1 for left (counterclockwise), −1 for right.
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Reaction to the walls around the robot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WallCase {
    Forward,
    TurnLeft90,
    TurnRight90,
    TurnPreferred,
    TurnAround180,
    WallFollow(Side),
}

/// How the robot reaches a tour stop's doorway.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Approach {
    /// Follow the hallway until an opening appears on this side, then turn in.
    Left,
    Right,
    /// The doorway faces the previous room's doorway; drive straight across.
    Across,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TourStop {
    pub room: u8,
    pub approach: Approach,
    /// Turn taken in the hallway after leaving this room, unless the next
    /// stop is approached across the hallway.
    pub exit_turn: Side,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavConfig {
    pub supply_voltage: f64,
    pub cruise_voltage: f64,
    pub scan_voltage: f64,
    pub homing_voltage: f64,
    pub reverse_voltage: f64,
    pub turn_max_voltage: f64,
    pub turn_min_voltage: f64,
    /// Extra turning voltage per radian still to go.
    pub turn_gain: f64,
    /// Range below which a proximity sensor counts as blocked (m).
    pub blocked_threshold: f64,
    /// Side range beyond which a followed wall counts as lost (m).
    pub wall_lost_range: f64,
    /// Desired side-sensor-to-wall distance while wall following (m).
    pub wall_setpoint: f64,
    pub kp_angle: f64,
    pub kp_dist: f64,
    pub max_steer: f64,
    pub heading_gain: f64,
    pub homing_gain: f64,
    pub doorway_overrun: f64,
    /// Distance from the doorway line to the in-room scan point (m).
    pub scan_depth: f64,
    /// Travel from the first sight of a door opening to the door center (m).
    pub door_align: f64,
    /// Travel past the doorway line when leaving a room (m).
    pub exit_overrun: f64,
    pub home_overrun: f64,
    /// Summed flame reading that counts as close enough to blow (footcandle).
    pub close_intensity: f64,
    /// Relative left/right imbalance under which the flame counts as centered.
    pub center_tolerance: f64,
    pub max_homing_travel: f64,
    pub blow_duration: f64,
    pub tour: Vec<TourStop>,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            supply_voltage: 6.0,
            cruise_voltage: 2.0,
            scan_voltage: 1.7,
            homing_voltage: 1.9,
            reverse_voltage: 1.8,
            turn_max_voltage: 1.9,
            turn_min_voltage: 1.6,
            turn_gain: 1.0,
            blocked_threshold: 0.25,
            wall_lost_range: 0.30,
            wall_setpoint: 0.13,
            kp_angle: 4.0,
            kp_dist: 2.4,
            max_steer: 0.4,
            heading_gain: 0.5,
            homing_gain: 0.3,
            doorway_overrun: 0.10,
            scan_depth: 0.49,
            door_align: 0.31,
            exit_overrun: 0.2365,
            home_overrun: 0.05,
            close_intensity: 0.3,
            center_tolerance: 0.05,
            max_homing_travel: 1.0,
            blow_duration: 4.0,
            tour: vec![
                TourStop { room: 1, approach: Approach::Right, exit_turn: Side::Right },
                TourStop { room: 2, approach: Approach::Across, exit_turn: Side::Left },
                TourStop { room: 3, approach: Approach::Left, exit_turn: Side::Right },
                TourStop { room: 4, approach: Approach::Across, exit_turn: Side::Left },
            ],
        }
    }
}

impl NavConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let positive = [
            ("supply_voltage", self.supply_voltage),
            ("cruise_voltage", self.cruise_voltage),
            ("scan_voltage", self.scan_voltage),
            ("homing_voltage", self.homing_voltage),
            ("reverse_voltage", self.reverse_voltage),
            ("turn_max_voltage", self.turn_max_voltage),
            ("turn_min_voltage", self.turn_min_voltage),
            ("blocked_threshold", self.blocked_threshold),
            ("wall_lost_range", self.wall_lost_range),
            ("wall_setpoint", self.wall_setpoint),
            ("doorway_overrun", self.doorway_overrun),
            ("scan_depth", self.scan_depth),
            ("door_align", self.door_align),
            ("exit_overrun", self.exit_overrun),
            ("home_overrun", self.home_overrun),
            ("close_intensity", self.close_intensity),
            ("max_homing_travel", self.max_homing_travel),
            ("blow_duration", self.blow_duration),
        ];
        for (name, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                v.push(format!("navigator.{name} must be positive, got {x}"));
            }
        }
        for (name, x) in [
            ("cruise_voltage", self.cruise_voltage),
            ("scan_voltage", self.scan_voltage),
            ("homing_voltage", self.homing_voltage),
            ("reverse_voltage", self.reverse_voltage),
            ("turn_max_voltage", self.turn_max_voltage),
        ] {
            if x > self.supply_voltage {
                v.push(format!("navigator.{name} {x} exceeds the supply voltage {}", self.supply_voltage));
            }
        }
        if self.turn_min_voltage > self.turn_max_voltage {
            v.push("navigator.turn_min_voltage exceeds turn_max_voltage".to_string());
        }
        if self.tour.is_empty() {
            v.push("navigator.tour is empty".to_string());
        }
        for (i, s) in self.tour.iter().enumerate() {
            if !(1..=4).contains(&s.room) {
                v.push(format!("navigator.tour[{i}] names room {}, valid rooms are 1..=4", s.room));
            }
            if i == 0 && s.approach == Approach::Across {
                v.push("navigator.tour[0] cannot be approached across the hallway".to_string());
            }
        }
        v
    }
}

/// Motor voltages and fan switch for one tick.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub volts_r: f64,
    pub volts_l: f64,
    pub fan_on: bool,
}

impl Command {
    pub const STOP: Command = Command { volts_r: 0.0, volts_l: 0.0, fan_on: false };

    fn drive(base: f64, steer: f64) -> Command {
        Command { volts_r: base + steer, volts_l: base - steer, fan_on: false }
    }

    fn clamped(self, supply: f64) -> Command {
        Command {
            volts_r: self.volts_r.clamp(-supply, supply),
            volts_l: self.volts_l.clamp(-supply, supply),
            fan_on: self.fan_on,
        }
    }
}

/// Progress of an in-place turn measured by wheel odometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TurnProgress {
    pub target: f64,
    pub accumulated: f64,
}

impl TurnProgress {
    pub fn new(target: f64) -> Self {
        Self { target, accumulated: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum AfterTurn {
    Cruise,
    Approach,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ToRoomSub {
    Cruise { heading_ref: f64, seen_wall: bool },
    Align { travel: f64, heading_ref: f64 },
    Turning { turn: TurnProgress, then: AfterTurn },
    Approach { heading_ref: f64 },
    Overrun { travel: f64, heading_ref: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum InRoomSub {
    Entering { travel: f64, heading_ref: f64 },
    Scanning { accumulated: f64, best_bearing: f64, best_intensity: f64 },
    FaceDoor { turn: TurnProgress },
    Exiting { heading_ref: f64, crossed: bool, travel: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DestroyFlameSub {
    Orient { turn: TurnProgress },
    Homing { travel: f64 },
    Blowing { ticks: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ReturnHomeSub {
    Backout,
    FaceDoor { turn: TurnProgress },
    Exiting { heading_ref: f64, crossed: bool, travel: f64 },
    TurnHome { turn: TurnProgress },
    Follow { heading_ref: f64 },
    Overrun { travel: f64, heading_ref: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Task {
    ToRoom(ToRoomSub),
    InRoom(InRoomSub),
    DestroyFlame(DestroyFlameSub),
    ReturnHome(ReturnHomeSub),
    Done,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TaskKind {
    ToRoom,
    InRoom,
    DestroyFlame,
    ReturnHome,
    Done,
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TaskKind::ToRoom => "ToRoom",
            TaskKind::InRoom => "InRoom",
            TaskKind::DestroyFlame => "DestroyFlame",
            TaskKind::ReturnHome => "ReturnHome",
            TaskKind::Done => "Done",
        })
    }
}

impl Task {
    pub fn kind(&self) -> TaskKind {
        match self {
            Task::ToRoom(_) => TaskKind::ToRoom,
            Task::InRoom(_) => TaskKind::InRoom,
            Task::DestroyFlame(_) => TaskKind::DestroyFlame,
            Task::ReturnHome(_) => TaskKind::ReturnHome,
            Task::Done => TaskKind::Done,
        }
    }
}

/// Where the robot crossed into the current room and where it scanned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RoomVisit {
    pub door_point: Vec2,
    pub entry_heading: f64,
    pub scan_point: Vec2,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NavState {
    pub task: Task,
    /// Rising edges of the line sensor seen so far.
    pub line_count: u32,
    /// Room the robot is in according to the tour; 0 in the hallway.
    pub current_room: u8,
    pub tour_index: usize,
    /// Encoder angles at the previous tick.
    pub odom: (f64, f64),
    /// Dead-reckoned pose relative to the start pose.
    pub estimate: Pose,
    pub visit: RoomVisit,
    last_line: u8,
    primed: bool,
}

impl NavState {
    pub fn new() -> Self {
        Self {
            task: Task::ToRoom(ToRoomSub::Cruise { heading_ref: 0.0, seen_wall: false }),
            line_count: 0,
            current_room: 0,
            tour_index: 0,
            odom: (0.0, 0.0),
            estimate: Pose::default(),
            visit: RoomVisit::default(),
            last_line: 0,
            primed: false,
        }
    }

    pub fn with_task(task: Task) -> Self {
        Self { task, ..Self::new() }
    }
}

impl Default for NavState {
    fn default() -> Self {
        Self::new()
    }
}

/// Picks the wall case from front, left and right ranges. A side is
/// blocked when either of its corner sensors is within `threshold`.
pub fn classify_wall_case(frame: &SensorFrame, threshold: f64, preferred: Side) -> WallCase {
    let r = |id| raw_range(frame, id);
    let front = r(ProximityId::CF) < threshold;
    let left = r(ProximityId::FL).min(r(ProximityId::RL)) < threshold;
    let right = r(ProximityId::FR).min(r(ProximityId::RR)) < threshold;
    classify_blocked(front, left, right, preferred)
}

/// The six-row decision table over blocked flags.
pub fn classify_blocked(front: bool, left: bool, right: bool, preferred: Side) -> WallCase {
    match (front, left, right) {
        (false, false, false) => WallCase::Forward,
        (true, false, true) => WallCase::TurnLeft90,
        (true, true, false) => WallCase::TurnRight90,
        (true, false, false) => WallCase::TurnPreferred,
        (true, true, true) => WallCase::TurnAround180,
        (false, true, false) => WallCase::WallFollow(Side::Left),
        (false, false, true) => WallCase::WallFollow(Side::Right),
        (false, true, true) => WallCase::WallFollow(preferred),
    }
}

fn raw_range(frame: &SensorFrame, id: ProximityId) -> f64 {
    let r = frame.reading(id);
    if r.hit {
        r.distance
    } else {
        f64::INFINITY
    }
}

/// Heading change implied by encoder increments (rad).
pub fn odometry_heading_change(d_left: f64, d_right: f64, wheel_radius: f64, track_width: f64) -> f64 {
    (d_right - d_left) * wheel_radius / track_width
}

/// Commands an in-place turn toward `target` radians given the heading
/// change `accumulated` so far. Done once the accumulated angle reaches
/// the target.
pub fn turn_in_place(accumulated: f64, target: f64, cfg: &NavConfig) -> (Command, bool) {
    if target == 0.0 || accumulated * target.signum() >= target.abs() {
        return (Command::STOP, true);
    }
    let remaining = target.abs() - accumulated * target.signum();
    let volts = (cfg.turn_min_voltage + cfg.turn_gain * remaining).min(cfg.turn_max_voltage);
    let s = target.signum();
    (Command { volts_r: s * volts, volts_l: -s * volts, fan_on: false }, false)
}

/// Proportional wall following from two same-side sensors. `None` when
/// either sensor has lost the wall.
pub fn wall_follow_command(frame: &SensorFrame, side: Side, cal: &IrCalibration, cfg: &NavConfig) -> Option<Command> {
    let (front_id, rear_id) = match side {
        Side::Left => (ProximityId::FL, ProximityId::RL),
        Side::Right => (ProximityId::FR, ProximityId::RR),
    };
    let front = sensed_range(frame, front_id, cal)?;
    let rear = sensed_range(frame, rear_id, cal)?;
    if front > cfg.wall_lost_range || rear > cfg.wall_lost_range {
        return None;
    }
    let angle_err = front - rear;
    let dist_err = 0.5 * (front + rear) - cfg.wall_setpoint;
    let steer = (cfg.kp_angle * angle_err + cfg.kp_dist * dist_err).clamp(-cfg.max_steer, cfg.max_steer);
    Some(Command::drive(cfg.cruise_voltage, side.sign() * steer))
}

/// Range recovered from a sensor's voltage through the calibration.
fn sensed_range(frame: &SensorFrame, id: ProximityId, cal: &IrCalibration) -> Option<f64> {
    let r = frame.reading(id);
    r.hit.then(|| ir_distance(r.voltage, cal))
}

fn snap_heading(theta: f64) -> f64 {
    normalize_angle((theta / FRAC_PI_2).round() * FRAC_PI_2)
}

/// The controller's fixed parameters.
#[derive(Clone, Debug)]
pub struct Navigator {
    pub cfg: NavConfig,
    pub cal: IrCalibration,
    wheel_radius: f64,
    track_width: f64,
    flame_threshold: f64,
    flame_bearings: (f64, f64),
}

/// Per-tick quantities derived from the frame before dispatch.
struct Tick {
    travel: f64,
    dtheta: f64,
    rising: Option<MarkerId>,
}

impl Navigator {
    pub fn new(cfg: NavConfig, vehicle: &VehicleParams, mounts: &Mounts, flame: &FlameModel, cal: IrCalibration) -> Self {
        Self {
            cfg,
            cal,
            wheel_radius: vehicle.wheel_radius,
            track_width: vehicle.track_width,
            flame_threshold: flame.threshold,
            flame_bearings: (mounts.flame_left.bearing, mounts.flame_right.bearing),
        }
    }

    /// Advances the controller by one tick. Pure: the same inputs always
    /// give the same outputs.
    pub fn step(&self, nav: &NavState, frame: &SensorFrame, dt: f64) -> (NavState, Command) {
        let mut s = nav.clone();
        let enc = (frame.odometry.left, frame.odometry.right);
        let (dl, dr) = if s.primed { (enc.0 - s.odom.0, enc.1 - s.odom.1) } else { (0.0, 0.0) };
        s.primed = true;
        s.odom = enc;
        let travel = (dl + dr) * self.wheel_radius / 2.0;
        let dtheta = odometry_heading_change(dl, dr, self.wheel_radius, self.track_width);
        s.estimate = advance_pose_with(&s.estimate, travel, dtheta, 1.0);

        let rising = (frame.line == 1 && s.last_line == 0).then_some(frame.line_marker).flatten();
        if frame.line == 1 && s.last_line == 0 {
            s.line_count += 1;
        }
        s.last_line = frame.line;

        let tick = Tick { travel, dtheta, rising };
        let cmd = match s.task {
            Task::ToRoom(sub) => self.to_room(&mut s, sub, frame, &tick),
            Task::InRoom(sub) => self.in_room(&mut s, sub, frame, &tick),
            Task::DestroyFlame(sub) => self.destroy_flame(&mut s, sub, frame, &tick, dt),
            Task::ReturnHome(sub) => self.return_home(&mut s, sub, frame, &tick),
            Task::Done => Command::STOP,
        };
        (s, cmd.clamped(self.cfg.supply_voltage))
    }

    fn heading_hold(&self, est: &Pose, heading_ref: f64, base: f64) -> Command {
        let err = normalize_angle(heading_ref - est.theta);
        Command::drive(base, (self.cfg.heading_gain * err).clamp(-self.cfg.max_steer, self.cfg.max_steer))
    }

    /// Wall following on `prefer`, then the other side, then heading hold.
    fn corridor(&self, s: &NavState, frame: &SensorFrame, prefer: Side, heading_ref: f64) -> Command {
        wall_follow_command(frame, prefer, &self.cal, &self.cfg)
            .or_else(|| wall_follow_command(frame, prefer.opposite(), &self.cal, &self.cfg))
            .unwrap_or_else(|| self.heading_hold(&s.estimate, heading_ref, self.cfg.cruise_voltage))
    }

    /// Turn demanded by a blocked front, if any.
    fn blocked_turn(&self, frame: &SensorFrame, preferred: Side) -> Option<f64> {
        match classify_wall_case(frame, self.cfg.blocked_threshold, preferred) {
            WallCase::TurnLeft90 => Some(FRAC_PI_2),
            WallCase::TurnRight90 => Some(-FRAC_PI_2),
            WallCase::TurnPreferred => Some(preferred.sign() * FRAC_PI_2),
            WallCase::TurnAround180 => Some(PI),
            WallCase::Forward | WallCase::WallFollow(_) => None,
        }
    }

    fn advance_turn(&self, turn: &mut TurnProgress, tick: &Tick) -> (Command, bool) {
        turn.accumulated += tick.dtheta;
        turn_in_place(turn.accumulated, turn.target, &self.cfg)
    }

    fn current_stop(&self, s: &NavState) -> Option<TourStop> {
        self.cfg.tour.get(s.tour_index).copied()
    }

    fn to_room(&self, s: &mut NavState, sub: ToRoomSub, frame: &SensorFrame, tick: &Tick) -> Command {
        let stop = self.current_stop(s);
        let door_side = stop.and_then(|st| match st.approach {
            Approach::Left => Some(Side::Left),
            Approach::Right => Some(Side::Right),
            Approach::Across => None,
        });
        match sub {
            ToRoomSub::Cruise { heading_ref, mut seen_wall } => {
                let preferred = door_side.unwrap_or(Side::Left);
                if let Some(target) = self.blocked_turn(frame, preferred) {
                    s.task = Task::ToRoom(ToRoomSub::Turning { turn: TurnProgress::new(target), then: AfterTurn::Cruise });
                    return Command::STOP;
                }
                if let Some(side) = door_side {
                    let id = if side == Side::Left { ProximityId::FL } else { ProximityId::FR };
                    let range = sensed_range(frame, id, &self.cal).unwrap_or(f64::INFINITY);
                    if range < self.cfg.blocked_threshold {
                        seen_wall = true;
                    } else if seen_wall {
                        s.task = Task::ToRoom(ToRoomSub::Align { travel: 0.0, heading_ref });
                        return self.heading_hold(&s.estimate, heading_ref, self.cfg.cruise_voltage);
                    }
                }
                s.task = Task::ToRoom(ToRoomSub::Cruise { heading_ref, seen_wall });
                self.corridor(s, frame, preferred.opposite(), heading_ref)
            }
            ToRoomSub::Align { travel, heading_ref } => {
                let travel = travel + tick.travel;
                if travel >= self.cfg.door_align {
                    let side = door_side.unwrap_or(Side::Left);
                    let turn = TurnProgress::new(side.sign() * FRAC_PI_2);
                    s.task = Task::ToRoom(ToRoomSub::Turning { turn, then: AfterTurn::Approach });
                    return Command::STOP;
                }
                s.task = Task::ToRoom(ToRoomSub::Align { travel, heading_ref });
                self.heading_hold(&s.estimate, heading_ref, self.cfg.cruise_voltage)
            }
            ToRoomSub::Turning { mut turn, then } => {
                let (cmd, done) = self.advance_turn(&mut turn, tick);
                s.task = if done {
                    let heading_ref = snap_heading(s.estimate.theta);
                    Task::ToRoom(match then {
                        AfterTurn::Cruise => ToRoomSub::Cruise { heading_ref, seen_wall: false },
                        AfterTurn::Approach => ToRoomSub::Approach { heading_ref },
                    })
                } else {
                    Task::ToRoom(ToRoomSub::Turning { turn, then })
                };
                cmd
            }
            ToRoomSub::Approach { heading_ref } => {
                if let Some(MarkerId::Doorway(_)) = tick.rising {
                    s.visit = RoomVisit {
                        door_point: Vec2::new(s.estimate.x, s.estimate.y),
                        entry_heading: heading_ref,
                        scan_point: Vec2::ZERO,
                    };
                    s.current_room = stop.map_or(0, |st| st.room);
                    s.task = Task::ToRoom(ToRoomSub::Overrun { travel: 0.0, heading_ref });
                } else if raw_range(frame, ProximityId::CF) < self.cfg.blocked_threshold {
                    s.task = Task::ToRoom(ToRoomSub::Cruise { heading_ref, seen_wall: false });
                    return Command::STOP;
                }
                self.heading_hold(&s.estimate, heading_ref, self.cfg.cruise_voltage)
            }
            ToRoomSub::Overrun { travel, heading_ref } => {
                let travel = travel + tick.travel;
                s.task = if travel >= self.cfg.doorway_overrun {
                    Task::InRoom(InRoomSub::Entering { travel, heading_ref })
                } else {
                    Task::ToRoom(ToRoomSub::Overrun { travel, heading_ref })
                };
                self.heading_hold(&s.estimate, heading_ref, self.cfg.cruise_voltage)
            }
        }
    }

    fn start_scan(&self, s: &NavState) -> InRoomSub {
        InRoomSub::Scanning { accumulated: 0.0, best_bearing: s.estimate.theta, best_intensity: 0.0 }
    }

    fn in_room(&self, s: &mut NavState, sub: InRoomSub, frame: &SensorFrame, tick: &Tick) -> Command {
        match sub {
            InRoomSub::Entering { travel, heading_ref } => {
                let travel = travel + tick.travel;
                let flame_close = frame.flame_left + frame.flame_right >= self.cfg.close_intensity;
                if travel >= self.cfg.scan_depth || flame_close || raw_range(frame, ProximityId::CF) < self.cfg.blocked_threshold {
                    s.visit.scan_point = Vec2::new(s.estimate.x, s.estimate.y);
                    s.task = Task::InRoom(self.start_scan(s));
                    return Command::STOP;
                }
                s.task = Task::InRoom(InRoomSub::Entering { travel, heading_ref });
                self.heading_hold(&s.estimate, heading_ref, self.cfg.cruise_voltage)
            }
            InRoomSub::Scanning { accumulated, mut best_bearing, mut best_intensity } => {
                let accumulated = accumulated + tick.dtheta;
                let (il, ir) = (frame.flame_left, frame.flame_right);
                for (i, b) in [(il, self.flame_bearings.0), (ir, self.flame_bearings.1)] {
                    if i > best_intensity {
                        best_intensity = i;
                        best_bearing = normalize_angle(s.estimate.theta + b);
                    }
                }
                let threshold = self.flame_threshold;
                let centered = il >= threshold && ir >= threshold && (il - ir).abs() <= self.cfg.center_tolerance * (il + ir);
                if centered {
                    s.task = Task::DestroyFlame(DestroyFlameSub::Orient { turn: TurnProgress::new(0.0) });
                    return Command::STOP;
                }
                if accumulated >= 2.0 * PI {
                    s.task = if best_intensity >= threshold {
                        let target = normalize_angle(best_bearing - s.estimate.theta);
                        Task::DestroyFlame(DestroyFlameSub::Orient { turn: TurnProgress::new(target) })
                    } else {
                        let target = normalize_angle(s.visit.entry_heading + PI - s.estimate.theta);
                        Task::InRoom(InRoomSub::FaceDoor { turn: TurnProgress::new(target) })
                    };
                    return Command::STOP;
                }
                s.task = Task::InRoom(InRoomSub::Scanning { accumulated, best_bearing, best_intensity });
                let v = self.cfg.scan_voltage;
                Command { volts_r: v, volts_l: -v, fan_on: false }
            }
            InRoomSub::FaceDoor { mut turn } => {
                let (cmd, done) = self.advance_turn(&mut turn, tick);
                s.task = Task::InRoom(if done {
                    InRoomSub::Exiting { heading_ref: snap_heading(s.estimate.theta), crossed: false, travel: 0.0 }
                } else {
                    InRoomSub::FaceDoor { turn }
                });
                cmd
            }
            InRoomSub::Exiting { heading_ref, crossed, travel } => {
                let (crossed, travel) = self.exit_progress(s, crossed, travel, tick);
                if crossed {
                    let next = self.cfg.tour.get(s.tour_index + 1).copied();
                    if next.is_some_and(|n| n.approach == Approach::Across) {
                        s.tour_index += 1;
                        s.task = Task::ToRoom(ToRoomSub::Approach { heading_ref });
                        return self.heading_hold(&s.estimate, heading_ref, self.cfg.cruise_voltage);
                    }
                    if travel >= self.cfg.exit_overrun {
                        let exit_turn = self.current_stop(s).map_or(Side::Left, |st| st.exit_turn);
                        s.tour_index += 1;
                        let turn = TurnProgress::new(exit_turn.sign() * FRAC_PI_2);
                        s.task = Task::ToRoom(ToRoomSub::Turning { turn, then: AfterTurn::Cruise });
                        return Command::STOP;
                    }
                }
                s.task = Task::InRoom(InRoomSub::Exiting { heading_ref, crossed, travel });
                self.exit_steer(s, crossed, heading_ref)
            }
        }
    }

    /// Tracks the doorway crossing on the way out of a room.
    fn exit_progress(&self, s: &mut NavState, crossed: bool, travel: f64, tick: &Tick) -> (bool, f64) {
        if crossed {
            return (true, travel + tick.travel);
        }
        if let Some(MarkerId::Doorway(_)) = tick.rising {
            s.current_room = 0;
            return (true, 0.0);
        }
        (false, 0.0)
    }

    /// Heads for the recorded doorway point until the line is crossed.
    fn exit_steer(&self, s: &NavState, crossed: bool, heading_ref: f64) -> Command {
        let here = Vec2::new(s.estimate.x, s.estimate.y);
        let to_door = s.visit.door_point - here;
        let heading = if !crossed && to_door.norm() > 0.05 && to_door.dot(Vec2::from_angle(heading_ref)) > 0.0 {
            to_door.angle()
        } else {
            heading_ref
        };
        self.heading_hold(&s.estimate, heading, self.cfg.cruise_voltage)
    }

    fn destroy_flame(&self, s: &mut NavState, sub: DestroyFlameSub, frame: &SensorFrame, tick: &Tick, dt: f64) -> Command {
        match sub {
            DestroyFlameSub::Orient { mut turn } => {
                let (cmd, done) = self.advance_turn(&mut turn, tick);
                s.task = Task::DestroyFlame(if done { DestroyFlameSub::Homing { travel: 0.0 } } else { DestroyFlameSub::Orient { turn } });
                cmd
            }
            DestroyFlameSub::Homing { travel } => {
                let travel = travel + tick.travel;
                let (il, ir) = (frame.flame_left, frame.flame_right);
                let sum = il + ir;
                let on_circle = frame.line == 1 && frame.line_marker == Some(MarkerId::Candle);
                let near_wall = raw_range(frame, ProximityId::CF) <= self.cfg.blocked_threshold
                    && il.max(ir) >= 4.0 * self.flame_threshold;
                if sum >= self.cfg.close_intensity || on_circle || near_wall || travel >= self.cfg.max_homing_travel {
                    s.task = Task::DestroyFlame(DestroyFlameSub::Blowing { ticks: 0 });
                    return Command::STOP;
                }
                s.task = Task::DestroyFlame(DestroyFlameSub::Homing { travel });
                if sum == 0.0 {
                    let v = self.cfg.scan_voltage;
                    return Command { volts_r: v, volts_l: -v, fan_on: false };
                }
                let steer = self.cfg.homing_gain * (il - ir) / sum;
                Command::drive(self.cfg.homing_voltage, steer)
            }
            DestroyFlameSub::Blowing { ticks } => {
                let ticks = ticks + 1;
                let needed = (self.cfg.blow_duration / dt).round() as u32;
                s.task = if ticks >= needed {
                    Task::ReturnHome(ReturnHomeSub::Backout)
                } else {
                    Task::DestroyFlame(DestroyFlameSub::Blowing { ticks })
                };
                Command { fan_on: true, ..Command::STOP }
            }
        }
    }

    fn return_home(&self, s: &mut NavState, sub: ReturnHomeSub, frame: &SensorFrame, tick: &Tick) -> Command {
        match sub {
            ReturnHomeSub::Backout => {
                let here = Vec2::new(s.estimate.x, s.estimate.y);
                let away = here - s.visit.scan_point;
                let facing = Vec2::from_angle(s.estimate.theta);
                if away.norm() < 0.01 || away.dot(facing) <= 0.0 {
                    let target = normalize_angle(s.visit.entry_heading + PI - s.estimate.theta);
                    s.task = Task::ReturnHome(ReturnHomeSub::FaceDoor { turn: TurnProgress::new(target) });
                    return Command::STOP;
                }
                let cmd = self.heading_hold(&s.estimate, away.angle(), -self.cfg.reverse_voltage);
                Command { volts_r: cmd.volts_r, volts_l: cmd.volts_l, fan_on: false }
            }
            ReturnHomeSub::FaceDoor { mut turn } => {
                let (cmd, done) = self.advance_turn(&mut turn, tick);
                s.task = Task::ReturnHome(if done {
                    ReturnHomeSub::Exiting { heading_ref: snap_heading(s.estimate.theta), crossed: false, travel: 0.0 }
                } else {
                    ReturnHomeSub::FaceDoor { turn }
                });
                cmd
            }
            ReturnHomeSub::Exiting { heading_ref, crossed, travel } => {
                let (crossed, travel) = self.exit_progress(s, crossed, travel, tick);
                if crossed && travel >= self.cfg.exit_overrun {
                    let here = Vec2::new(s.estimate.x, s.estimate.y);
                    let to_home = -here;
                    let left = Vec2::from_angle(s.estimate.theta + FRAC_PI_2).dot(to_home);
                    let right = Vec2::from_angle(s.estimate.theta - FRAC_PI_2).dot(to_home);
                    let target = if left >= right { FRAC_PI_2 } else { -FRAC_PI_2 };
                    s.task = Task::ReturnHome(ReturnHomeSub::TurnHome { turn: TurnProgress::new(target) });
                    return Command::STOP;
                }
                s.task = Task::ReturnHome(ReturnHomeSub::Exiting { heading_ref, crossed, travel });
                self.exit_steer(s, crossed, heading_ref)
            }
            ReturnHomeSub::TurnHome { mut turn } => {
                let (cmd, done) = self.advance_turn(&mut turn, tick);
                s.task = Task::ReturnHome(if done {
                    ReturnHomeSub::Follow { heading_ref: snap_heading(s.estimate.theta) }
                } else {
                    ReturnHomeSub::TurnHome { turn }
                });
                cmd
            }
            ReturnHomeSub::Follow { heading_ref } => {
                if tick.rising == Some(MarkerId::Home) {
                    s.task = Task::ReturnHome(ReturnHomeSub::Overrun { travel: 0.0, heading_ref });
                    return self.heading_hold(&s.estimate, heading_ref, self.cfg.cruise_voltage);
                }
                if let Some(target) = self.blocked_turn(frame, Side::Left) {
                    s.task = Task::ReturnHome(ReturnHomeSub::TurnHome { turn: TurnProgress::new(target) });
                    return Command::STOP;
                }
                self.corridor(s, frame, Side::Left, heading_ref)
            }
            ReturnHomeSub::Overrun { travel, heading_ref } => {
                let travel = travel + tick.travel;
                if travel >= self.cfg.home_overrun {
                    s.task = Task::Done;
                    return Command::STOP;
                }
                s.task = Task::ReturnHome(ReturnHomeSub::Overrun { travel, heading_ref });
                self.heading_hold(&s.estimate, heading_ref, self.cfg.cruise_voltage)
            }
        }
    }
}
