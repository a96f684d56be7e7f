//! Fixed-step simulation loop.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::arena::{Arena, ArenaError};
use crate::config::SimConfig;
use crate::navigator::{Command, NavState, Navigator, TaskKind};
use crate::sensors::{
    flame_intensity, ir_voltage, line_sense, proximity_scan, SensorError, SensorFrame, WheelOdometry,
};
use crate::vehicle::{advance_pose, body_velocity, step_drive, DriveState, Pose, VehicleError};

/// Flame reading reported when a sensor sits exactly on the flame.
pub const SATURATED_INTENSITY: f64 = 1.0e3;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Vehicle(#[from] VehicleError),
    #[error("simulation already finished")]
    Finished,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Success,
    CollisionFail,
    TimeoutFind,
    TimeoutReturn,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Success => "Success",
            Outcome::CollisionFail => "CollisionFail",
            Outcome::TimeoutFind => "TimeoutFind",
            Outcome::TimeoutReturn => "TimeoutReturn",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub pose: Pose,
    pub u: f64,
    pub r: f64,
    pub omega_l: f64,
    pub omega_r: f64,
    pub task: TaskKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    pub kind: String,
    pub payload: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub outcome: Outcome,
    /// Time the flame went out, if it did.
    pub time_to_flame: Option<f64>,
    pub total_time: f64,
    pub trajectory: Vec<TrajectorySample>,
    pub events: Vec<Event>,
}

impl SimResult {
    /// Time from extinguishing to the end of the run.
    pub fn return_time(&self) -> Option<f64> {
        self.time_to_flame.map(|t| self.total_time - t)
    }

    pub fn collisions(&self) -> usize {
        self.events.iter().filter(|e| e.kind == "collision").count()
    }
}

/// Puts out the arena's candle at time `t`, returning the new arena and
/// the event to log.
pub fn mark_extinguished(arena: &Arena, t: f64) -> Result<(Arena, Event), ArenaError> {
    let out = arena.extinguished()?;
    let c = out.candle().map(|c| c.flame_position()).unwrap_or_default();
    let ev = Event { t, kind: "extinguished".into(), payload: json!({ "x": c.x, "y": c.y }) };
    Ok((out, ev))
}

/// One simulation in progress.
pub struct Simulation {
    cfg: SimConfig,
    arena: Arena,
    navigator: Navigator,
    nav: NavState,
    drive: DriveState,
    pose: Pose,
    odometry: WheelOdometry,
    last_cmd: Command,
    tick: u64,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    extinguished_at: Option<f64>,
    outcome: Option<Outcome>,
    trajectory: Vec<TrajectorySample>,
    events: Vec<Event>,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Simulation, SimError> {
        let v = cfg.validate();
        if !v.is_empty() {
            return Err(SimError::Config(v));
        }
        let arena = cfg.build_arena()?.place_candle(cfg.sim.room, cfg.sim.seed)?;
        let pose = cfg.start_pose(&arena);
        let navigator = Navigator::new(
            cfg.navigator.clone(),
            &cfg.vehicle,
            &cfg.mounts,
            &cfg.flame,
            cfg.ir_calibration.clone(),
        );
        let noise = (cfg.sim.proximity_noise_sigma > 0.0)
            .then(|| Normal::new(0.0, cfg.sim.proximity_noise_sigma).expect("sigma validated"));
        let rng = ChaCha8Rng::seed_from_u64(cfg.sim.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
        let candle = arena.candle().map(|c| c.flame_position()).unwrap_or_default();
        let events = vec![Event {
            t: 0.0,
            kind: "start".into(),
            payload: json!({
                "room": cfg.sim.room,
                "seed": cfg.sim.seed,
                "candle_x": candle.x,
                "candle_y": candle.y,
                "x": pose.x,
                "y": pose.y,
                "theta": pose.theta,
            }),
        }];
        Ok(Simulation {
            cfg,
            arena,
            navigator,
            nav: NavState::new(),
            drive: DriveState::default(),
            pose,
            odometry: WheelOdometry::default(),
            last_cmd: Command::STOP,
            tick: 0,
            rng,
            noise,
            extinguished_at: None,
            outcome: None,
            trajectory: Vec::new(),
            events,
        })
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.cfg.sim.dt
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn nav_state(&self) -> &NavState {
        &self.nav
    }

    pub fn drive_state(&self) -> DriveState {
        self.drive
    }

    pub fn last_command(&self) -> Command {
        self.last_cmd
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Reads every sensor at the current pose.
    pub fn sample(&mut self) -> Result<SensorFrame, SimError> {
        let pose = self.pose;
        let mut proximity = proximity_scan(&pose, &self.cfg.mounts, &self.arena, &self.cfg.ir_calibration)?;
        if let Some(noise) = self.noise {
            let max = self.cfg.ir_calibration.valid_range().1;
            for p in proximity.iter_mut().filter(|p| p.hit) {
                p.distance = (p.distance + noise.sample(&mut self.rng)).clamp(0.0, max);
                p.voltage = ir_voltage(p.distance, &self.cfg.ir_calibration);
            }
        }
        let (line, line_marker) = line_sense(&pose, &self.cfg.mounts.line, &self.arena);
        let flame = |m| match flame_intensity(&pose, m, &self.arena, &self.cfg.flame) {
            Err(SensorError::ZeroDistance) => Ok(SATURATED_INTENSITY),
            other => other,
        };
        Ok(SensorFrame {
            t: self.time(),
            proximity,
            line,
            line_marker,
            flame_left: flame(&self.cfg.mounts.flame_left)?,
            flame_right: flame(&self.cfg.mounts.flame_right)?,
            odometry: self.odometry,
        })
    }

    fn record(&mut self) {
        let b = body_velocity(&self.drive, &self.cfg.vehicle);
        self.trajectory.push(TrajectorySample {
            t: self.time(),
            pose: self.pose,
            u: b.u,
            r: b.r,
            omega_l: self.drive.omega_l,
            omega_r: self.drive.omega_r,
            task: self.nav.task.kind(),
        });
    }

    fn event(&mut self, t: f64, kind: &str, payload: Value) {
        self.events.push(Event { t, kind: kind.into(), payload });
    }

    /// Advances one tick. Returns the outcome once the run has ended.
    pub fn step(&mut self) -> Result<Option<Outcome>, SimError> {
        if self.outcome.is_some() {
            return Err(SimError::Finished);
        }
        let dt = self.cfg.sim.dt;
        if self.tick.is_multiple_of(u64::from(self.cfg.sim.record_every)) {
            self.record();
        }
        let t = self.time();
        let frame = self.sample()?;
        let (nav, cmd) = self.navigator.step(&self.nav, &frame, dt);
        self.log_transitions(t, &nav, &frame, &cmd);
        let t_next = (self.tick + 1) as f64 * dt;
        if self.nav.task.kind() == TaskKind::DestroyFlame && nav.task.kind() == TaskKind::ReturnHome {
            let (arena, ev) = mark_extinguished(&self.arena, t_next)?;
            self.arena = arena;
            self.events.push(ev);
            self.extinguished_at = Some(t_next);
        }
        self.nav = nav;
        self.last_cmd = cmd;

        self.drive = step_drive(&self.drive, cmd.volts_r, cmd.volts_l, &self.cfg.vehicle, &self.cfg.motor, dt)?;
        self.odometry.left += self.drive.omega_l * dt;
        self.odometry.right += self.drive.omega_r * dt;
        self.pose = advance_pose(&self.pose, &self.drive, &self.cfg.vehicle, dt);
        self.tick += 1;

        let outcome = if self.arena.footprint_collides(&self.pose, self.cfg.vehicle.footprint) {
            let p = self.pose;
            self.event(t_next, "collision", json!({ "x": p.x, "y": p.y, "theta": p.theta }));
            Some(Outcome::CollisionFail)
        } else if self.nav.task.kind() == TaskKind::Done {
            Some(Outcome::Success)
        } else {
            match self.extinguished_at {
                None if t_next > self.cfg.sim.t_max_find => Some(Outcome::TimeoutFind),
                Some(te) if t_next - te > self.cfg.sim.t_max_return => Some(Outcome::TimeoutReturn),
                _ => None,
            }
        };
        if let Some(o) = outcome {
            self.outcome = Some(o);
            self.record();
            self.event(t_next, "end", json!({ "outcome": o.to_string() }));
        }
        Ok(outcome)
    }

    fn log_transitions(&mut self, t: f64, next: &NavState, frame: &SensorFrame, cmd: &Command) {
        let prev = self.nav.clone();
        if next.line_count > prev.line_count {
            let marker = frame.line_marker.map(|m| m.to_string());
            let payload = json!({ "marker": marker, "count": next.line_count });
            self.event(t, "line", payload);
        }
        if next.current_room != prev.current_room {
            let payload = json!({ "from": prev.current_room, "to": next.current_room });
            self.event(t, "room", payload);
        }
        if next.task.kind() != prev.task.kind() {
            let payload = json!({ "from": prev.task.kind().to_string(), "to": next.task.kind().to_string() });
            self.event(t, "task", payload);
        }
        if cmd.fan_on != self.last_cmd.fan_on {
            self.event(t, if cmd.fan_on { "fan_on" } else { "fan_off" }, Value::Null);
        }
    }

    /// Runs to completion.
    pub fn run(mut self) -> Result<SimResult, SimError> {
        while self.step()?.is_none() {}
        Ok(self.into_result())
    }

    /// Result so far. Outcome is `TimeoutFind` if the run never ended.
    pub fn into_result(self) -> SimResult {
        SimResult {
            outcome: self.outcome.unwrap_or(Outcome::TimeoutFind),
            time_to_flame: self.extinguished_at,
            total_time: self.tick as f64 * self.cfg.sim.dt,
            trajectory: self.trajectory,
            events: self.events,
        }
    }
}

pub fn run(cfg: SimConfig) -> Result<SimResult, SimError> {
    Simulation::new(cfg)?.run()
}
