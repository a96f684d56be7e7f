//! Simulation configuration: one TOML file with a section per module.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arena::{build_standard_arena, Arena, ArenaConfig, ArenaError, ArenaLayout};
use crate::navigator::NavConfig;
use crate::sensors::{FlameModel, IrCalibration, Mounts};
use crate::vehicle::{MotorParams, VehicleParams};

/// The shipped default configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../assets/default.toml");
/// The default arena written out as a layout file.
pub const DEFAULT_LAYOUT: &str = include_str!("../assets/default_arena.layout");

/// Environment variable naming the config file used when none is given.
pub const CONFIG_ENV: &str = "FFSIM_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Arena(#[from] ArenaError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub t_max_find: f64,
    pub t_max_return: f64,
    /// Ticks between trajectory rows.
    pub record_every: u32,
    pub room: u8,
    pub seed: u64,
    /// Standard deviation of Gaussian noise on proximity ranges (m). Zero
    /// disables noise.
    pub proximity_noise_sigma: f64,
    /// Arena layout file. Relative paths resolve against the config file.
    pub layout: Option<PathBuf>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max_find: 300.0,
            t_max_return: 120.0,
            record_every: 10,
            room: 1,
            seed: 1,
            proximity_noise_sigma: 0.0,
            layout: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub sim: SimSection,
    pub arena: ArenaConfig,
    pub vehicle: VehicleParams,
    pub motor: MotorParams,
    pub ir_calibration: IrCalibration,
    pub flame: FlameModel,
    pub mounts: Mounts,
    pub navigator: NavConfig,
    /// Layout text loaded from `sim.layout`.
    #[serde(skip)]
    pub layout_text: Option<String>,
}

impl SimConfig {
    /// Parses TOML. A `sim.layout` path is not read; use [`SimConfig::load`]
    /// for that.
    pub fn from_toml_str(text: &str) -> Result<SimConfig, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn shipped() -> SimConfig {
        Self::from_toml_str(DEFAULT_CONFIG).expect("shipped config parses")
    }

    pub fn load(path: &Path) -> Result<SimConfig, ConfigError> {
        let io = |source| ConfigError::Io { path: path.to_path_buf(), source };
        let text = std::fs::read_to_string(path).map_err(io)?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(layout) = &cfg.sim.layout {
            let full = path.parent().unwrap_or(Path::new(".")).join(layout);
            let text = std::fs::read_to_string(&full).map_err(|source| ConfigError::Io { path: full.clone(), source })?;
            cfg.layout_text = Some(text);
        }
        Ok(cfg)
    }

    /// `path` if given, else `$FFSIM_CONFIG` if set, else the shipped
    /// default.
    pub fn resolve(path: Option<&Path>) -> Result<SimConfig, ConfigError> {
        match path {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::shipped()),
            },
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The arena without a candle.
    pub fn build_arena(&self) -> Result<Arena, ArenaError> {
        match &self.layout_text {
            Some(text) => {
                let arena = Arena::from_layout(&ArenaLayout::parse(text)?);
                let v = arena.validate();
                if v.is_empty() {
                    Ok(arena)
                } else {
                    Err(ArenaError::Invariant(v))
                }
            }
            None => build_standard_arena(&self.arena),
        }
    }

    /// Every invariant violation, across all sections.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let s = &self.sim;
        for (name, x) in [("dt", s.dt), ("t_max_find", s.t_max_find), ("t_max_return", s.t_max_return)] {
            if !(x.is_finite() && x > 0.0) {
                v.push(format!("sim.{name} must be positive, got {x}"));
            }
        }
        if s.record_every == 0 {
            v.push("sim.record_every must be at least 1".to_string());
        }
        if !(1..=4).contains(&s.room) {
            v.push(format!("sim.room must be in 1..=4, got {}", s.room));
        }
        if !(s.proximity_noise_sigma.is_finite() && s.proximity_noise_sigma >= 0.0) {
            v.push(format!("sim.proximity_noise_sigma must be non-negative, got {}", s.proximity_noise_sigma));
        }
        v.extend(self.vehicle.validate());
        v.extend(self.motor.validate());
        v.extend(self.ir_calibration.validate());
        v.extend(self.flame.validate());
        v.extend(self.mounts.validate());
        v.extend(self.navigator.validate());
        match self.build_arena() {
            Ok(a) => {
                if a.footprint_collides(&self.start_pose(&a), self.vehicle.footprint) {
                    v.push("robot footprint at the start pose touches a wall".to_string());
                }
            }
            Err(ArenaError::Invariant(list)) => v.extend(list),
            Err(e) => v.push(format!("arena: {e}")),
        }
        v
    }

    /// Robot start: on the home circle center, facing +X.
    pub fn start_pose(&self, arena: &Arena) -> crate::vehicle::Pose {
        let c = arena.home().map(|h| h.center).unwrap_or_default();
        crate::vehicle::Pose::new(c.x, c.y, 0.0)
    }
}
