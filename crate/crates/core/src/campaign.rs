//! Batches of runs over rooms and seeds, and the summary table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::SimConfig;
use crate::record::write_run;
use crate::sim::{run, Outcome, SimError};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("campaign needs at least one room")]
    NoRooms,
    #[error("campaign needs at least one seed")]
    NoSeeds,
    #[error("room {0} is out of range 1..=4")]
    BadRoom(u8),
    #[error("room {room}, seed {seed}")]
    Run { room: u8, seed: u64, source: SimError },
    #[error("writing {}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Debug)]
pub struct CampaignSpec {
    pub rooms: Vec<u8>,
    pub seeds: Vec<u64>,
    pub out_dir: Option<PathBuf>,
    pub config: SimConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub room: u8,
    pub seed: u64,
    pub outcome: Outcome,
    pub time_to_flame: Option<f64>,
    pub total_time: f64,
    pub collisions: usize,
    pub files: Option<(PathBuf, PathBuf)>,
}

impl RunSummary {
    pub fn return_time(&self) -> Option<f64> {
        self.time_to_flame.map(|t| self.total_time - t)
    }
}

/// File stem for one run's outputs.
pub fn run_stem(room: u8, seed: u64) -> String {
    format!("room{room}_seed{seed}")
}

/// Runs every (room, seed) pair in parallel. Results come back in
/// seed-major, room-minor order regardless of scheduling.
pub fn run_campaign(spec: &CampaignSpec) -> Result<Vec<RunSummary>, CampaignError> {
    if spec.rooms.is_empty() {
        return Err(CampaignError::NoRooms);
    }
    if spec.seeds.is_empty() {
        return Err(CampaignError::NoSeeds);
    }
    if let Some(&r) = spec.rooms.iter().find(|r| !(1..=4).contains(*r)) {
        return Err(CampaignError::BadRoom(r));
    }
    let jobs: Vec<(u8, u64)> = spec.seeds.iter().flat_map(|&s| spec.rooms.iter().map(move |&r| (r, s))).collect();
    jobs.par_iter()
        .map(|&(room, seed)| run_one(&spec.config, room, seed, spec.out_dir.as_deref()))
        .collect()
}

fn run_one(base: &SimConfig, room: u8, seed: u64, out_dir: Option<&Path>) -> Result<RunSummary, CampaignError> {
    let mut cfg = base.clone();
    cfg.sim.room = room;
    cfg.sim.seed = seed;
    let result = run(cfg).map_err(|source| CampaignError::Run { room, seed, source })?;
    let files = match out_dir {
        Some(dir) => Some(
            write_run(dir, &run_stem(room, seed), &result)
                .map_err(|source| CampaignError::Io { path: dir.to_path_buf(), source })?,
        ),
        None => None,
    };
    Ok(RunSummary {
        room,
        seed,
        outcome: result.outcome,
        time_to_flame: result.time_to_flame,
        total_time: result.total_time,
        collisions: result.collisions(),
        files,
    })
}

/// Two-row table per seed: time to destroy the flame and total time until
/// back home, one column per room, 0.1 s precision.
pub fn format_table(runs: &[RunSummary]) -> String {
    let mut seeds: Vec<u64> = runs.iter().map(|r| r.seed).collect();
    seeds.dedup();
    let mut rooms: Vec<u8> = runs.iter().map(|r| r.room).collect();
    rooms.sort_unstable();
    rooms.dedup();
    let mut s = String::new();
    for seed in seeds {
        let _ = write!(s, "{:<28}", format!("seed {seed}"));
        for r in &rooms {
            let _ = write!(s, "{:>10}", format!("Room {r}"));
        }
        s.push('\n');
        let cell = |room: u8, total: bool| {
            let Some(run) = runs.iter().find(|x| x.seed == seed && x.room == room) else {
                return "-".to_string();
            };
            match (run.outcome, total) {
                (Outcome::Success, true) => format!("{:.1}", run.total_time),
                (_, false) if run.time_to_flame.is_some() => format!("{:.1}", run.time_to_flame.unwrap_or_default()),
                (o, _) => short_outcome(o).to_string(),
            }
        };
        for (label, total) in [("Time to destroy flame (s)", false), ("Total time to return (s)", true)] {
            let _ = write!(s, "{label:<28}");
            for &r in &rooms {
                let _ = write!(s, "{:>10}", cell(r, total));
            }
            s.push('\n');
        }
        s.push('\n');
    }
    s
}

fn short_outcome(o: Outcome) -> &'static str {
    match o {
        Outcome::Success => "ok",
        Outcome::CollisionFail => "HIT",
        Outcome::TimeoutFind | Outcome::TimeoutReturn => "TIMEOUT",
    }
}
