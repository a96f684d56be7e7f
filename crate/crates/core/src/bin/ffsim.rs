use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use ffsim::campaign::{format_table, run_campaign, run_stem, CampaignSpec};
use ffsim::config::SimConfig;
use ffsim::record::write_run;
use ffsim::sim::{run, Outcome};

/// Fire-fighting robot contest simulator.
#[derive(Parser)]
#[command(name = "ffsim", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one simulation and write its trajectory and event files.
    Run {
        /// Room holding the candle.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        room: u8,
        #[arg(long)]
        seed: Option<u64>,
        /// Config file (default: $FFSIM_CONFIG, else the built-in defaults).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "ffsim-out")]
        out: PathBuf,
    },
    /// Run every room for every seed and print the summary table.
    Campaign {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4",
              value_parser = clap::value_parser!(u8).range(1..=4))]
        rooms: Vec<u8>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        seeds: Vec<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "ffsim-out")]
        out: PathBuf,
    },
    /// Check a config against every invariant.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load(path: Option<&PathBuf>) -> Result<SimConfig> {
    SimConfig::resolve(path.map(PathBuf::as_path)).context("loading config")
}

fn secs(t: Option<f64>) -> String {
    t.map_or("-".to_string(), |t| format!("{t:.1}"))
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Run { room, seed, config, out } => {
            let mut cfg = load(config.as_ref())?;
            cfg.sim.room = room;
            if let Some(s) = seed {
                cfg.sim.seed = s;
            }
            let seed = cfg.sim.seed;
            let result = run(cfg)?;
            let (traj, events) = write_run(&out, &run_stem(room, seed), &result)
                .with_context(|| format!("writing to {}", out.display()))?;
            println!("room {room} seed {seed}: {}", result.outcome);
            println!("  time to destroy flame  {} s", secs(result.time_to_flame));
            println!("  return time            {} s", secs(result.return_time()));
            println!("  total time             {:.1} s", result.total_time);
            println!("wrote {}", traj.display());
            println!("wrote {}", events.display());
            Ok(result.outcome == Outcome::Success)
        }
        Cmd::Campaign { rooms, seeds, config, out } => {
            let spec = CampaignSpec { rooms, seeds, out_dir: Some(out), config: load(config.as_ref())? };
            let runs = run_campaign(&spec)?;
            print!("{}", format_table(&runs));
            let mut ok = true;
            for r in &runs {
                if r.outcome != Outcome::Success {
                    ok = false;
                    eprintln!("room {} seed {}: {}", r.room, r.seed, r.outcome);
                }
                if let Some((t, e)) = &r.files {
                    println!("wrote {}", t.display());
                    println!("wrote {}", e.display());
                }
            }
            Ok(ok)
        }
        Cmd::Validate { config } => {
            let v = load(config.as_ref())?.validate();
            for m in &v {
                println!("{m}");
            }
            println!("{} violation{}", v.len(), if v.len() == 1 { "" } else { "s" });
            Ok(v.is_empty())
        }
    }
}
