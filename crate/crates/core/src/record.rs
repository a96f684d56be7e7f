//! Trajectory and event file formats.
//!
//! Trajectory: CSV with header `t,x,y,theta,u,r,omega_l,omega_r,task`.
//! Events: one JSON object per line, `{"t":..,"kind":..,"payload":..}`.
//! Floats are written in shortest round-trip form.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::sim::{Event, SimResult, TrajectorySample};

pub const TRAJECTORY_HEADER: [&str; 9] = ["t", "x", "y", "theta", "u", "r", "omega_l", "omega_r", "task"];

pub fn write_trajectory<W: Write>(w: W, samples: &[TrajectorySample]) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    for s in samples {
        out.write_record([
            s.t.to_string(),
            s.pose.x.to_string(),
            s.pose.y.to_string(),
            s.pose.theta.to_string(),
            s.u.to_string(),
            s.r.to_string(),
            s.omega_l.to_string(),
            s.omega_r.to_string(),
            s.task.to_string(),
        ])?;
    }
    out.flush()
}

pub fn write_events<W: Write>(mut w: W, events: &[Event]) -> io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Writes `<stem>.trajectory.csv` and `<stem>.events.jsonl` into `dir`,
/// returning both paths.
pub fn write_run(dir: &Path, stem: &str, result: &SimResult) -> io::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let traj = dir.join(format!("{stem}.trajectory.csv"));
    let events = dir.join(format!("{stem}.events.jsonl"));
    write_trajectory(io::BufWriter::new(std::fs::File::create(&traj)?), &result.trajectory)?;
    write_events(io::BufWriter::new(std::fs::File::create(&events)?), &result.events)?;
    Ok((traj, events))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navigator::TaskKind;
    use crate::vehicle::Pose;
    use serde_json::json;

    #[test]
    fn trajectory_header_and_row() {
        let s = TrajectorySample {
            t: 0.01,
            pose: Pose::new(0.25, 1.22, 0.0),
            u: 0.5,
            r: -0.25,
            omega_l: 1.0,
            omega_r: 2.0,
            task: TaskKind::ToRoom,
        };
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &[s]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,x,y,theta,u,r,omega_l,omega_r,task\n0.01,0.25,1.22,0,0.5,-0.25,1,2,ToRoom\n"
        );
    }

    #[test]
    fn events_are_json_lines() {
        let e = [
            Event { t: 0.0, kind: "start".into(), payload: json!({"room": 1}) },
            Event { t: 1.5, kind: "fan_on".into(), payload: serde_json::Value::Null },
        ];
        let mut buf = Vec::new();
        write_events(&mut buf, &e).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"t\":0.0,\"kind\":\"start\",\"payload\":{\"room\":1}}\n{\"t\":1.5,\"kind\":\"fan_on\",\"payload\":null}\n"
        );
    }
}
