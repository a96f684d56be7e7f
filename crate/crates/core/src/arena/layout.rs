//! Plain-text arena layout files.
//!
//! ```text
//! # comment
//! [arena]
//! bounds 2.44 2.44
//! thickness 0.013
//! stroke 0.025
//! candle_radius 0.15
//! candle_min_depth 0.33
//! [walls]
//! x1 y1 x2 y2          # wall centerline, meters
//! [doorways]
//! room x1 y1 x2 y2
//! [home]
//! x y radius
//! [rooms]
//! id x1 y1 x2 y2 x3 y3 ...   # polygon vertices
//! ```

use std::fmt::Write as _;

use super::{ArenaError, DoorwayLine, Room};
use crate::geom::Vec2;

/// Explicit arena geometry, as read from or written to a layout file.
#[derive(Clone, Debug, PartialEq)]
pub struct ArenaLayout {
    pub bounds: Vec2,
    pub thickness: f64,
    pub stroke: f64,
    pub candle_radius: f64,
    pub candle_min_depth: f64,
    pub walls: Vec<(Vec2, Vec2)>,
    pub doorways: Vec<DoorwayLine>,
    pub home: Option<(Vec2, f64)>,
    pub rooms: Vec<Room>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Arena,
    Walls,
    Doorways,
    Home,
    Rooms,
}

impl ArenaLayout {
    pub fn parse(text: &str) -> Result<ArenaLayout, ArenaError> {
        let mut out = ArenaLayout {
            bounds: Vec2::ZERO,
            thickness: 0.0,
            stroke: 0.025,
            candle_radius: 0.15,
            candle_min_depth: 0.33,
            walls: vec![],
            doorways: vec![],
            home: None,
            rooms: vec![],
        };
        let mut section = Section::None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| ArenaError::Parse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = match name.trim() {
                    "arena" => Section::Arena,
                    "walls" => Section::Walls,
                    "doorways" => Section::Doorways,
                    "home" => Section::Home,
                    "rooms" => Section::Rooms,
                    other => return Err(err(format!("unknown section [{other}]"))),
                };
                continue;
            }
            let mut fields = line.split_whitespace();
            match section {
                Section::None => return Err(err("data before the first section header".into())),
                Section::Arena => {
                    let key = fields.next().unwrap_or_default();
                    let nums = numbers(fields).map_err(err)?;
                    let want = if key == "bounds" { 2 } else { 1 };
                    if nums.len() != want {
                        return Err(err(format!("`{key}` takes {want} value(s)")));
                    }
                    match key {
                        "bounds" => out.bounds = Vec2::new(nums[0], nums[1]),
                        "thickness" => out.thickness = nums[0],
                        "stroke" => out.stroke = nums[0],
                        "candle_radius" => out.candle_radius = nums[0],
                        "candle_min_depth" => out.candle_min_depth = nums[0],
                        other => return Err(err(format!("unknown [arena] key `{other}`"))),
                    }
                }
                Section::Walls => {
                    let n = numbers(fields).map_err(err)?;
                    if n.len() != 4 {
                        return Err(err("wall rows are `x1 y1 x2 y2`".into()));
                    }
                    out.walls.push((Vec2::new(n[0], n[1]), Vec2::new(n[2], n[3])));
                }
                Section::Doorways => {
                    let room_id = room_id(fields.next()).map_err(err)?;
                    let n = numbers(fields).map_err(err)?;
                    if n.len() != 4 {
                        return Err(err("doorway rows are `room x1 y1 x2 y2`".into()));
                    }
                    out.doorways.push(DoorwayLine { a: Vec2::new(n[0], n[1]), b: Vec2::new(n[2], n[3]), room_id });
                }
                Section::Home => {
                    let n = numbers(fields).map_err(err)?;
                    if n.len() != 3 {
                        return Err(err("home row is `x y radius`".into()));
                    }
                    if out.home.is_some() {
                        return Err(err("more than one home circle".into()));
                    }
                    out.home = Some((Vec2::new(n[0], n[1]), n[2]));
                }
                Section::Rooms => {
                    let id = room_id(fields.next()).map_err(err)?;
                    let n = numbers(fields).map_err(err)?;
                    if n.len() < 6 || n.len() % 2 != 0 {
                        return Err(err("room rows are `id x1 y1 x2 y2 x3 y3 ...`".into()));
                    }
                    let polygon = n.chunks(2).map(|c| Vec2::new(c[0], c[1])).collect();
                    out.rooms.push(Room { id, polygon });
                }
            }
        }
        if !(out.thickness > 0.0) {
            return Err(ArenaError::Parse { line: 0, msg: "missing positive `thickness` in [arena]".into() });
        }
        Ok(out)
    }

    /// Serializes in the format accepted by [`ArenaLayout::parse`]. Values are
    /// written in shortest round-trip form, so parsing the output reproduces
    /// the layout exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# ffsim arena layout (meters)");
        let _ = writeln!(s, "[arena]");
        let _ = writeln!(s, "bounds {} {}", self.bounds.x, self.bounds.y);
        let _ = writeln!(s, "thickness {}", self.thickness);
        let _ = writeln!(s, "stroke {}", self.stroke);
        let _ = writeln!(s, "candle_radius {}", self.candle_radius);
        let _ = writeln!(s, "candle_min_depth {}", self.candle_min_depth);
        let _ = writeln!(s, "\n[walls]");
        for (a, b) in &self.walls {
            let _ = writeln!(s, "{} {} {} {}", a.x, a.y, b.x, b.y);
        }
        let _ = writeln!(s, "\n[doorways]");
        for d in &self.doorways {
            let _ = writeln!(s, "{} {} {} {} {}", d.room_id, d.a.x, d.a.y, d.b.x, d.b.y);
        }
        if let Some((c, r)) = self.home {
            let _ = writeln!(s, "\n[home]\n{} {} {}", c.x, c.y, r);
        }
        let _ = writeln!(s, "\n[rooms]");
        for r in &self.rooms {
            let _ = write!(s, "{}", r.id);
            for p in &r.polygon {
                let _ = write!(s, " {} {}", p.x, p.y);
            }
            s.push('\n');
        }
        s
    }
}

fn numbers<'a>(fields: impl Iterator<Item = &'a str>) -> Result<Vec<f64>, String> {
    fields
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{f}` is not a finite number"))
        })
        .collect()
}

fn room_id(field: Option<&str>) -> Result<u8, String> {
    let f = field.ok_or("missing room id")?;
    f.parse::<u8>().map_err(|_| format!("`{f}` is not a room id"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{build_standard_arena, ArenaConfig};

    #[test]
    fn default_layout_round_trips() {
        let a = build_standard_arena(&ArenaConfig::default()).unwrap();
        let text = a.to_layout().to_text();
        assert_eq!(ArenaLayout::parse(&text).unwrap(), a.to_layout());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = ArenaLayout::parse("[arena]\nthickness 0.01\n[walls]\n0 0 1\n").unwrap_err();
        assert_eq!(e, ArenaError::Parse { line: 4, msg: "wall rows are `x1 y1 x2 y2`".into() });
        assert!(matches!(ArenaLayout::parse("[bogus]\n"), Err(ArenaError::Parse { line: 1, .. })));
        assert!(matches!(ArenaLayout::parse("[walls]\n0 0 x 1\n"), Err(ArenaError::Parse { line: 2, .. })));
    }

    #[test]
    fn missing_thickness_rejected() {
        assert!(ArenaLayout::parse("[walls]\n0 0 1 0\n").is_err());
    }
}
