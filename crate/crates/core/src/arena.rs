//! Contest arena: walls, rooms, white floor markings and the candle.
//!
//! Walls are rectangles swept around a centerline segment with square end
//! caps of half the wall thickness, so walls meeting at a corner close it.
//! Doorway lines lie on the wall centerline across the clear door gap.

mod layout;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{point_in_polygon, point_segment_distance, OrientedRect, Vec2};
use crate::vehicle::{HalfExtents, Pose};

pub use layout::ArenaLayout;

#[derive(Debug, Error, PartialEq)]
pub enum ArenaError {
    #[error("invalid arena config: {0}")]
    InvalidConfig(String),
    #[error("arena violates {} invariant(s): {}", .0.len(), .0.join("; "))]
    Invariant(Vec<String>),
    #[error("room {0} does not exist (valid rooms are 1..=4)")]
    NoSuchRoom(u8),
    #[error("arena already holds a candle")]
    CandleAlreadyPlaced,
    #[error("room {0} has no admissible candle position")]
    EmptyAdmissibleRegion(u8),
    #[error("ray origin ({x:.4}, {y:.4}) lies inside a wall")]
    OriginInsideWall { x: f64, y: f64 },
    #[error("ray direction must be a finite unit vector and max_range positive")]
    InvalidRay,
    #[error("no lit candle in the arena")]
    NoLitCandle,
    #[error("layout line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallSegment {
    pub a: Vec2,
    pub b: Vec2,
    pub thickness: f64,
}

impl WallSegment {
    pub fn new(a: Vec2, b: Vec2, thickness: f64) -> Self {
        Self { a, b, thickness }
    }

    pub fn rect(&self) -> OrientedRect {
        let d = self.b - self.a;
        let len = d.norm();
        OrientedRect {
            center: (self.a + self.b) * 0.5,
            axis: d * (1.0 / len),
            half_len: 0.5 * len + 0.5 * self.thickness,
            half_width: 0.5 * self.thickness,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkerKind {
    Home,
    Candle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleMarker {
    pub center: Vec2,
    pub radius: f64,
    pub kind: MarkerKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoorwayLine {
    pub a: Vec2,
    pub b: Vec2,
    pub room_id: u8,
}

impl DoorwayLine {
    pub fn midpoint(&self) -> Vec2 {
        (self.a + self.b) * 0.5
    }

    pub fn width(&self) -> f64 {
        self.a.distance(self.b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub id: u8,
    pub polygon: Vec<Vec2>,
}

impl Room {
    pub fn contains(&self, p: Vec2) -> bool {
        point_in_polygon(p, &self.polygon)
    }

    fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.polygon.len();
        (0..n).map(move |i| (self.polygon[i], self.polygon[(i + 1) % n]))
    }

    fn bbox(&self) -> (Vec2, Vec2) {
        self.polygon.iter().fold(
            (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
            |(lo, hi), p| (Vec2::new(lo.x.min(p.x), lo.y.min(p.y)), Vec2::new(hi.x.max(p.x), hi.y.max(p.y))),
        )
    }

    fn centroid(&self) -> Vec2 {
        let n = self.polygon.len() as f64;
        self.polygon.iter().fold(Vec2::ZERO, |acc, p| acc + *p) * (1.0 / n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candle {
    pub marker: CircleMarker,
    pub room_id: u8,
    pub lit: bool,
}

impl Candle {
    pub fn flame_position(&self) -> Vec2 {
        self.marker.center
    }
}

/// Identity of a white floor marking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MarkerId {
    Doorway(u8),
    Home,
    Candle,
}

impl std::fmt::Display for MarkerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MarkerId::Doorway(r) => write!(f, "doorway{r}"),
            MarkerId::Home => f.write_str("home"),
            MarkerId::Candle => f.write_str("candle"),
        }
    }
}

/// Parameters of the generated four-room layout.
///
/// The field is a square with a straight hallway across its middle. Two
/// rooms sit below the hallway and two above; each door is centered on its
/// room. Room 1 is bottom-left, 2 top-left, 3 top-right, 4 bottom-right.
/// Home is at the west end of the hallway.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArenaConfig {
    pub width: f64,
    pub height: f64,
    pub wall_thickness: f64,
    /// Clear width of the hallway between wall faces.
    pub corridor_width: f64,
    /// Clear width of each door gap.
    pub door_width: f64,
    pub stroke_width: f64,
    pub home_radius: f64,
    /// Distance of the home center from the west outer wall centerline.
    pub home_x: f64,
    pub candle_radius: f64,
    pub candle_min_depth: f64,
    /// Narrowest passable doorway: robot width plus clearance.
    pub min_door_width: f64,
}

impl Default for ArenaConfig {
    fn default() -> Self {
        Self {
            width: 2.44,
            height: 2.44,
            wall_thickness: 0.013,
            corridor_width: 0.46,
            door_width: 0.46,
            stroke_width: 0.025,
            home_radius: 0.15,
            home_x: 0.25,
            candle_radius: 0.15,
            candle_min_depth: 0.33,
            min_door_width: 0.34,
        }
    }
}

/// The contest environment. Immutable once built; the candle is replaced
/// through [`Arena::place_candle`] and [`Arena::extinguished`], which return
/// new arenas.
#[derive(Clone, Debug, PartialEq)]
pub struct Arena {
    walls: Vec<WallSegment>,
    wall_rects: Vec<OrientedRect>,
    rooms: Vec<Room>,
    doorways: Vec<DoorwayLine>,
    home: Option<CircleMarker>,
    candle: Option<Candle>,
    bounds: Vec2,
    stroke: f64,
    candle_radius: f64,
    candle_min_depth: f64,
}

pub fn build_standard_arena(cfg: &ArenaConfig) -> Result<Arena, ArenaError> {
    let positive = [
        ("width", cfg.width),
        ("height", cfg.height),
        ("wall_thickness", cfg.wall_thickness),
        ("corridor_width", cfg.corridor_width),
        ("door_width", cfg.door_width),
        ("stroke_width", cfg.stroke_width),
        ("home_radius", cfg.home_radius),
        ("candle_radius", cfg.candle_radius),
        ("candle_min_depth", cfg.candle_min_depth),
    ];
    for (name, v) in positive {
        if !(v.is_finite() && v > 0.0) {
            return Err(ArenaError::InvalidConfig(format!("{name} must be positive, got {v}")));
        }
    }
    if cfg.door_width < cfg.min_door_width {
        return Err(ArenaError::InvalidConfig(format!(
            "door width {} is narrower than the robot footprint plus clearance ({})",
            cfg.door_width, cfg.min_door_width
        )));
    }

    let (w, h, t) = (cfg.width, cfg.height, cfg.wall_thickness);
    let yc = 0.5 * h;
    let y_lo = yc - 0.5 * (cfg.corridor_width + t);
    let y_hi = yc + 0.5 * (cfg.corridor_width + t);
    let x_mid = 0.5 * w;
    // Clear room extents between wall faces.
    let room_depth = y_lo - t;
    let room_width = x_mid - t;
    if room_depth < cfg.candle_min_depth + cfg.candle_radius || room_depth < 2.0 * cfg.candle_radius {
        return Err(ArenaError::InvalidConfig(format!(
            "hallway of width {} leaves rooms only {room_depth:.3} m deep",
            cfg.corridor_width
        )));
    }
    if cfg.door_width > room_width {
        return Err(ArenaError::InvalidConfig(format!(
            "door width {} exceeds the clear room width {room_width:.3}",
            cfg.door_width
        )));
    }

    let left_c = 0.25 * w;
    let right_c = 0.75 * w;
    let half_door = 0.5 * cfg.door_width;
    let p = Vec2::new;

    // Hallway wall with door gaps centered at `centers`.
    let gapped = |y: f64, centers: [f64; 2]| -> Vec<WallSegment> {
        let mut segs = Vec::new();
        let mut x0 = 0.0;
        for c in centers {
            let x1 = c - half_door - 0.5 * t;
            segs.push(WallSegment::new(p(x0, y), p(x1, y), t));
            x0 = c + half_door + 0.5 * t;
        }
        segs.push(WallSegment::new(p(x0, y), p(w, y), t));
        segs
    };

    let mut walls = vec![
        WallSegment::new(p(0.0, 0.0), p(w, 0.0), t),
        WallSegment::new(p(w, 0.0), p(w, h), t),
        WallSegment::new(p(w, h), p(0.0, h), t),
        WallSegment::new(p(0.0, h), p(0.0, 0.0), t),
    ];
    walls.extend(gapped(y_lo, [left_c, right_c]));
    walls.extend(gapped(y_hi, [left_c, right_c]));
    walls.push(WallSegment::new(p(x_mid, 0.0), p(x_mid, y_lo), t));
    walls.push(WallSegment::new(p(x_mid, y_hi), p(x_mid, h), t));

    let rect = |x0: f64, y0: f64, x1: f64, y1: f64| vec![p(x0, y0), p(x1, y0), p(x1, y1), p(x0, y1)];
    let rooms = vec![
        Room { id: 1, polygon: rect(0.0, 0.0, x_mid, y_lo) },
        Room { id: 2, polygon: rect(0.0, y_hi, x_mid, h) },
        Room { id: 3, polygon: rect(x_mid, y_hi, w, h) },
        Room { id: 4, polygon: rect(x_mid, 0.0, w, y_lo) },
    ];
    let door = |c: f64, y: f64, room_id: u8| DoorwayLine { a: p(c - half_door, y), b: p(c + half_door, y), room_id };
    let doorways = vec![door(left_c, y_lo, 1), door(left_c, y_hi, 2), door(right_c, y_hi, 3), door(right_c, y_lo, 4)];

    let layout = ArenaLayout {
        bounds: p(w, h),
        thickness: t,
        stroke: cfg.stroke_width,
        candle_radius: cfg.candle_radius,
        candle_min_depth: cfg.candle_min_depth,
        walls: walls.iter().map(|s| (s.a, s.b)).collect(),
        doorways,
        home: Some((p(cfg.home_x, yc), cfg.home_radius)),
        rooms,
    };
    let arena = Arena::from_layout(&layout);
    let violations = arena.validate();
    if violations.is_empty() {
        Ok(arena)
    } else {
        Err(ArenaError::Invariant(violations))
    }
}

impl Arena {
    /// Builds an arena from explicit geometry without checking invariants.
    pub fn from_layout(l: &ArenaLayout) -> Arena {
        let walls: Vec<WallSegment> = l.walls.iter().map(|&(a, b)| WallSegment::new(a, b, l.thickness)).collect();
        Arena {
            wall_rects: walls.iter().map(WallSegment::rect).collect(),
            walls,
            rooms: l.rooms.clone(),
            doorways: l.doorways.clone(),
            home: l.home.map(|(center, radius)| CircleMarker { center, radius, kind: MarkerKind::Home }),
            candle: None,
            bounds: l.bounds,
            stroke: l.stroke,
            candle_radius: l.candle_radius,
            candle_min_depth: l.candle_min_depth,
        }
    }

    /// An arena containing only the given walls, for sensor tests.
    pub fn from_walls(walls: Vec<WallSegment>) -> Arena {
        let thickness = walls.first().map_or(0.01, |w| w.thickness);
        let mut a = Arena::from_layout(&ArenaLayout {
            bounds: Vec2::new(0.0, 0.0),
            thickness,
            stroke: 0.025,
            candle_radius: 0.15,
            candle_min_depth: 0.33,
            walls: vec![],
            doorways: vec![],
            home: None,
            rooms: vec![],
        });
        a.wall_rects = walls.iter().map(WallSegment::rect).collect();
        a.walls = walls;
        a
    }

    pub fn to_layout(&self) -> ArenaLayout {
        ArenaLayout {
            bounds: self.bounds,
            thickness: self.walls.first().map_or(0.0, |w| w.thickness),
            stroke: self.stroke,
            candle_radius: self.candle_radius,
            candle_min_depth: self.candle_min_depth,
            walls: self.walls.iter().map(|w| (w.a, w.b)).collect(),
            doorways: self.doorways.clone(),
            home: self.home.map(|h| (h.center, h.radius)),
            rooms: self.rooms.clone(),
        }
    }

    pub fn walls(&self) -> &[WallSegment] {
        &self.walls
    }

    pub fn rooms(&self) -> &[Room] {
        &self.rooms
    }

    pub fn room(&self, id: u8) -> Option<&Room> {
        self.rooms.iter().find(|r| r.id == id)
    }

    pub fn doorways(&self) -> &[DoorwayLine] {
        &self.doorways
    }

    pub fn home(&self) -> Option<&CircleMarker> {
        self.home.as_ref()
    }

    pub fn candle(&self) -> Option<&Candle> {
        self.candle.as_ref()
    }

    /// The candle, if one is placed and still burning.
    pub fn lit_candle(&self) -> Option<&Candle> {
        self.candle.as_ref().filter(|c| c.lit)
    }

    pub fn bounds(&self) -> Vec2 {
        self.bounds
    }

    pub fn stroke(&self) -> f64 {
        self.stroke
    }

    pub fn candle_radius(&self) -> f64 {
        self.candle_radius
    }

    pub fn wall_thickness(&self) -> f64 {
        self.walls.first().map_or(0.0, |w| w.thickness)
    }

    pub fn point_in_wall(&self, p: Vec2) -> bool {
        self.wall_rects.iter().any(|r| r.contains(p))
    }

    pub fn room_at(&self, p: Vec2) -> Option<u8> {
        self.rooms.iter().find(|r| r.contains(p)).map(|r| r.id)
    }

    /// Whether a candle centered at `p` satisfies the placement rules for
    /// room `room_id`: its circle lies inside the room's clear interior and
    /// its center is at least `candle_min_depth` from the room's doorway.
    pub fn candle_admissible(&self, room_id: u8, p: Vec2) -> bool {
        let Some(room) = self.room(room_id) else {
            return false;
        };
        if !room.contains(p) {
            return false;
        }
        let clear = self.candle_radius + 0.5 * self.wall_thickness();
        if room.edges().any(|(a, b)| point_segment_distance(p, a, b) <= clear) {
            return false;
        }
        // Interior walls crossing the room count too.
        if self.wall_rects.iter().any(|r| {
            let l = r.to_local(p);
            let dx = (l.x.abs() - r.half_len).max(0.0);
            let dy = (l.y.abs() - r.half_width).max(0.0);
            dx.hypot(dy) <= self.candle_radius
        }) {
            return false;
        }
        self.doorways.iter().all(|d| {
            let dist = point_segment_distance(p, d.a, d.b);
            dist > self.candle_radius && (d.room_id != room_id || dist >= self.candle_min_depth)
        })
    }

    /// Draws a candle position uniformly from the admissible part of the
    /// room. The same `(room_id, seed)` always yields the same position.
    pub fn place_candle(&self, room_id: u8, seed: u64) -> Result<Arena, ArenaError> {
        if self.candle.is_some() {
            return Err(ArenaError::CandleAlreadyPlaced);
        }
        let room = self.room(room_id).ok_or(ArenaError::NoSuchRoom(room_id))?;
        let (lo, hi) = room.bbox();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(room_id) << 56));
        const MAX_TRIES: usize = 100_000;
        for _ in 0..MAX_TRIES {
            let p = Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
            if self.candle_admissible(room_id, p) {
                let mut out = self.clone();
                out.candle = Some(Candle {
                    marker: CircleMarker { center: p, radius: self.candle_radius, kind: MarkerKind::Candle },
                    room_id,
                    lit: true,
                });
                return Ok(out);
            }
        }
        Err(ArenaError::EmptyAdmissibleRegion(room_id))
    }

    /// Returns a copy holding a candle at an explicit position, unchecked.
    pub fn with_candle_at(&self, room_id: u8, center: Vec2) -> Arena {
        let mut out = self.clone();
        out.candle = Some(Candle {
            marker: CircleMarker { center, radius: self.candle_radius, kind: MarkerKind::Candle },
            room_id,
            lit: true,
        });
        out
    }

    /// Returns a copy with the flame put out. The candle circle stays on
    /// the floor.
    pub fn extinguished(&self) -> Result<Arena, ArenaError> {
        match self.candle {
            Some(c) if c.lit => {
                let mut out = self.clone();
                out.candle = Some(Candle { lit: false, ..c });
                Ok(out)
            }
            _ => Err(ArenaError::NoLitCandle),
        }
    }

    /// Distance along the ray to the nearest wall face, if one is hit
    /// within `max_range`.
    pub fn raycast(&self, origin: Vec2, dir: Vec2, max_range: f64) -> Result<Option<f64>, ArenaError> {
        if !origin.is_finite() || !dir.is_finite() || (dir.norm() - 1.0).abs() > 1e-6 || !(max_range > 0.0) {
            return Err(ArenaError::InvalidRay);
        }
        let mut best: Option<f64> = None;
        for r in &self.wall_rects {
            let o = r.to_local(origin);
            let d = Vec2::new(dir.dot(r.axis), dir.dot(r.axis.perp()));
            if o.x.abs() < r.half_len && o.y.abs() < r.half_width {
                return Err(ArenaError::OriginInsideWall { x: origin.x, y: origin.y });
            }
            if let Some(t) = slab_entry(o, d, r.half_len, r.half_width) {
                if t <= max_range && best.is_none_or(|b| t < b) {
                    best = Some(t);
                }
            }
        }
        Ok(best)
    }

    /// The white marking under `p`, if any. Doorway lines take precedence
    /// over circles where they overlap.
    pub fn on_white(&self, p: Vec2) -> Option<MarkerId> {
        let half = 0.5 * self.stroke;
        if let Some(d) = self.doorways.iter().find(|d| point_segment_distance(p, d.a, d.b) <= half) {
            return Some(MarkerId::Doorway(d.room_id));
        }
        if let Some(h) = &self.home {
            if (p.distance(h.center) - h.radius).abs() <= half {
                return Some(MarkerId::Home);
            }
        }
        if let Some(c) = &self.candle {
            if (p.distance(c.marker.center) - c.marker.radius).abs() <= half {
                return Some(MarkerId::Candle);
            }
        }
        None
    }

    /// Whether the robot rectangle at `pose` touches any wall.
    pub fn footprint_collides(&self, pose: &Pose, footprint: HalfExtents) -> bool {
        let robot = footprint_rect(pose, footprint);
        self.wall_rects.iter().any(|w| w.overlaps(&robot))
    }

    /// Rigid transform of every geometric element: rotate about the origin
    /// by `rotation`, then translate.
    pub fn transformed(&self, rotation: f64, translation: Vec2) -> Arena {
        let tf = |p: Vec2| p.rotated(rotation) + translation;
        let mut out = self.clone();
        for w in &mut out.walls {
            w.a = tf(w.a);
            w.b = tf(w.b);
        }
        out.wall_rects = out.walls.iter().map(WallSegment::rect).collect();
        for r in &mut out.rooms {
            r.polygon.iter_mut().for_each(|p| *p = tf(*p));
        }
        for d in &mut out.doorways {
            d.a = tf(d.a);
            d.b = tf(d.b);
        }
        if let Some(h) = &mut out.home {
            h.center = tf(h.center);
        }
        if let Some(c) = &mut out.candle {
            c.marker.center = tf(c.marker.center);
        }
        out
    }

    /// Checks every structural invariant and returns one message per
    /// violation.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.walls.is_empty() {
            v.push("arena has no walls".to_string());
        }
        let t0 = self.wall_thickness();
        for (i, w) in self.walls.iter().enumerate() {
            if w.a == w.b {
                v.push(format!("wall {i} has coincident endpoints"));
            }
            if !(w.thickness > 0.0) {
                v.push(format!("wall {i} thickness must be positive"));
            }
            if w.thickness != t0 {
                v.push(format!("wall {i} thickness {} differs from {t0}", w.thickness));
            }
        }

        let mut ids: Vec<u8> = self.rooms.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        if ids != [1, 2, 3, 4] {
            v.push(format!("rooms must have ids 1..=4 exactly once, got {ids:?}"));
        }
        for r in &self.rooms {
            if r.polygon.len() < 3 {
                v.push(format!("room {} polygon has fewer than 3 vertices", r.id));
            }
        }
        for (i, a) in self.rooms.iter().enumerate() {
            for b in &self.rooms[i + 1..] {
                if rooms_overlap(a, b) {
                    v.push(format!("rooms {} and {} overlap", a.id, b.id));
                }
            }
        }

        for d in &self.doorways {
            if !(1..=4).contains(&d.room_id) {
                v.push(format!("doorway has invalid room id {}", d.room_id));
            }
            let mid = d.midpoint();
            let n = (d.b - d.a).normalized().perp() * (t0 + self.stroke);
            let sides = [mid + n, mid - n].map(|q| self.room_at(q));
            let bordering: Vec<u8> = sides.iter().flatten().copied().collect();
            if bordering != [d.room_id] {
                v.push(format!(
                    "doorway of room {} must border exactly that room, borders {bordering:?}",
                    d.room_id
                ));
            }
            let blocked = (1..10).any(|k| {
                let q = d.a + (d.b - d.a) * (k as f64 / 10.0);
                self.point_in_wall(q)
            });
            if blocked {
                v.push(format!("doorway of room {} lies inside a wall", d.room_id));
            }
        }

        match &self.home {
            None => v.push("arena has no home circle".to_string()),
            Some(h) => {
                if !(h.radius > 0.0) {
                    v.push("home radius must be positive".to_string());
                }
                if self.point_in_wall(h.center) {
                    v.push("home center lies inside a wall".to_string());
                }
                if let Some(r) = self.room_at(h.center) {
                    v.push(format!("home circle lies inside room {r} instead of the hallway"));
                }
            }
        }

        if let Some(c) = &self.candle {
            if !(c.marker.radius > 0.0) {
                v.push("candle radius must be positive".to_string());
            }
            if self.room_at(c.flame_position()) != Some(c.room_id) {
                v.push(format!("candle is not strictly inside room {}", c.room_id));
            }
            let p = c.flame_position();
            for d in &self.doorways {
                let dist = point_segment_distance(p, d.a, d.b);
                if dist <= c.marker.radius {
                    v.push(format!("candle circle touches doorway line of room {}", d.room_id));
                }
                if d.room_id == c.room_id && dist < self.candle_min_depth {
                    v.push(format!("candle is only {dist:.3} m into room {}", c.room_id));
                }
            }
        }
        v
    }
}

/// The robot's oriented bounding rectangle at `pose`.
pub fn footprint_rect(pose: &Pose, fp: HalfExtents) -> OrientedRect {
    OrientedRect {
        center: Vec2::new(pose.x, pose.y),
        axis: Vec2::from_angle(pose.theta),
        half_len: fp.length,
        half_width: fp.width,
    }
}

/// Ray/box entry distance in the box frame, for origins outside the box.
fn slab_entry(o: Vec2, d: Vec2, hx: f64, hy: f64) -> Option<f64> {
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for (oc, dc, h) in [(o.x, d.x, hx), (o.y, d.y, hy)] {
        if dc.abs() < 1e-15 {
            if oc.abs() > h {
                return None;
            }
        } else {
            let t1 = (-h - oc) / dc;
            let t2 = (h - oc) / dc;
            t_lo = t_lo.max(t1.min(t2));
            t_hi = t_hi.min(t1.max(t2));
        }
    }
    if t_hi < t_lo || t_hi < 0.0 {
        return None;
    }
    Some(t_lo.max(0.0))
}

fn segments_cross(a1: Vec2, a2: Vec2, b1: Vec2, b2: Vec2) -> bool {
    let d1 = (a2 - a1).cross(b1 - a1);
    let d2 = (a2 - a1).cross(b2 - a1);
    let d3 = (b2 - b1).cross(a1 - b1);
    let d4 = (b2 - b1).cross(a2 - b1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn rooms_overlap(a: &Room, b: &Room) -> bool {
    if a.polygon.len() < 3 || b.polygon.len() < 3 {
        return false;
    }
    a.contains(b.centroid())
        || b.contains(a.centroid())
        || a.edges().any(|(p, q)| b.edges().any(|(r, s)| segments_cross(p, q, r, s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    /// Empty square room with inner faces at ±half around the origin.
    pub(crate) fn square_room(half: f64, t: f64) -> Arena {
        let o = half + 0.5 * t;
        let p = Vec2::new;
        Arena::from_walls(vec![
            WallSegment::new(p(-o, -o), p(o, -o), t),
            WallSegment::new(p(o, -o), p(o, o), t),
            WallSegment::new(p(o, o), p(-o, o), t),
            WallSegment::new(p(-o, o), p(-o, -o), t),
        ])
    }

    #[test]
    fn default_arena_shape() {
        let a = build_standard_arena(&ArenaConfig::default()).unwrap();
        assert_eq!(a.rooms().len(), 4);
        assert_eq!(a.doorways().len(), 4);
        assert!(a.home().is_some());
        assert!(a.candle().is_none());
        assert_eq!(a.bounds(), Vec2::new(2.44, 2.44));
        assert!(a.validate().is_empty(), "{:?}", a.validate());
        for d in a.doorways() {
            assert!((d.width() - 0.46).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_thickness_rejected() {
        let cfg = ArenaConfig { wall_thickness: 0.0, ..Default::default() };
        assert!(matches!(build_standard_arena(&cfg), Err(ArenaError::InvalidConfig(_))));
    }

    #[test]
    fn narrow_door_rejected() {
        let cfg = ArenaConfig { door_width: 0.20, ..Default::default() };
        let err = build_standard_arena(&cfg).unwrap_err();
        assert!(err.to_string().contains("narrower than the robot"));
    }

    #[test]
    fn corridor_too_wide_rejected() {
        let cfg = ArenaConfig { corridor_width: 1.8, ..Default::default() };
        assert!(build_standard_arena(&cfg).is_err());
    }

    #[test]
    fn candle_placement_is_seeded() {
        let a = build_standard_arena(&ArenaConfig::default()).unwrap();
        let c1 = a.place_candle(1, 42).unwrap();
        let c2 = a.place_candle(1, 42).unwrap();
        assert_eq!(c1.candle(), c2.candle());
        let c3 = a.place_candle(1, 43).unwrap();
        assert_ne!(c1.candle(), c3.candle());
    }

    #[test]
    fn second_candle_rejected() {
        let a = build_standard_arena(&ArenaConfig::default()).unwrap().place_candle(1, 1).unwrap();
        assert_eq!(a.place_candle(2, 5).unwrap_err(), ArenaError::CandleAlreadyPlaced);
    }

    #[test]
    fn unknown_room_rejected() {
        let a = build_standard_arena(&ArenaConfig::default()).unwrap();
        assert_eq!(a.place_candle(5, 1).unwrap_err(), ArenaError::NoSuchRoom(5));
    }

    #[test]
    fn candle_rules_hold_over_many_seeds() {
        let a = build_standard_arena(&ArenaConfig::default()).unwrap();
        for room in 1..=4u8 {
            for seed in 0..1000u64 {
                let placed = a.place_candle(room, seed).unwrap();
                let c = placed.candle().unwrap();
                let door = a.doorways().iter().find(|d| d.room_id == room).unwrap();
                let dist = point_segment_distance(c.flame_position(), door.a, door.b);
                assert!(dist - c.marker.radius >= 0.0);
                assert!(dist >= 0.33);
                assert_eq!(a.room_at(c.flame_position()), Some(room));
                assert!(placed.validate().is_empty());
            }
        }
    }

    #[test]
    fn raycast_square_room() {
        let a = square_room(0.5, 0.02);
        let d = a.raycast(Vec2::ZERO, Vec2::new(1.0, 0.0), 2.0).unwrap().unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        let d = a.raycast(Vec2::ZERO, Vec2::from_angle(FRAC_PI_4), 2.0).unwrap().unwrap();
        assert!((d - 0.5 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn raycast_out_of_range_is_absent() {
        let a = square_room(0.5, 0.02);
        // 0.1 m from the +X wall, looking away from it.
        let r = a.raycast(Vec2::new(0.4, 0.0), Vec2::new(-1.0, 0.0), 0.05).unwrap();
        assert_eq!(r, None);
    }

    #[test]
    fn raycast_inside_wall_errors() {
        let a = square_room(0.5, 0.02);
        let r = a.raycast(Vec2::new(0.51, 0.0), Vec2::new(1.0, 0.0), 1.0);
        assert!(matches!(r, Err(ArenaError::OriginInsideWall { .. })));
    }

    #[test]
    fn raycast_rejects_unnormalized_direction() {
        let a = square_room(0.5, 0.02);
        assert_eq!(a.raycast(Vec2::ZERO, Vec2::new(2.0, 0.0), 1.0), Err(ArenaError::InvalidRay));
        assert_eq!(a.raycast(Vec2::ZERO, Vec2::new(1.0, 0.0), 0.0), Err(ArenaError::InvalidRay));
    }

    #[test]
    fn on_white_markers() {
        let a = build_standard_arena(&ArenaConfig::default()).unwrap();
        let d = a.doorways()[0];
        assert_eq!(a.on_white(d.midpoint()), Some(MarkerId::Doorway(d.room_id)));
        let h = *a.home().unwrap();
        assert_eq!(a.on_white(h.center), None);
        assert_eq!(a.on_white(h.center + Vec2::new(h.radius, 0.0)), Some(MarkerId::Home));
        assert_eq!(a.on_white(h.center + Vec2::new(0.0, -h.radius - 0.0124)), Some(MarkerId::Home));
        assert_eq!(a.on_white(h.center + Vec2::new(0.0, -h.radius - 0.0126)), None);
    }

    #[test]
    fn footprint_far_from_walls_and_inside_wall() {
        let a = square_room(0.5, 0.02);
        let fp = HalfExtents { length: 0.1, width: 0.12 };
        assert!(!a.footprint_collides(&Pose::new(0.0, 0.0, 0.3), fp));
        assert!(a.footprint_collides(&Pose::new(0.505, 0.0, 0.0), fp));
    }

    #[test]
    fn extinguish_requires_lit_candle() {
        let a = build_standard_arena(&ArenaConfig::default()).unwrap();
        assert_eq!(a.extinguished().unwrap_err(), ArenaError::NoLitCandle);
        let lit = a.place_candle(3, 9).unwrap();
        let out = lit.extinguished().unwrap();
        assert!(out.lit_candle().is_none());
        assert!(out.candle().is_some());
        assert_eq!(out.extinguished().unwrap_err(), ArenaError::NoLitCandle);
    }
}
