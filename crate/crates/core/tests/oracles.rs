mod common;

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::Rng;

use ffsim::arena::{build_standard_arena, Arena, ArenaConfig, WallSegment};
use ffsim::geom::Vec2;
use ffsim::vehicle::{HalfExtents, Pose, VehicleParams};

use common::{inside_any_wall, rng};

/// Samples the robot rectangle on a 1 mm grid, edges included.
fn sampled_collision(a: &Arena, pose: &Pose, fp: HalfExtents) -> bool {
    let step = 1e-3;
    let (nl, nw) = ((2.0 * fp.length / step).ceil() as i64, (2.0 * fp.width / step).ceil() as i64);
    let (s, c) = pose.theta.sin_cos();
    (0..=nl).any(|i| {
        let lx = (-fp.length + i as f64 * step).min(fp.length);
        (0..=nw).any(|j| {
            let ly = (-fp.width + j as f64 * step).min(fp.width);
            inside_any_wall(a, Vec2::new(pose.x + lx * c - ly * s, pose.y + lx * s + ly * c))
        })
    })
}

fn grow(fp: HalfExtents, by: f64) -> HalfExtents {
    HalfExtents { length: fp.length + by, width: fp.width + by }
}

#[test]
fn footprint_matches_sampling_near_walls() {
    let a = build_standard_arena(&ArenaConfig::default()).unwrap();
    let fp = VehicleParams::default().footprint;
    let mut r = rng(11);
    let (mut hits, mut misses) = (0, 0);
    for i in 0..300 {
        // Bias poses toward walls so both answers show up.
        let w = a.walls()[r.gen_range(0..a.walls().len())];
        let t = r.gen_range(0.0..1.0);
        let base = Vec2::new(w.a.x + t * (w.b.x - w.a.x), w.a.y + t * (w.b.y - w.a.y));
        let off = r.gen_range(0.0..0.25);
        let dir = r.gen_range(-PI..PI);
        let pose = Pose::new(base.x + off * dir.cos(), base.y + off * dir.sin(), r.gen_range(-PI..PI));
        if a.footprint_collides(&pose, fp) {
            hits += 1;
            assert!(sampled_collision(&a, &pose, grow(fp, 2e-3)), "case {i}: {pose:?} reported but not sampled");
        } else {
            misses += 1;
            assert!(!sampled_collision(&a, &pose, grow(fp, -2e-3)), "case {i}: {pose:?} sampled but not reported");
        }
    }
    assert!(hits > 30 && misses > 30, "{hits} hits, {misses} misses");
}

#[test]
fn parallel_gap_of_one_millimetre() {
    let w = WallSegment::new(Vec2::new(0.0, 1.0), Vec2::new(2.0, 1.0), 0.013);
    let a = Arena::from_walls(vec![w]);
    let fp = VehicleParams::default().footprint;
    let face = 1.0 - 0.0065;
    for (gap, expect) in [(1e-3, false), (-1e-3, true)] {
        let pose = Pose::new(1.0, face - fp.width - gap, 0.0);
        assert_eq!(a.footprint_collides(&pose, fp), expect, "gap {gap}");
        assert_eq!(sampled_collision(&a, &pose, fp), expect, "sampled, gap {gap}");
    }
}

/// Distance from `p` to a wall's solid rectangle, from the segment
/// description alone.
fn wall_distance(w: &WallSegment, p: Vec2) -> f64 {
    let (dx, dy) = (w.b.x - w.a.x, w.b.y - w.a.y);
    let len = dx.hypot(dy);
    let (ux, uy) = (dx / len, dy / len);
    let (mx, my) = ((w.a.x + w.b.x) / 2.0, (w.a.y + w.b.y) / 2.0);
    let (px, py) = (p.x - mx, p.y - my);
    let along = (px * ux + py * uy).abs() - (len / 2.0 + w.thickness / 2.0);
    let across = (px * uy - py * ux).abs() - w.thickness / 2.0;
    along.max(0.0).hypot(across.max(0.0))
}

#[test]
fn every_room_reachable_from_home() {
    let a = build_standard_arena(&ArenaConfig::default()).unwrap();
    let fp = VehicleParams::default().footprint;
    let clearance = fp.length.max(fp.width);
    let cell = 0.01;
    let b = a.bounds();
    let (nx, ny) = ((b.x / cell).ceil() as usize + 1, (b.y / cell).ceil() as usize + 1);
    let center = |i: usize, j: usize| Vec2::new(i as f64 * cell, j as f64 * cell);
    let free: Vec<bool> = (0..nx * ny)
        .map(|k| {
            let p = center(k % nx, k / nx);
            a.walls().iter().all(|w| wall_distance(w, p) > clearance)
        })
        .collect();

    let home = a.home().unwrap().center;
    let start = ((home.x / cell).round() as usize, (home.y / cell).round() as usize);
    assert!(free[start.1 * nx + start.0]);
    let mut seen = vec![false; nx * ny];
    let mut queue = VecDeque::from([start]);
    seen[start.1 * nx + start.0] = true;
    while let Some((i, j)) = queue.pop_front() {
        let next = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
        for (u, v) in next {
            if u < nx && v < ny && free[v * nx + u] && !seen[v * nx + u] {
                seen[v * nx + u] = true;
                queue.push_back((u, v));
            }
        }
    }
    for room in a.rooms() {
        let reached = (0..nx * ny).any(|k| seen[k] && room.contains(center(k % nx, k / nx)));
        assert!(reached, "room {} unreachable", room.id);
    }
}
