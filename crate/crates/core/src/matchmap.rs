//! Force-guided stepping over a force map, basin classification, and the
//! iterative matcher.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use rayon::prelude::*;

pub use crate::emforce::ForceMap;
use crate::edgecurrent::{extract_current, EdgeCurrent, EdgeParams};
use crate::emforce::{total_force, ForceParams, Vec2};
use crate::error::{Error, Result};
use crate::raster::GrayImage;

/// Forces weaker than this have no direction.
pub const BALANCE_EPS: f64 = 1e-12;

/// Compass direction in screen coordinates (north is `-y`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction8 {
    E,
    SE,
    S,
    SW,
    W,
    NW,
    N,
    NE,
}

impl Direction8 {
    /// In order of increasing `atan2(y, x)`.
    pub const ALL: [Direction8; 8] = [
        Direction8::E,
        Direction8::SE,
        Direction8::S,
        Direction8::SW,
        Direction8::W,
        Direction8::NW,
        Direction8::N,
        Direction8::NE,
    ];

    /// One grid step; diagonals move one pixel on both axes.
    pub fn step(self) -> (i64, i64) {
        match self {
            Direction8::E => (1, 0),
            Direction8::SE => (1, 1),
            Direction8::S => (0, 1),
            Direction8::SW => (-1, 1),
            Direction8::W => (-1, 0),
            Direction8::NW => (-1, -1),
            Direction8::N => (0, -1),
            Direction8::NE => (1, -1),
        }
    }
}

/// Maps a vector to one of eight 45-degree sectors, `None` when it is
/// shorter than [`BALANCE_EPS`]. East covers `[-22.5, 22.5)` degrees of
/// `atan2(y, x)`; each boundary belongs to the sector at the larger angle.
pub fn discretize8(v: Vec2) -> Option<Direction8> {
    let n = v.norm();
    if n.is_nan() || n < BALANCE_EPS {
        return None;
    }
    let theta = v.y.atan2(v.x);
    let sector = ((theta + FRAC_PI_8) / FRAC_PI_4).floor() as i64;
    Some(Direction8::ALL[sector.rem_euclid(8) as usize])
}

/// Integer grid position. For match traces this is the position of image
/// 1's centre in image 2's frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPos {
    pub x: i64,
    pub y: i64,
}

impl GridPos {
    pub const fn new(x: i64, y: i64) -> Self {
        GridPos { x, y }
    }

    fn stepped(self, d: Direction8) -> GridPos {
        let (dx, dy) = d.step();
        GridPos::new(self.x + dx, self.y + dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathStatus {
    ArrivedAtOrigin,
    BalanceOscillation,
    OutOfBounds,
    StepLimit,
}

/// Visited in-bounds positions plus how the walk ended. For `OutOfBounds`
/// the terminal is the first position outside the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTrace {
    pub positions: Vec<GridPos>,
    pub status: PathStatus,
    pub terminal: GridPos,
}

impl PathTrace {
    /// Number of moves made.
    pub fn steps(&self) -> usize {
        self.positions.len() - 1 + usize::from(self.status == PathStatus::OutOfBounds)
    }
}

/// Shared stepping state machine. `force_at` returns the in-plane force at
/// a position known to be inside the domain.
fn walk(
    start: GridPos,
    in_domain: impl Fn(GridPos) -> bool,
    mut force_at: impl FnMut(GridPos) -> Vec2,
    stop_at: Option<GridPos>,
    max_steps: usize,
) -> PathTrace {
    let mut positions = vec![start];
    let mut forces = vec![force_at(start)];
    let finish = |positions: Vec<GridPos>, status, terminal| PathTrace {
        positions,
        status,
        terminal,
    };
    loop {
        let n = positions.len();
        let here = positions[n - 1];
        let Some(dir) = discretize8(forces[n - 1]) else {
            return finish(positions, PathStatus::BalanceOscillation, here);
        };
        // n - 1 moves made so far.
        if n > max_steps {
            return finish(positions, PathStatus::StepLimit, here);
        }
        let next = here.stepped(dir);
        if !in_domain(next) {
            return finish(positions, PathStatus::OutOfBounds, next);
        }
        if stop_at == Some(next) {
            positions.push(next);
            return finish(positions, PathStatus::ArrivedAtOrigin, next);
        }
        if n >= 2 && positions[n - 2] == next {
            // Period-2 swing; settle on the weaker-force member, the earlier
            // one on ties.
            let (earlier, later) = (forces[n - 2].norm(), forces[n - 1].norm());
            let terminal = if later < earlier { here } else { next };
            return finish(positions, PathStatus::BalanceOscillation, terminal);
        }
        forces.push(force_at(next));
        positions.push(next);
    }
}

/// Default step budget: four times the number of map cells.
pub fn default_max_steps(width: usize, height: usize) -> usize {
    4 * width * height
}

/// Walks the map from `start` following the discretized cell forces.
pub fn follow_path(map: &ForceMap, start: GridPos, stop_at_origin: bool, max_steps: usize) -> Result<PathTrace> {
    if !map.contains(start.x, start.y) {
        return Err(Error::Argument(format!(
            "start ({}, {}) outside {}x{} map",
            start.x,
            start.y,
            map.width(),
            map.height()
        )));
    }
    if max_steps == 0 {
        return Err(Error::Argument("max_steps must be at least 1".into()));
    }
    let (ox, oy) = map.origin();
    let origin = GridPos::new(ox as i64, oy as i64);
    Ok(walk(
        start,
        |p| map.contains(p.x, p.y),
        |p| map.get(p.x as usize, p.y as usize),
        stop_at_origin.then_some(origin),
        max_steps,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointClass {
    Convergence,
    Divergence,
    LocallyTrapped,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationMap {
    width: usize,
    height: usize,
    origin: (usize, usize),
    labels: Vec<PointClass>,
}

impl ClassificationMap {
    pub fn new(width: usize, height: usize, origin: (usize, usize), labels: Vec<PointClass>) -> Result<Self> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(labels.len()) {
            return Err(Error::Param(format!(
                "{width}x{height} classification does not match {} labels",
                labels.len()
            )));
        }
        if origin.0 >= width || origin.1 >= height {
            return Err(Error::Param(format!("origin {origin:?} outside {width}x{height}")));
        }
        Ok(ClassificationMap {
            width,
            height,
            origin,
            labels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    pub fn labels(&self) -> &[PointClass] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> PointClass {
        self.labels[y * self.width + x]
    }
}

/// Whether a walk started at the origin settles there at once: zero force,
/// or an immediate swing between the origin and one neighbour.
pub fn origin_is_balance(map: &ForceMap, max_steps: usize) -> Result<bool> {
    let (ox, oy) = map.origin();
    let trace = follow_path(map, GridPos::new(ox as i64, oy as i64), false, max_steps)?;
    Ok(trace.status == PathStatus::BalanceOscillation && trace.positions.len() <= 2)
}

/// Labels each start cell by where its walk ends.
///
/// When the origin is a balance point, reaching it ends the walk as
/// Convergence. Otherwise walks pass through the origin like any other cell
/// and only a balance settling on the origin counts as Convergence.
pub fn classify_map(map: &ForceMap, max_steps: usize) -> Result<ClassificationMap> {
    if max_steps == 0 {
        return Err(Error::Argument("max_steps must be at least 1".into()));
    }
    let (w, h) = (map.width(), map.height());
    let (ox, oy) = map.origin();
    let origin = GridPos::new(ox as i64, oy as i64);
    let stop_at_origin = origin_is_balance(map, max_steps)?;
    let labels = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let start = GridPos::new((i % w) as i64, (i / w) as i64);
            let trace = follow_path(map, start, stop_at_origin, max_steps).expect("start is in bounds");
            match trace.status {
                PathStatus::ArrivedAtOrigin => PointClass::Convergence,
                PathStatus::BalanceOscillation if trace.terminal == origin => PointClass::Convergence,
                PathStatus::OutOfBounds => PointClass::Divergence,
                PathStatus::BalanceOscillation | PathStatus::StepLimit => PointClass::LocallyTrapped,
            }
        })
        .collect();
    ClassificationMap::new(w, h, (ox, oy), labels)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub convergence: usize,
    pub divergence: usize,
    pub trapped: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.convergence + self.divergence + self.trapped
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "convergence": self.convergence,
            "divergence": self.divergence,
            "trapped": self.trapped,
        })
    }
}

pub fn summarize_map(cls: &ClassificationMap) -> ClassCounts {
    cls.labels.iter().fold(ClassCounts::default(), |mut c, l| {
        match l {
            PointClass::Convergence => c.convergence += 1,
            PointClass::Divergence => c.divergence += 1,
            PointClass::LocallyTrapped => c.trapped += 1,
        }
        c
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchStatus {
    Matched,
    Diverged,
    Trapped,
}

impl MatchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchStatus::Matched => "Matched",
            MatchStatus::Diverged => "Diverged",
            MatchStatus::Trapped => "Trapped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    /// Displacement of image 1's content relative to image 2.
    pub detected_shift: (i64, i64),
    pub status: MatchStatus,
    pub steps: usize,
    /// Image 1's centre in image 2's frame, per iteration.
    pub path: PathTrace,
}

impl MatchResult {
    /// `{"detected_shift":[dx,dy],"status":..,"steps":..,"path":[[x,y],..]}`
    pub fn to_json(&self) -> serde_json::Value {
        let path: Vec<[i64; 2]> = self.path.positions.iter().map(|p| [p.x, p.y]).collect();
        serde_json::json!({
            "detected_shift": [self.detected_shift.0, self.detected_shift.1],
            "status": self.status.as_str(),
            "steps": self.steps,
            "path": path,
        })
    }
}

/// Moves image 1 over image 2 one grid step at a time along the total
/// force until it balances, leaves image 2's frame, or runs out of steps.
///
/// `start_offset` is image 1's initial displacement. The walk runs on the
/// translation `t` applied to `c1`; the reported shift is `-t` at the end.
pub fn match_currents(
    c1: &EdgeCurrent,
    c2: &EdgeCurrent,
    force_params: &ForceParams,
    start_offset: (i64, i64),
    max_steps: usize,
) -> Result<MatchResult> {
    force_params.validate()?;
    if c1.is_empty() {
        return Err(Error::EmptyCurrent("image 1"));
    }
    if c2.is_empty() {
        return Err(Error::EmptyCurrent("image 2"));
    }
    if max_steps == 0 {
        return Err(Error::Argument("max_steps must be at least 1".into()));
    }
    let (w, h) = (c2.width() as i64, c2.height() as i64);
    let origin = GridPos::new(w / 2, h / 2);
    let in_domain = |p: GridPos| p.x >= 0 && p.y >= 0 && p.x < w && p.y < h;
    let start = GridPos::new(origin.x + start_offset.0, origin.y + start_offset.1);
    if !in_domain(start) {
        return Err(Error::Argument(format!(
            "start offset {start_offset:?} puts image 1's centre outside the {w}x{h} frame"
        )));
    }
    let trace = walk(
        start,
        in_domain,
        |p| {
            let t = Vec2::new((p.x - origin.x) as f64, (p.y - origin.y) as f64);
            total_force(c1, c2, t, force_params).in_plane()
        },
        None,
        max_steps,
    );
    let status = match trace.status {
        PathStatus::BalanceOscillation | PathStatus::ArrivedAtOrigin => MatchStatus::Matched,
        PathStatus::OutOfBounds => MatchStatus::Diverged,
        PathStatus::StepLimit => MatchStatus::Trapped,
    };
    Ok(MatchResult {
        detected_shift: (origin.x - trace.terminal.x, origin.y - trace.terminal.y),
        status,
        steps: trace.steps(),
        path: trace,
    })
}

/// Extracts both edge currents once and runs [`match_currents`].
pub fn match_images(
    img1: &GrayImage,
    img2: &GrayImage,
    edge_params: &EdgeParams,
    force_params: &ForceParams,
    start_offset: (i64, i64),
    max_steps: usize,
) -> Result<MatchResult> {
    let c1 = extract_current(img1, edge_params)?;
    let c2 = extract_current(img2, edge_params)?;
    match_currents(&c1, &c2, force_params, start_offset, max_steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radial(w: usize, h: usize) -> ForceMap {
        let (ox, oy) = ((w / 2) as f64, (h / 2) as f64);
        ForceMap::from_fn(w, h, |x, y| Vec2::new(ox - x as f64, oy - y as f64)).unwrap()
    }

    fn uniform(w: usize, h: usize, v: Vec2) -> ForceMap {
        ForceMap::from_fn(w, h, |_, _| v).unwrap()
    }

    #[test]
    fn discretize_examples() {
        assert_eq!(discretize8(Vec2::new(1.0, 0.0)), Some(Direction8::E));
        assert_eq!(discretize8(Vec2::new(1.0, 1.0)), Some(Direction8::SE));
        assert_eq!(discretize8(Vec2::new(0.0, 0.0)), None);
        let b = 22.5f64.to_radians();
        assert_eq!(discretize8(Vec2::new(b.cos(), b.sin())), Some(Direction8::SE));
    }

    #[test]
    fn discretize_all_axes() {
        let cases = [
            ((0.0, 1.0), Direction8::S),
            ((-1.0, 1.0), Direction8::SW),
            ((-1.0, 0.0), Direction8::W),
            ((-1.0, -0.0), Direction8::W),
            ((-1.0, -1.0), Direction8::NW),
            ((0.0, -1.0), Direction8::N),
            ((1.0, -1.0), Direction8::NE),
            ((1.0, -0.4), Direction8::E),
            ((1.0, -0.42), Direction8::NE),
        ];
        for ((x, y), d) in cases {
            assert_eq!(discretize8(Vec2::new(x, y)), Some(d), "({x}, {y})");
        }
        assert_eq!(discretize8(Vec2::new(1e-13, 0.0)), None);
        assert_eq!(discretize8(Vec2::new(f64::NAN, 0.0)), None);
    }

    #[test]
    fn discretize_ignores_scale() {
        for k in 0..64 {
            let a = k as f64 * 0.1 + 0.05;
            let v = Vec2::new(a.cos(), a.sin());
            let d = discretize8(v);
            for s in [1e-6, 0.5, 3.0, 1e9] {
                assert_eq!(discretize8(v * s), d);
            }
        }
    }

    #[test]
    fn radial_map_converges_everywhere() {
        let m = radial(9, 8);
        for y in 0..8 {
            for x in 0..9 {
                let t = follow_path(&m, GridPos::new(x, y), true, 100).unwrap();
                if (x, y) == (4, 4) {
                    assert_eq!(t.status, PathStatus::BalanceOscillation);
                } else {
                    assert_eq!(t.status, PathStatus::ArrivedAtOrigin);
                }
                assert_eq!(t.terminal, GridPos::new(4, 4));
            }
        }
        let cls = classify_map(&m, 100).unwrap();
        assert!(cls.labels().iter().all(|&l| l == PointClass::Convergence));
    }

    #[test]
    fn uniform_east_leaves_through_east_border() {
        let m = uniform(5, 4, Vec2::new(1.0, 0.0));
        let t = follow_path(&m, GridPos::new(1, 2), false, 100).unwrap();
        assert_eq!(t.status, PathStatus::OutOfBounds);
        assert_eq!(t.terminal, GridPos::new(5, 2));
        assert_eq!(t.positions.len(), 4);
        assert_eq!(t.steps(), 4);
        // The origin is not a balance point, so passing over it does not
        // count as arriving.
        assert!(!origin_is_balance(&m, 100).unwrap());
        let cls = classify_map(&m, 100).unwrap();
        assert!(cls.labels().iter().all(|&l| l == PointClass::Divergence));
    }

    #[test]
    fn mutual_pair_oscillates_on_weaker_member() {
        // (0,0) points east at strength 2, (1,0) points west at strength 1.
        let m = ForceMap::with_origin(
            3,
            3,
            (2, 2),
            (0..9)
                .map(|i| match i {
                    0 => Vec2::new(2.0, 0.0),
                    1 => Vec2::new(-1.0, 0.0),
                    8 => Vec2::ZERO,
                    _ => Vec2::new(0.0, 1.0),
                })
                .collect(),
        )
        .unwrap();
        let t = follow_path(&m, GridPos::new(0, 0), true, 50).unwrap();
        assert_eq!(t.status, PathStatus::BalanceOscillation);
        assert_eq!(t.positions, vec![GridPos::new(0, 0), GridPos::new(1, 0)]);
        assert_eq!(t.terminal, GridPos::new(1, 0));
        let cls = classify_map(&m, 50).unwrap();
        assert_eq!(cls.get(0, 0), PointClass::LocallyTrapped);
        assert_eq!(cls.get(1, 0), PointClass::LocallyTrapped);
        assert_eq!(cls.get(2, 1), PointClass::Convergence);
    }

    #[test]
    fn oscillation_tie_goes_to_earlier_cell() {
        let m = ForceMap::from_fn(2, 1, |x, _| Vec2::new(if x == 0 { 1.0 } else { -1.0 }, 0.0)).unwrap();
        let t = follow_path(&m, GridPos::new(1, 0), false, 10).unwrap();
        assert_eq!(t.terminal, GridPos::new(1, 0));
    }

    #[test]
    fn step_limit_on_long_cycle() {
        // 2x2 rotation: E, S, W, N around a square.
        let m = ForceMap::with_origin(
            3,
            3,
            (2, 2),
            vec![
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(0.0, -1.0),
                Vec2::new(-1.0, 0.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(0.0, 1.0),
                Vec2::ZERO,
            ],
        )
        .unwrap();
        let t = follow_path(&m, GridPos::new(0, 0), true, 10).unwrap();
        assert_eq!(t.status, PathStatus::StepLimit);
        assert_eq!(t.steps(), 10);
        assert_eq!(classify_map(&m, 10).unwrap().get(0, 0), PointClass::LocallyTrapped);
    }

    #[test]
    fn path_moves_are_neighbour_steps() {
        let m = ForceMap::from_fn(12, 10, |x, y| {
            Vec2::new(((x * 7 + y * 3) % 5) as f64 - 2.0, ((x * 2 + y * 5) % 7) as f64 - 3.0)
        })
        .unwrap();
        for y in 0..10 {
            for x in 0..12 {
                let t = follow_path(&m, GridPos::new(x, y), false, 500).unwrap();
                for pair in t.positions.windows(2) {
                    let (dx, dy) = (pair[1].x - pair[0].x, pair[1].y - pair[0].y);
                    assert!(dx.abs() <= 1 && dy.abs() <= 1 && (dx, dy) != (0, 0));
                }
            }
        }
    }

    #[test]
    fn bad_start_rejected() {
        let m = radial(4, 4);
        assert!(follow_path(&m, GridPos::new(4, 0), true, 10).is_err());
        assert!(follow_path(&m, GridPos::new(0, -1), true, 10).is_err());
        assert!(follow_path(&m, GridPos::new(0, 0), true, 0).is_err());
    }

    #[test]
    fn summary_counts() {
        let cls = classify_map(&radial(4, 4), 64).unwrap();
        assert_eq!(
            summarize_map(&cls),
            ClassCounts { convergence: 16, divergence: 0, trapped: 0 }
        );
        let mixed = ClassificationMap::new(
            3,
            1,
            (1, 0),
            vec![PointClass::Divergence, PointClass::Convergence, PointClass::LocallyTrapped],
        )
        .unwrap();
        let c = summarize_map(&mixed);
        assert_eq!((c.convergence, c.divergence, c.trapped, c.total()), (1, 1, 1, 3));
    }

    #[test]
    fn match_json_shape() {
        let r = MatchResult {
            detected_shift: (5, -4),
            status: MatchStatus::Matched,
            steps: 2,
            path: PathTrace {
                positions: vec![GridPos::new(16, 16), GridPos::new(15, 17), GridPos::new(14, 18)],
                status: PathStatus::BalanceOscillation,
                terminal: GridPos::new(11, 20),
            },
        };
        assert_eq!(
            r.to_json().to_string(),
            r#"{"detected_shift":[5,-4],"status":"Matched","steps":2,"path":[[16,16],[15,17],[14,18]]}"#
        );
    }
}
