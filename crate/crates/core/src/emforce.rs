//! Discrete magnetic interaction between two edge currents.
//!
//! Image 2 lies in the plane `z = 0`; image 1 lies in the parallel plane
//! `z = height_px`, displaced in-plane by a shift. For an element `T1` of
//! image 1 and `T2` of image 2 separated by `r = p1 - p2`, the pair force is
//!
//! ```text
//! F = A * T1 x (T2 x r) / |r|^3
//! ```
//!
//! With both vectors in-plane, `T2 x r = (t2y*h, -t2x*h, t2x*dy - t2y*dx)`,
//! and only its z component (the "z-field") reaches the in-plane part of
//! `F`: `(Fx, Fy) = (t1y, -t1x) * Bz`. That identity is what
//! [`force_map_fast`] exploits.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use rayon::prelude::*;

use crate::edgecurrent::{CurrentElement, EdgeCurrent};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn in_plane(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceParams {
    /// Overall force constant (absorbs the vacuum permeability factor).
    pub a: f64,
    /// Separation between the two image planes, in pixels.
    pub height_px: f64,
    /// Pairs closer than this contribute nothing.
    pub min_r: f64,
}

impl Default for ForceParams {
    fn default() -> Self {
        ForceParams {
            a: 1.0,
            height_px: 0.0,
            min_r: 1e-9,
        }
    }
}

impl ForceParams {
    pub fn with_height(height_px: f64) -> Self {
        ForceParams {
            height_px,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::Param(format!("A must be finite and > 0, got {}", self.a)));
        }
        if !(self.height_px.is_finite() && self.height_px >= 0.0) {
            return Err(Error::Param(format!(
                "height must be finite and >= 0, got {}",
                self.height_px
            )));
        }
        if !(self.min_r.is_finite() && self.min_r > 0.0) {
            return Err(Error::Param(format!("min_r must be finite and > 0, got {}", self.min_r)));
        }
        Ok(())
    }
}

/// Field of `t2` at in-plane offset `(dx, dy)` and height `h`, scaled by
/// `1 / |r|^3` but not yet by `A`. Returns `None` inside the `min_r` guard.
///
/// `A` is applied once to each public result rather than per term, so
/// rescaling `A` rescales every output by a single rounding and cannot
/// perturb the direction of near-zero sums.
#[inline]
fn field_term(t2x: f64, t2y: f64, dx: f64, dy: f64, params: &ForceParams) -> Option<Vec3> {
    let h = params.height_px;
    let r2 = dx * dx + dy * dy + h * h;
    let r = r2.sqrt();
    if r < params.min_r {
        return None;
    }
    let s = 1.0 / (r2 * r);
    Some(Vec3::new(t2y * h * s, -t2x * h * s, (t2x * dy - t2y * dx) * s))
}

#[inline]
fn lorentz(t1x: f64, t1y: f64, b: Vec3) -> Vec3 {
    Vec3::new(t1y * b.z, -t1x * b.z, t1x * b.y - t1y * b.x)
}

fn unit_pair(t1: &CurrentElement, t2: &CurrentElement, shift1: Vec2, params: &ForceParams) -> Vec3 {
    let dx = t1.x as f64 + shift1.x - t2.x as f64;
    let dy = t1.y as f64 + shift1.y - t2.y as f64;
    match field_term(t2.tx, t2.ty, dx, dy, params) {
        Some(b) => lorentz(t1.tx, t1.ty, b),
        None => Vec3::ZERO,
    }
}

fn unit_bz(c2: &EdgeCurrent, px: f64, py: f64, params: &ForceParams) -> f64 {
    c2.elements().iter().fold(0.0, |acc, e| {
        match field_term(e.tx, e.ty, px - e.x as f64, py - e.y as f64, params) {
            Some(b) => acc + b.z,
            None => acc,
        }
    })
}

fn unit_element(t1: &CurrentElement, c2: &EdgeCurrent, shift1: Vec2, params: &ForceParams) -> Vec3 {
    let mut f = Vec3::ZERO;
    for t2 in c2.elements() {
        f += unit_pair(t1, t2, shift1, params);
    }
    f
}

/// Force on `t1` (displaced by `shift1` and lifted to `height_px`) from `t2`.
pub fn pair_force(t1: &CurrentElement, t2: &CurrentElement, shift1: Vec2, params: &ForceParams) -> Vec3 {
    unit_pair(t1, t2, shift1, params) * params.a
}

/// z-component of the field of `c2` at in-plane point `(px, py)` on the
/// upper plane.
pub fn bz_at(c2: &EdgeCurrent, px: f64, py: f64, params: &ForceParams) -> f64 {
    unit_bz(c2, px, py, params) * params.a
}

/// Force on one element of image 1 from the whole current of image 2.
pub fn force_on_element(t1: &CurrentElement, c2: &EdgeCurrent, shift1: Vec2, params: &ForceParams) -> Vec3 {
    unit_element(t1, c2, shift1, params) * params.a
}

/// Total force on `c1`, displaced by `shift1`, from `c2`. With `A = 1` this
/// is bit-identical to summing [`force_on_element`] over `c1` in order.
pub fn total_force(c1: &EdgeCurrent, c2: &EdgeCurrent, shift1: Vec2, params: &ForceParams) -> Vec3 {
    let mut f = Vec3::ZERO;
    for t1 in c1.elements() {
        f += unit_element(t1, c2, shift1, params);
    }
    f * params.a
}

/// In-plane total force for every placement of image 1's centre over image
/// 2's frame.
///
/// Cell `(x, y)` holds the force for shift `(x - ox, y - oy)`, where the
/// origin `(ox, oy) = (W/2, H/2)` (floored) is image 2's centre.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceMap {
    width: usize,
    height: usize,
    origin: (usize, usize),
    cells: Vec<Vec2>,
}

impl ForceMap {
    /// Map with the default centre origin.
    pub fn new(width: usize, height: usize, cells: Vec<Vec2>) -> Result<Self> {
        ForceMap::with_origin(width, height, (width / 2, height / 2), cells)
    }

    pub fn with_origin(width: usize, height: usize, origin: (usize, usize), cells: Vec<Vec2>) -> Result<Self> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(cells.len()) {
            return Err(Error::Param(format!(
                "{width}x{height} map does not match {} cells",
                cells.len()
            )));
        }
        if origin.0 >= width || origin.1 >= height {
            return Err(Error::Param(format!(
                "origin {origin:?} outside {width}x{height} map"
            )));
        }
        Ok(ForceMap {
            width,
            height,
            origin,
            cells,
        })
    }

    /// Builds a map by evaluating `f(x, y)` per cell.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> Vec2) -> Result<Self> {
        let cells = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        ForceMap::new(width, height, cells)
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

    pub fn cells(&self) -> &[Vec2] {
        &self.cells
    }

    pub fn get(&self, x: usize, y: usize) -> Vec2 {
        self.cells[y * self.width + x]
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// Shift applied to image 1 at cell `(x, y)`.
    pub fn shift_of(&self, x: usize, y: usize) -> (i64, i64) {
        (
            x as i64 - self.origin.0 as i64,
            y as i64 - self.origin.1 as i64,
        )
    }
}

fn check_map_inputs(c1: &EdgeCurrent, c2: &EdgeCurrent, params: &ForceParams) -> Result<()> {
    params.validate()?;
    if c1.is_empty() {
        return Err(Error::EmptyCurrent("image 1"));
    }
    if c2.is_empty() {
        return Err(Error::EmptyCurrent("image 2"));
    }
    Ok(())
}

/// Reference force map: one full double sum per cell. Cells are evaluated in
/// parallel; each cell's summation order is fixed.
pub fn force_map(c1: &EdgeCurrent, c2: &EdgeCurrent, params: &ForceParams) -> Result<ForceMap> {
    check_map_inputs(c1, c2, params)?;
    let (w, h) = (c2.width(), c2.height());
    let (ox, oy) = ((w / 2) as i64, (h / 2) as i64);
    let cells = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let shift = Vec2::new((i % w) as f64 - ox as f64, (i / w) as f64 - oy as f64);
            total_force(c1, c2, shift, params).in_plane()
        })
        .collect();
    ForceMap::new(w, h, cells)
}

/// z-field of a current (before scaling by `A`) sampled on an integer lattice.
struct FieldLattice {
    x0: i64,
    y0: i64,
    width: usize,
    values: Vec<f64>,
}

impl FieldLattice {
    fn build(c2: &EdgeCurrent, x0: i64, y0: i64, width: usize, height: usize, params: &ForceParams) -> Self {
        let values = (0..width * height)
            .into_par_iter()
            .map(|i| {
                let px = x0 + (i % width) as i64;
                let py = y0 + (i / width) as i64;
                unit_bz(c2, px as f64, py as f64, params)
            })
            .collect();
        FieldLattice { x0, y0, width, values }
    }

    #[inline]
    fn at(&self, x: i64, y: i64) -> f64 {
        self.values[(y - self.y0) as usize * self.width + (x - self.x0) as usize]
    }
}

/// Force map via a precomputed z-field lattice.
///
/// Every position an image-1 element can occupy under some map shift is an
/// integer lattice point, so the field of `c2` is evaluated once per lattice
/// point and each cell then costs one pass over `c1`.
pub fn force_map_fast(c1: &EdgeCurrent, c2: &EdgeCurrent, params: &ForceParams) -> Result<ForceMap> {
    check_map_inputs(c1, c2, params)?;
    let (w, h) = (c2.width(), c2.height());
    let (ox, oy) = ((w / 2) as i64, (h / 2) as i64);

    let xs = c1.elements().iter().map(|e| e.x);
    let ys = c1.elements().iter().map(|e| e.y);
    let (min_x, max_x) = (xs.clone().min().unwrap(), xs.max().unwrap());
    let (min_y, max_y) = (ys.clone().min().unwrap(), ys.max().unwrap());
    let x0 = min_x - ox;
    let y0 = min_y - oy;
    let lw = (max_x - min_x) as usize + w;
    let lh = (max_y - min_y) as usize + h;
    let lattice = FieldLattice::build(c2, x0, y0, lw, lh, params);

    let cells = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let sx = (i % w) as i64 - ox;
            let sy = (i / w) as i64 - oy;
            let mut f = Vec2::ZERO;
            for t1 in c1.elements() {
                let bz = lattice.at(t1.x + sx, t1.y + sy);
                f += Vec2::new(t1.ty * bz, -t1.tx * bz);
            }
            f * params.a
        })
        .collect();
    ForceMap::new(w, h, cells)
}
