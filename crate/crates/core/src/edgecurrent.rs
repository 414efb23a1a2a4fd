//! Significant edge points and the virtual edge current.
//!
//! Edge points are pixels whose gradient magnitude exceeds a fraction of the
//! field maximum and that survive a pairwise non-maximum suppression. Each
//! surviving gradient is rotated by 90 degrees to give a current element
//! tangent to the edge line.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::gradient::{sobel_field_with, SobelOptions, VectorField};
use crate::raster::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeParams {
    /// Magnitude threshold as a fraction of the field maximum, in (0, 1).
    pub threshold_pct: f64,
    /// Require strictly larger magnitude than both neighbours of a pair.
    pub strict_nms: bool,
    pub sobel: SobelOptions,
}

impl Default for EdgeParams {
    fn default() -> Self {
        EdgeParams {
            threshold_pct: 0.20,
            strict_nms: false,
            sobel: SobelOptions::default(),
        }
    }
}

impl EdgeParams {
    pub fn validate(&self) -> Result<()> {
        if self.threshold_pct > 0.0 && self.threshold_pct < 1.0 {
            Ok(())
        } else {
            Err(Error::Param(format!(
                "threshold_pct must lie in (0, 1), got {}",
                self.threshold_pct
            )))
        }
    }
}

/// Boolean per-pixel edge mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl EdgeMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width.checked_mul(height) != Some(bits.len()) {
            return Err(Error::Param(format!(
                "{width}x{height} mask does not match {} entries",
                bits.len()
            )));
        }
        Ok(EdgeMask { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// 255 for edge pixels, 0 elsewhere.
    pub fn to_image(&self) -> Result<GrayImage> {
        GrayImage::new(
            self.width,
            self.height,
            self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        )
    }
}

/// One discrete current element at an integer pixel position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentElement {
    pub x: i64,
    pub y: i64,
    pub tx: f64,
    pub ty: f64,
}

/// A set of current elements, at most one per pixel, stored in row-major
/// extraction order. Every force sum iterates in this order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCurrent {
    width: usize,
    height: usize,
    elements: Vec<CurrentElement>,
}

impl EdgeCurrent {
    /// Validates bounds, uniqueness of positions, and non-zero vectors.
    /// Element order is kept as given.
    pub fn new(width: usize, height: usize, elements: Vec<CurrentElement>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Param(format!("current source {width}x{height} is empty")));
        }
        let mut seen = HashSet::with_capacity(elements.len());
        for e in &elements {
            if !(0..width as i64).contains(&e.x) || !(0..height as i64).contains(&e.y) {
                return Err(Error::Param(format!(
                    "element at ({}, {}) outside {width}x{height}",
                    e.x, e.y
                )));
            }
            if !seen.insert((e.x, e.y)) {
                return Err(Error::Param(format!("two elements at ({}, {})", e.x, e.y)));
            }
            if !(e.tx.is_finite() && e.ty.is_finite()) || (e.tx == 0.0 && e.ty == 0.0) {
                return Err(Error::Param(format!(
                    "element at ({}, {}) has degenerate vector ({}, {})",
                    e.x, e.y, e.tx, e.ty
                )));
            }
        }
        Ok(EdgeCurrent {
            width,
            height,
            elements,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn elements(&self) -> &[CurrentElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Multiplies every element vector by `a`.
    pub fn scaled(&self, a: f64) -> EdgeCurrent {
        EdgeCurrent {
            elements: self
                .elements
                .iter()
                .map(|e| CurrentElement {
                    tx: e.tx * a,
                    ty: e.ty * a,
                    ..*e
                })
                .collect(),
            ..self.clone()
        }
    }

    /// Moves every element by `(dx, dy)`; the source frame grows so the
    /// result stays in bounds. Intended for tests of translation covariance.
    pub fn translated(&self, dx: i64, dy: i64) -> Result<EdgeCurrent> {
        let elements: Vec<_> = self
            .elements
            .iter()
            .map(|e| CurrentElement {
                x: e.x + dx,
                y: e.y + dy,
                ..*e
            })
            .collect();
        if elements.iter().any(|e| e.x < 0 || e.y < 0) {
            return Err(Error::Param(format!("translation ({dx}, {dy}) leaves the frame")));
        }
        EdgeCurrent::new(
            self.width + dx.max(0) as usize,
            self.height + dy.max(0) as usize,
            elements,
        )
    }
}

/// Marks pixels whose magnitude is strictly above `threshold_pct` times the
/// field maximum.
pub fn threshold_mask(field: &VectorField, params: &EdgeParams) -> EdgeMask {
    let mags = field.magnitudes();
    let max = mags.iter().copied().fold(0.0, f64::max);
    let cut = params.threshold_pct * max;
    EdgeMask {
        width: field.width(),
        height: field.height(),
        bits: mags.iter().map(|&m| m > cut).collect(),
    }
}

/// Opposite-neighbour pairs: W/E, N/S, NW/SE, NE/SW.
const NMS_PAIRS: [((isize, isize), (isize, isize)); 4] = [
    ((-1, 0), (1, 0)),
    ((0, -1), (0, 1)),
    ((-1, -1), (1, 1)),
    ((1, -1), (-1, 1)),
];

/// Pairwise non-maximum suppression. A masked pixel is kept when it beats
/// both neighbours of at least two of the four opposite pairs. Neighbours
/// outside the image count as magnitude 0.
pub fn nms_mask(field: &VectorField, mask: &EdgeMask, params: &EdgeParams) -> Result<EdgeMask> {
    let (w, h) = (field.width(), field.height());
    if mask.width != w || mask.height != h {
        return Err(Error::Argument(format!(
            "mask {}x{} does not match field {w}x{h}",
            mask.width, mask.height
        )));
    }
    let mags = field.magnitudes();
    let mag = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mags[y as usize * w + x as usize]
        }
    };
    let beats = |a: f64, b: f64| if params.strict_nms { a > b } else { a >= b };
    let bits = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| {
            if !mask.get(x, y) {
                return false;
            }
            let (xi, yi) = (x as isize, y as isize);
            let m = mag(xi, yi);
            let wins = NMS_PAIRS
                .iter()
                .filter(|((ax, ay), (bx, by))| {
                    beats(m, mag(xi + ax, yi + ay)) && beats(m, mag(xi + bx, yi + by))
                })
                .count();
            wins >= 2
        })
        .collect();
    Ok(EdgeMask { width: w, height: h, bits })
}

/// Which way gradients are turned to become current elements.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Rotation {
    /// Visually counter-clockwise on screen (y down): `(gx, gy) -> (gy, -gx)`.
    #[default]
    CounterClockwise,
    /// The mirror convention: `(gx, gy) -> (-gy, gx)`.
    Clockwise,
}

impl Rotation {
    pub fn apply(self, gx: f64, gy: f64) -> (f64, f64) {
        match self {
            Rotation::CounterClockwise => (gy, -gx),
            Rotation::Clockwise => (-gy, gx),
        }
    }
}

/// Current built from a mask, plus the number of masked pixels dropped
/// because their gradient was zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltCurrent {
    pub current: EdgeCurrent,
    pub dropped_zero_gradient: usize,
}

pub fn build_current(field: &VectorField, mask: &EdgeMask) -> Result<BuiltCurrent> {
    build_current_with(field, mask, Rotation::default())
}

pub fn build_current_with(field: &VectorField, mask: &EdgeMask, rotation: Rotation) -> Result<BuiltCurrent> {
    if mask.width != field.width() || mask.height != field.height() {
        return Err(Error::Argument(format!(
            "mask {}x{} does not match field {}x{}",
            mask.width,
            mask.height,
            field.width(),
            field.height()
        )));
    }
    let mut elements = Vec::with_capacity(mask.count());
    let mut dropped = 0;
    for y in 0..field.height() {
        for x in 0..field.width() {
            if !mask.get(x, y) {
                continue;
            }
            let (gx, gy) = field.at(x, y);
            if gx == 0.0 && gy == 0.0 {
                dropped += 1;
                continue;
            }
            let (tx, ty) = rotation.apply(gx, gy);
            elements.push(CurrentElement {
                x: x as i64,
                y: y as i64,
                tx,
                ty,
            });
        }
    }
    Ok(BuiltCurrent {
        current: EdgeCurrent {
            width: field.width(),
            height: field.height(),
            elements,
        },
        dropped_zero_gradient: dropped,
    })
}

/// Intermediate products of edge extraction, kept for diagnostics output.
#[derive(Debug, Clone)]
pub struct EdgeExtraction {
    pub field: VectorField,
    pub thresholded: EdgeMask,
    pub mask: EdgeMask,
    pub current: EdgeCurrent,
    pub dropped_zero_gradient: usize,
}

/// Sobel, threshold, suppression, rotation.
pub fn extract(img: &GrayImage, params: &EdgeParams) -> Result<EdgeExtraction> {
    extract_with(img, params, Rotation::default())
}

pub fn extract_with(img: &GrayImage, params: &EdgeParams, rotation: Rotation) -> Result<EdgeExtraction> {
    params.validate()?;
    let field = sobel_field_with(img, params.sobel)?;
    let thresholded = threshold_mask(&field, params);
    let mask = nms_mask(&field, &thresholded, params)?;
    let built = build_current_with(&field, &mask, rotation)?;
    Ok(EdgeExtraction {
        field,
        thresholded,
        mask,
        current: built.current,
        dropped_zero_gradient: built.dropped_zero_gradient,
    })
}

/// Convenience wrapper returning only the current.
pub fn extract_current(img: &GrayImage, params: &EdgeParams) -> Result<EdgeCurrent> {
    extract(img, params).map(|e| e.current)
}
