//! Sobel gradient estimation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::GrayImage;

/// Per-pixel gradient, in intensity units per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    width: usize,
    height: usize,
    gx: Vec<f64>,
    gy: Vec<f64>,
}

impl VectorField {
    pub fn new(width: usize, height: usize, gx: Vec<f64>, gy: Vec<f64>) -> Result<Self> {
        let n = width.checked_mul(height);
        if width == 0 || height == 0 || n != Some(gx.len()) || n != Some(gy.len()) {
            return Err(Error::Param(format!(
                "{width}x{height} field does not match component lengths {} / {}",
                gx.len(),
                gy.len()
            )));
        }
        Ok(VectorField { width, height, gx, gy })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn gx(&self) -> &[f64] {
        &self.gx
    }

    pub fn gy(&self) -> &[f64] {
        &self.gy
    }

    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.gx[i], self.gy[i])
    }

    pub fn magnitude(&self, x: usize, y: usize) -> f64 {
        let (gx, gy) = self.at(x, y);
        gx.hypot(gy)
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.gx.iter().zip(&self.gy).map(|(x, y)| x.hypot(*y)).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SobelOptions {
    /// Apply a 3x3 binomial blur before differentiation. Off by default.
    pub smooth: bool,
}

/// Sobel gradient with replicate-edge padding. `gx` is positive where
/// intensity increases to the right, `gy` where it increases downward.
pub fn sobel_field(img: &GrayImage) -> Result<VectorField> {
    sobel_field_with(img, SobelOptions::default())
}

pub fn sobel_field_with(img: &GrayImage, opts: SobelOptions) -> Result<VectorField> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::TooSmall { width: w, height: h });
    }
    let mut src: Vec<f64> = img.pixels().iter().map(|&p| f64::from(p)).collect();
    if opts.smooth {
        src = convolve3(&src, w, h, |s| (s(-1, -1) + 2.0 * s(0, -1) + s(1, -1)
            + 2.0 * s(-1, 0) + 4.0 * s(0, 0) + 2.0 * s(1, 0)
            + s(-1, 1) + 2.0 * s(0, 1) + s(1, 1))
            / 16.0);
    }
    let gx = convolve3(&src, w, h, |s| {
        (s(1, -1) + 2.0 * s(1, 0) + s(1, 1)) - (s(-1, -1) + 2.0 * s(-1, 0) + s(-1, 1))
    });
    let gy = convolve3(&src, w, h, |s| {
        (s(-1, 1) + 2.0 * s(0, 1) + s(1, 1)) - (s(-1, -1) + 2.0 * s(0, -1) + s(1, -1))
    });
    VectorField::new(w, h, gx, gy)
}

/// Applies a 3x3 stencil with clamped (replicated) borders. The stencil gets
/// a sampler taking offsets in `-1..=1`.
fn convolve3<F>(src: &[f64], w: usize, h: usize, stencil: F) -> Vec<f64>
where
    F: Fn(&dyn Fn(isize, isize) -> f64) -> f64 + Sync,
{
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, v) in row.iter_mut().enumerate() {
            let sample = |dx: isize, dy: isize| {
                let sx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                let sy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                src[sy * w + sx]
            };
            *v = stencil(&sample);
        }
    });
    out
}
