//! Grayscale rasters, Netpbm input/output, and synthetic test shapes.
//!
//! Coordinates are screen coordinates: `x` grows to the right, `y` grows
//! downward, origin at the top-left pixel. Pixel `(x, y)` covers the unit
//! square `[x, x+1) x [y, y+1)`, so its centre sits at `(x + 0.5, y + 0.5)`.

use crate::error::{Error, Result};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Param(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::Param("image dimensions overflow".into()))?;
        if pixels.len() != expected {
            return Err(Error::Param(format!(
                "{width}x{height} image needs {expected} pixels, got {}",
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayImage::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Moves the content by `(dx, dy)`; uncovered pixels become 0.
    pub fn translated(&self, dx: i64, dy: i64) -> GrayImage {
        let (w, h) = (self.width as i64, self.height as i64);
        let pixels = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x - dx, y - dy)))
            .map(|(sx, sy)| {
                if (0..w).contains(&sx) && (0..h).contains(&sy) {
                    self.pixels[(sy * w + sx) as usize]
                } else {
                    0
                }
            })
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    /// Left-right mirror.
    pub fn mirrored_horizontal(&self) -> GrayImage {
        let pixels = self
            .pixels
            .chunks_exact(self.width)
            .flat_map(|row| row.iter().rev().copied())
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    /// Top-bottom mirror.
    pub fn mirrored_vertical(&self) -> GrayImage {
        let pixels = self
            .pixels
            .chunks_exact(self.width)
            .rev()
            .flatten()
            .copied()
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    pub fn transposed(&self) -> GrayImage {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for x in 0..self.width {
            for y in 0..self.height {
                pixels.push(self.get(x, y));
            }
        }
        GrayImage {
            width: self.height,
            height: self.width,
            pixels,
        }
    }
}

/// 8-bit RGB raster, used only as an output carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(pixels.len()) {
            return Err(Error::Param(format!(
                "{width}x{height} color raster does not match {} pixels",
                pixels.len()
            )));
        }
        Ok(RgbImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }
}

// ---------------------------------------------------------------------------
// PGM / PPM
// ---------------------------------------------------------------------------

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.data.get(self.pos).copied()
    }

    /// Skips whitespace and `#` comments running to end of line.
    fn skip_separators(&mut self) {
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Parses a decimal token, returning it with its starting offset.
    fn number(&mut self, what: &str) -> Result<(u64, usize)> {
        self.skip_separators();
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(b) = self.peek().filter(u8::is_ascii_digit) {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u64::from(b - b'0')))
                .ok_or_else(|| Error::format(start, format!("{what} overflows")))?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(match self.peek() {
                None => Error::format(start, format!("unexpected end of data, expected {what}")),
                Some(_) => Error::format(start, format!("expected decimal {what}")),
            });
        }
        Ok((value, start))
    }
}

/// Decodes a binary (`P5`) or ASCII (`P2`) PGM with maxval at most 255.
///
/// Sample values are returned as stored; they are not rescaled when
/// maxval is below 255.
pub fn load_pgm(data: &[u8]) -> Result<GrayImage> {
    let binary = match data.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        Some(m) if m[0] == b'P' => {
            return Err(Error::format(0, format!("unsupported Netpbm magic {:?}", String::from_utf8_lossy(m))))
        }
        _ => return Err(Error::format(0, "missing PGM magic")),
    };
    let mut cur = Cursor { data, pos: 2 };
    match cur.peek() {
        Some(b) if b.is_ascii_whitespace() || b == b'#' => {}
        None => return Err(Error::format(2, "unexpected end of data after magic")),
        Some(_) => return Err(Error::format(2, "magic must be followed by whitespace")),
    }

    let (width, width_at) = cur.number("width")?;
    let (height, height_at) = cur.number("height")?;
    let (maxval, maxval_at) = cur.number("maxval")?;
    if width == 0 {
        return Err(Error::format(width_at, "width must be positive"));
    }
    if height == 0 {
        return Err(Error::format(height_at, "height must be positive"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(maxval_at, format!("maxval {maxval} outside 1..=255")));
    }
    let count = usize::try_from(width)
        .ok()
        .zip(usize::try_from(height).ok())
        .and_then(|(w, h)| w.checked_mul(h))
        .ok_or_else(|| Error::format(width_at, "image dimensions overflow"))?;
    let (width, height) = (width as usize, height as usize);

    let pixels = if binary {
        // Exactly one whitespace byte separates the header from the raster.
        match cur.peek() {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            None => return Err(Error::format(cur.pos, "truncated payload: missing raster")),
            Some(_) => return Err(Error::format(cur.pos, "expected whitespace after maxval")),
        }
        let payload = &data[cur.pos..];
        if payload.len() < count {
            return Err(Error::format(
                data.len(),
                format!("truncated payload: need {count} samples, found {}", payload.len()),
            ));
        }
        let pixels = payload[..count].to_vec();
        if let Some(i) = pixels.iter().position(|&p| u64::from(p) > maxval) {
            return Err(Error::format(cur.pos + i, format!("sample exceeds maxval {maxval}")));
        }
        pixels
    } else {
        let mut pixels = Vec::with_capacity(count.min(data.len()));
        for _ in 0..count {
            let (v, at) = cur.number("sample").map_err(|e| match e {
                Error::Format { offset, reason } if offset >= data.len() => Error::format(
                    offset,
                    format!("truncated payload: {reason}"),
                ),
                other => other,
            })?;
            if v > maxval {
                return Err(Error::format(at, format!("sample {v} exceeds maxval {maxval}")));
            }
            pixels.push(v as u8);
        }
        pixels
    };
    GrayImage::new(width, height, pixels)
}

/// Encodes as binary PGM (`P5`, maxval 255, no comments).
pub fn save_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

/// Encodes as binary PPM (`P6`, maxval 255).
pub fn save_ppm(rgb: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", rgb.width, rgb.height).into_bytes();
    out.extend(rgb.pixels.iter().flatten());
    out
}

// ---------------------------------------------------------------------------
// Synthetic shapes
// ---------------------------------------------------------------------------

/// Filled test shapes. Sizes are in pixels; all shapes are centred on the
/// placement point given to [`synth_shape_at`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Square { side: f64 },
    Rectangle { width: f64, height: f64 },
    Ellipse { rx: f64, ry: f64 },
    Circle { radius: f64 },
    /// Thick straight segment; `angle_deg` measured from +x toward +y.
    Line { length: f64, thickness: f64, angle_deg: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Square,
    Rectangle,
    Ellipse,
    Circle,
    Line,
}

impl Shape {
    /// Default geometry for a `width` x `height` canvas. On 32x32 this gives
    /// a 12 px square, a 16x8 rectangle, a (10, 6) ellipse, a radius-8 circle
    /// and a horizontal 16x2 line.
    pub fn default_for(kind: ShapeKind, width: usize, height: usize) -> Shape {
        let (w, h) = (width as f64, height as f64);
        let m = w.min(h);
        match kind {
            ShapeKind::Square => Shape::Square {
                side: round_with_parity(m * 3.0 / 8.0, width.min(height)),
            },
            ShapeKind::Rectangle => Shape::Rectangle {
                width: round_with_parity(w / 2.0, width),
                height: round_with_parity(h / 4.0, height),
            },
            ShapeKind::Ellipse => Shape::Ellipse {
                rx: (w * 5.0 / 16.0).round(),
                ry: (h * 3.0 / 16.0).round(),
            },
            ShapeKind::Circle => Shape::Circle { radius: (m / 4.0).round() },
            ShapeKind::Line => Shape::Line {
                length: (w / 2.0).round(),
                thickness: 2.0,
                angle_deg: 0.0,
            },
        }
    }

    /// Half extents of the axis-aligned bounding box.
    fn half_extent(&self) -> (f64, f64) {
        match *self {
            Shape::Square { side } => (side / 2.0, side / 2.0),
            Shape::Rectangle { width, height } => (width / 2.0, height / 2.0),
            Shape::Ellipse { rx, ry } => (rx, ry),
            Shape::Circle { radius } => (radius, radius),
            Shape::Line {
                length,
                thickness,
                angle_deg,
            } => {
                let (s, c) = angle_deg.to_radians().sin_cos();
                let t = thickness / 2.0;
                (length / 2.0 * c.abs() + t, length / 2.0 * s.abs() + t)
            }
        }
    }

    fn dims_valid(&self) -> bool {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            Shape::Square { side } => positive(side),
            Shape::Rectangle { width, height } => positive(width) && positive(height),
            Shape::Ellipse { rx, ry } => positive(rx) && positive(ry),
            Shape::Circle { radius } => positive(radius),
            Shape::Line {
                length,
                thickness,
                angle_deg,
            } => positive(length) && positive(thickness) && angle_deg.is_finite(),
        }
    }

    /// Whether a point at offset `(dx, dy)` from the shape centre is inside.
    fn contains(&self, dx: f64, dy: f64) -> bool {
        match *self {
            Shape::Square { side } => half_open(dx, side) && half_open(dy, side),
            Shape::Rectangle { width, height } => half_open(dx, width) && half_open(dy, height),
            Shape::Ellipse { rx, ry } => (dx / rx).powi(2) + (dy / ry).powi(2) <= 1.0,
            Shape::Circle { radius } => (dx / radius).powi(2) + (dy / radius).powi(2) <= 1.0,
            Shape::Line {
                length,
                thickness,
                angle_deg,
            } => {
                let (s, c) = angle_deg.to_radians().sin_cos();
                let along = (dx * c + dy * s).clamp(-length / 2.0, length / 2.0);
                let (ex, ey) = (dx - along * c, dy - along * s);
                ex.hypot(ey) <= thickness / 2.0
            }
        }
    }
}

// Nearest integer with the parity of `n`, so a box of that size sits
// symmetrically on an `n`-pixel axis.
fn round_with_parity(v: f64, n: usize) -> f64 {
    let r = v.round();
    if (r as i64 - n as i64) % 2 == 0 {
        r
    } else if v >= r {
        r + 1.0
    } else {
        r - 1.0
    }
}

// [-size/2, size/2) so that an integer-sized box centred on a pixel corner
// covers exactly `size` pixel centres.
fn half_open(d: f64, size: f64) -> bool {
    d >= -size / 2.0 && d < size / 2.0
}

/// Renders `shape` centred on the canvas centre `(width/2, height/2)`.
pub fn synth_shape(shape: Shape, width: usize, height: usize) -> Result<GrayImage> {
    synth_shape_at(shape, width, height, (width as f64 / 2.0, height as f64 / 2.0))
}

/// Renders `shape` centred at `center` (continuous coordinates): 255 inside,
/// 0 outside. A pixel is inside iff its centre is.
pub fn synth_shape_at(shape: Shape, width: usize, height: usize, center: (f64, f64)) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::Param(format!("canvas {width}x{height} is empty")));
    }
    if !shape.dims_valid() {
        return Err(Error::Param(format!("degenerate shape geometry {shape:?}")));
    }
    let (cx, cy) = center;
    let (hx, hy) = shape.half_extent();
    if !(cx - hx >= 0.0 && cx + hx <= width as f64 && cy - hy >= 0.0 && cy + hy <= height as f64) {
        return Err(Error::Param(format!(
            "{shape:?} at ({cx}, {cy}) exceeds the {width}x{height} canvas"
        )));
    }
    GrayImage::from_fn(width, height, |x, y| {
        let dx = x as f64 + 0.5 - cx;
        let dy = y as f64 + 0.5 - cy;
        if shape.contains(dx, dy) {
            255
        } else {
            0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn foreground(img: &GrayImage) -> usize {
        img.pixels().iter().filter(|&&p| p == 255).count()
    }

    #[test]
    fn ascii_minimal() {
        let img = load_pgm(b"P2 2 1 255\n0 255\n").unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.pixels(), &[0, 255]);
    }

    #[test]
    fn ascii_with_comments() {
        let img = load_pgm(b"P2\n# made by hand\n2 2 # dims\n15\n0 1\n# mid\n14 15").unwrap();
        assert_eq!(img.pixels(), &[0, 1, 14, 15]);
    }

    #[test]
    fn binary_header_comment() {
        let img = load_pgm(b"P5\n#c\n1 1\n255\n\x07").unwrap();
        assert_eq!(img.pixels(), &[7]);
    }

    #[test]
    fn rejects_ppm_magic() {
        let err = load_pgm(b"P6\n1 1\n255\n\0\0\0").unwrap_err();
        assert!(matches!(err, Error::Format { offset: 0, .. }), "{err}");
    }

    #[test]
    fn rejects_wide_maxval() {
        let err = load_pgm(b"P5\n1 1\n65535\n\0\0").unwrap_err();
        assert!(matches!(err, Error::Format { offset: 7, .. }), "{err}");
    }

    #[test]
    fn rejects_truncated_binary() {
        let err = load_pgm(b"P5\n3 2\n255\n\x01\x02\x03").unwrap_err();
        match err {
            Error::Format { offset, reason } => {
                assert_eq!(offset, 14);
                assert!(reason.contains("truncated"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_truncated_ascii() {
        let err = load_pgm(b"P2 2 2 255 1 2 3").unwrap_err();
        assert!(matches!(err, Error::Format { ref reason, .. } if reason.contains("truncated")), "{err}");
    }

    #[test]
    fn rejects_sample_above_maxval() {
        assert!(load_pgm(b"P2 1 1 10 11").is_err());
        assert!(load_pgm(b"P5 1 1 10 \x0b").is_err());
    }

    #[test]
    fn rejects_zero_dimensions_and_garbage() {
        assert!(load_pgm(b"P5 0 1 255 ").is_err());
        assert!(load_pgm(b"P5 1 x 255 ").is_err());
        assert!(load_pgm(b"").is_err());
        assert!(load_pgm(b"P5").is_err());
        assert!(load_pgm(b"P5x").is_err());
        assert!(load_pgm(b"P5 99999999999999999999999 1 255 ").is_err());
        assert!(load_pgm(b"P5 4294967296 4294967296 255 ").is_err());
    }

    #[test]
    fn save_minimal_pgm() {
        let img = GrayImage::new(1, 1, vec![0]).unwrap();
        assert_eq!(save_pgm(&img), b"P5\n1 1\n255\n\0");
    }

    #[test]
    fn save_minimal_ppm() {
        let black = RgbImage::new(1, 1, vec![[0, 0, 0]]).unwrap();
        assert_eq!(save_ppm(&black), b"P6\n1 1\n255\n\0\0\0");
        let gray = RgbImage::new(1, 1, vec![[128, 128, 128]]).unwrap();
        assert_eq!(&save_ppm(&gray)[11..], &[0x80, 0x80, 0x80]);
        assert_eq!(save_ppm(&gray), save_ppm(&gray.clone()));
    }

    #[test]
    fn ascii_input_canonicalises_to_binary() {
        let img = load_pgm(b"P2\n# x\n3 1\n255\n1 2 3\n").unwrap();
        assert_eq!(save_pgm(&img), b"P5\n3 1\n255\n\x01\x02\x03");
    }

    #[test]
    fn square_area() {
        let img = synth_shape(Shape::Square { side: 12.0 }, 32, 32).unwrap();
        assert_eq!(foreground(&img), 144);
        assert_eq!(img.get(10, 10), 255);
        assert_eq!(img.get(21, 21), 255);
        assert_eq!(img.get(9, 10), 0);
        assert_eq!(img.get(22, 10), 0);
    }

    #[test]
    fn rectangle_area() {
        let img = synth_shape(Shape::Rectangle { width: 16.0, height: 8.0 }, 32, 32).unwrap();
        assert_eq!(foreground(&img), 128);
    }

    #[test]
    fn ellipse_matches_brute_force_count() {
        let img = synth_shape(Shape::Ellipse { rx: 10.0, ry: 6.0 }, 32, 32).unwrap();
        // Pixel centres relative to the canvas centre (16, 16).
        let mut expected = 0;
        for y in 0..32 {
            for x in 0..32 {
                let dx = x as f64 - 15.5;
                let dy = y as f64 - 15.5;
                if (dx / 10.0) * (dx / 10.0) + (dy / 6.0) * (dy / 6.0) <= 1.0 {
                    expected += 1;
                }
            }
        }
        assert_eq!(foreground(&img), expected);
    }

    #[test]
    fn centred_shapes_are_mirror_symmetric() {
        for kind in [
            ShapeKind::Square,
            ShapeKind::Rectangle,
            ShapeKind::Ellipse,
            ShapeKind::Circle,
            ShapeKind::Line,
        ] {
            for (w, h) in [(32, 32), (31, 31), (17, 17), (40, 24), (33, 21)] {
                let img = synth_shape(Shape::default_for(kind, w, h), w, h).unwrap();
                assert_eq!(img, img.mirrored_horizontal(), "{kind:?} {w}x{h}");
                assert_eq!(img, img.mirrored_vertical(), "{kind:?} {w}x{h}");
                assert!(foreground(&img) > 0);
            }
        }
    }

    #[test]
    fn shape_outside_canvas_is_rejected() {
        let err = synth_shape(Shape::Square { side: 40.0 }, 32, 32).unwrap_err();
        assert!(matches!(err, Error::Param(_)));
        assert!(synth_shape_at(Shape::Circle { radius: 5.0 }, 32, 32, (3.0, 16.0)).is_err());
        assert!(synth_shape(Shape::Ellipse { rx: 0.0, ry: 3.0 }, 32, 32).is_err());
    }

    #[test]
    fn translate_moves_content() {
        let img = synth_shape(Shape::Square { side: 4.0 }, 16, 16).unwrap();
        let moved = img.translated(3, -2);
        assert_eq!(foreground(&moved), 16);
        assert_eq!(moved.get(6 + 3, 6 - 2), 255);
        assert_eq!(moved.translated(-3, 2), img);
    }

    #[test]
    fn transpose_round_trip() {
        let img = GrayImage::from_fn(5, 3, |x, y| (x * 10 + y) as u8).unwrap();
        let t = img.transposed();
        assert_eq!((t.width(), t.height()), (3, 5));
        assert_eq!(t.get(2, 4), img.get(4, 2));
        assert_eq!(t.transposed(), img);
    }
}
