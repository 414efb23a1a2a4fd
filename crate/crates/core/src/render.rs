//! Text and raster renderings of currents, force maps and classifications.
//!
//! Glyph table (one character per cell):
//!
//! | direction | glyph |
//! |-----------|-------|
//! | E  | `>`  |
//! | SE | `\`  |
//! | S  | `v`  |
//! | SW | `/`  |
//! | W  | `<`  |
//! | NW | `,`  |
//! | N  | `^`  |
//! | NE | `` ` `` |
//! | none / empty | `.` |

use std::fmt::Write as _;

use crate::edgecurrent::EdgeCurrent;
use crate::emforce::{ForceMap, Vec2};
use crate::matchmap::{discretize8, ClassificationMap, Direction8, PointClass};
use crate::raster::RgbImage;

pub const CONVERGENCE_RGB: [u8; 3] = [0, 0, 0];
pub const DIVERGENCE_RGB: [u8; 3] = [255, 255, 255];
pub const TRAPPED_RGB: [u8; 3] = [128, 128, 128];
pub const ORIGIN_RGB: [u8; 3] = [64, 64, 64];

pub fn glyph(dir: Option<Direction8>) -> char {
    match dir {
        None => '.',
        Some(Direction8::E) => '>',
        Some(Direction8::SE) => '\\',
        Some(Direction8::S) => 'v',
        Some(Direction8::SW) => '/',
        Some(Direction8::W) => '<',
        Some(Direction8::NW) => ',',
        Some(Direction8::N) => '^',
        Some(Direction8::NE) => '`',
    }
}

/// `height` lines of `width` glyphs, each line newline-terminated.
pub fn render_direction_glyphs(map: &ForceMap) -> String {
    let mut out = String::with_capacity((map.width() + 1) * map.height());
    for y in 0..map.height() {
        out.extend((0..map.width()).map(|x| glyph(discretize8(map.get(x, y)))));
        out.push('\n');
    }
    out
}

/// Glyph grid over the current's source frame; `.` where there is no element.
pub fn render_current_glyphs(current: &EdgeCurrent) -> String {
    let (w, h) = (current.width(), current.height());
    let mut grid = vec!['.'; w * h];
    for e in current.elements() {
        grid[e.y as usize * w + e.x as usize] = glyph(discretize8(Vec2::new(e.tx, e.ty)));
    }
    let mut out = String::with_capacity((w + 1) * h);
    for row in grid.chunks(w) {
        out.extend(row);
        out.push('\n');
    }
    out
}

/// Maps -0.0 to 0.0 so tables never print `-0`.
fn unsigned_zero(v: f64) -> f64 {
    v + 0.0
}

/// `x y tx ty` header, then one element per line in storage order.
pub fn current_tsv(current: &EdgeCurrent) -> String {
    let mut out = String::from("x\ty\ttx\tty\n");
    for e in current.elements() {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", e.x, e.y, unsigned_zero(e.tx), unsigned_zero(e.ty));
    }
    out
}

/// `x y fx fy` header, then one cell per line in row-major order.
pub fn force_map_tsv(map: &ForceMap) -> String {
    let mut out = String::from("x\ty\tfx\tfy\n");
    for y in 0..map.height() {
        for x in 0..map.width() {
            let f = map.get(x, y);
            let _ = writeln!(out, "{x}\t{y}\t{}\t{}", unsigned_zero(f.x), unsigned_zero(f.y));
        }
    }
    out
}

pub fn class_rgb(label: PointClass) -> [u8; 3] {
    match label {
        PointClass::Convergence => CONVERGENCE_RGB,
        PointClass::Divergence => DIVERGENCE_RGB,
        PointClass::LocallyTrapped => TRAPPED_RGB,
    }
}

/// Black/white/gray per label. With `mark_origin`, a Convergence origin
/// cell is drawn dark gray instead of black.
pub fn render_classification_ppm(cls: &ClassificationMap, mark_origin: bool) -> RgbImage {
    let (ox, oy) = cls.origin();
    let origin_index = oy * cls.width() + ox;
    let pixels = cls
        .labels()
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            if mark_origin && i == origin_index && l == PointClass::Convergence {
                ORIGIN_RGB
            } else {
                class_rgb(l)
            }
        })
        .collect();
    RgbImage::new(cls.width(), cls.height(), pixels).expect("classification map is non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edgecurrent::CurrentElement;

    #[test]
    fn uniform_east_is_all_arrows() {
        let m = ForceMap::from_fn(4, 3, |_, _| Vec2::new(2.0, 0.0)).unwrap();
        assert_eq!(render_direction_glyphs(&m), ">>>>\n>>>>\n>>>>\n");
    }

    #[test]
    fn zero_map_is_all_dots() {
        let m = ForceMap::from_fn(3, 2, |_, _| Vec2::ZERO).unwrap();
        assert_eq!(render_direction_glyphs(&m), "...\n...\n");
    }

    #[test]
    fn glyphs_follow_discretization() {
        let m = ForceMap::from_fn(8, 8, |x, y| {
            let a = (x * 8 + y) as f64 * 0.11;
            Vec2::new(a.cos(), a.sin())
        })
        .unwrap();
        let text = render_direction_glyphs(&m);
        for (y, line) in text.lines().enumerate() {
            for (x, c) in line.chars().enumerate() {
                assert_eq!(c, glyph(discretize8(m.get(x, y))));
            }
        }
        let distinct: std::collections::HashSet<char> = text.chars().filter(|&c| c != '\n').collect();
        assert_eq!(distinct.len(), 8);
    }

    #[test]
    fn current_outputs() {
        let c = EdgeCurrent::new(
            3,
            2,
            vec![
                CurrentElement { x: 1, y: 0, tx: 0.0, ty: -4.0 },
                CurrentElement { x: 2, y: 1, tx: 1020.0, ty: -0.0 },
            ],
        )
        .unwrap();
        assert_eq!(render_current_glyphs(&c), ".^.\n..>\n");
        assert_eq!(current_tsv(&c), "x\ty\ttx\tty\n1\t0\t0\t-4\n2\t1\t1020\t0\n");
    }

    #[test]
    fn force_tsv_rows() {
        let m = ForceMap::from_fn(2, 1, |x, _| Vec2::new(x as f64, -0.25)).unwrap();
        assert_eq!(force_map_tsv(&m), "x\ty\tfx\tfy\n0\t0\t0\t-0.25\n1\t0\t1\t-0.25\n");
    }

    #[test]
    fn classification_colors() {
        use PointClass::*;
        let all_conv = ClassificationMap::new(2, 2, (1, 1), vec![Convergence; 4]).unwrap();
        assert!(render_classification_ppm(&all_conv, false).pixels().iter().all(|&p| p == [0, 0, 0]));
        let marked = render_classification_ppm(&all_conv, true);
        assert_eq!(marked.get(1, 1), ORIGIN_RGB);
        assert_eq!(marked.get(0, 0), CONVERGENCE_RGB);

        let all_div = ClassificationMap::new(2, 2, (1, 1), vec![Divergence; 4]).unwrap();
        for mark in [false, true] {
            assert!(render_classification_ppm(&all_div, mark).pixels().iter().all(|&p| p == [255; 3]));
        }

        let labels = vec![Convergence, Divergence, LocallyTrapped, Divergence, Convergence, LocallyTrapped];
        let mixed = ClassificationMap::new(3, 2, (1, 1), labels.clone()).unwrap();
        let img = render_classification_ppm(&mixed, false);
        assert_eq!(img.pixels().len(), 6);
        for (p, l) in img.pixels().iter().zip(&labels) {
            assert_eq!(*p, class_rgb(*l));
        }
    }
}
