//! Shared fixtures and an independent force oracle for integration tests.
#![allow(dead_code)]

use edgeforce::edgecurrent::extract_current;
use edgeforce::raster::{synth_shape, GrayImage, Shape, ShapeKind};
use edgeforce::{EdgeCurrent, EdgeParams};

pub const SIZE: usize = 32;

pub fn shape_image(kind: ShapeKind) -> GrayImage {
    synth_shape(Shape::default_for(kind, SIZE, SIZE), SIZE, SIZE).unwrap()
}

pub fn rectangle() -> GrayImage {
    shape_image(ShapeKind::Rectangle)
}

pub fn ellipse() -> GrayImage {
    shape_image(ShapeKind::Ellipse)
}

pub fn square() -> GrayImage {
    shape_image(ShapeKind::Square)
}

pub fn current(img: &GrayImage) -> EdgeCurrent {
    extract_current(img, &EdgeParams::default()).unwrap()
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Result of the brute-force double sum.
#[derive(Debug, Clone, Copy)]
pub struct OracleForce {
    pub f: [f64; 3],
    /// Sum of in-plane magnitudes of every pair term; the conditioning
    /// scale for cancellation-heavy cells.
    pub abs_sum: f64,
}

/// Direct evaluation of `A * sum_j sum_k T1j x (T2k x r_kj) / |r_kj|^3`
/// with generic 3-D cross products. Pairs closer than `min_r` are skipped.
pub fn oracle_total_force(
    c1: &EdgeCurrent,
    c2: &EdgeCurrent,
    shift: (f64, f64),
    height: f64,
    a: f64,
    min_r: f64,
) -> OracleForce {
    let mut f = [0.0; 3];
    let mut abs_sum = 0.0;
    for t1 in c1.elements() {
        let p1 = [t1.x as f64 + shift.0, t1.y as f64 + shift.1, height];
        let v1 = [t1.tx, t1.ty, 0.0];
        for t2 in c2.elements() {
            let r = [p1[0] - t2.x as f64, p1[1] - t2.y as f64, p1[2]];
            let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            if len < min_r {
                continue;
            }
            let term = cross(v1, cross([t2.tx, t2.ty, 0.0], r));
            let k = a / (len * len * len);
            for i in 0..3 {
                f[i] += term[i] * k;
            }
            abs_sum += (term[0] * k).hypot(term[1] * k);
        }
    }
    OracleForce { f, abs_sum }
}

pub fn oracle_in_plane(c1: &EdgeCurrent, c2: &EdgeCurrent, shift: (f64, f64), height: f64) -> OracleForce {
    oracle_total_force(c1, c2, shift, height, 1.0, 1e-9)
}

/// `|got - want| <= rel * |want| + abs_floor`.
pub fn close(got: (f64, f64), want: (f64, f64), rel: f64, abs_floor: f64) -> bool {
    let d = (got.0 - want.0).hypot(got.1 - want.1);
    d <= rel * want.0.hypot(want.1) + abs_floor
}
