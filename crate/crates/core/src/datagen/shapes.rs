//! Banana, star and two-donut point clouds.
//!
//! All shapes sit in the positive quadrant so the input-space center of a
//! description is well away from the origin.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::DataMatrix;
use crate::error::{Result, SvddError};

use super::polygon::{sample_interior_with, Polygon};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeKind {
    Banana,
    Star,
    TwoDonut,
}

impl FromStr for ShapeKind {
    type Err = SvddError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "banana" => Ok(ShapeKind::Banana),
            "star" => Ok(ShapeKind::Star),
            "two_donut" | "twodonut" => Ok(ShapeKind::TwoDonut),
            other => Err(SvddError::input(format!("unknown shape kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ShapeKind::Banana => "banana",
            ShapeKind::Star => "star",
            ShapeKind::TwoDonut => "two_donut",
        })
    }
}

/// Geometry knobs shared by the generators.
///
/// * banana: arc of radius `4·scale` about `(5, 1)·scale`, angles uniform on
///   `(0, π)`, isotropic Gaussian jitter with deviation `noise·scale`.
/// * star: uniform over a 5-spike star about `(5, 5)·scale` with outer
///   radius `4.5·scale` and inner radius `1.8·scale`.
/// * two_donut: equal mixture of uniform annuli with radii
///   `[1.5, 3]·scale` about `(4, 5)·scale` and `(11, 5)·scale`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeParams {
    pub scale: f64,
    pub noise: f64,
}

impl Default for ShapeParams {
    fn default() -> Self {
        ShapeParams {
            scale: 1.0,
            noise: 0.1,
        }
    }
}

pub const DONUT_RADII: (f64, f64) = (1.5, 3.0);
pub const DONUT_CENTERS: [[f64; 2]; 2] = [[4.0, 5.0], [11.0, 5.0]];

pub fn star_polygon(scale: f64) -> Polygon {
    let (cx, cy) = (5.0 * scale, 5.0 * scale);
    let vertices = (0..10)
        .map(|i| {
            let r = if i % 2 == 0 { 4.5 } else { 1.8 } * scale;
            let t = PI / 2.0 + i as f64 * PI / 5.0;
            [cx + r * t.cos(), cy + r * t.sin()]
        })
        .collect();
    Polygon::from_vertices(vertices).expect("10 vertices")
}

pub fn generate_shape(kind: ShapeKind, count: usize, params: &ShapeParams, seed: u64) -> Result<DataMatrix> {
    if count == 0 {
        return Err(SvddError::input("count must be >= 1"));
    }
    if !(params.scale > 0.0 && params.noise >= 0.0) {
        return Err(SvddError::input("scale must be positive and noise nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = params.scale;
    match kind {
        ShapeKind::Banana => {
            let jitter = Normal::new(0.0, params.noise * s).map_err(|e| SvddError::input(e.to_string()))?;
            let mut values = Vec::with_capacity(2 * count);
            for _ in 0..count {
                let t = rng.random_range(0.0..PI);
                values.push(5.0 * s + 4.0 * s * t.cos() + jitter.sample(&mut rng));
                values.push(1.0 * s + 4.0 * s * t.sin() + jitter.sample(&mut rng));
            }
            DataMatrix::from_flat(count, 2, values)
        }
        ShapeKind::Star => sample_interior_with(&star_polygon(s), count, &mut rng),
        ShapeKind::TwoDonut => {
            let (r_in, r_out) = (DONUT_RADII.0 * s, DONUT_RADII.1 * s);
            let mut values = Vec::with_capacity(2 * count);
            for _ in 0..count {
                let c = DONUT_CENTERS[usize::from(rng.random_bool(0.5))];
                let r = rng.random_range(r_in * r_in..r_out * r_out).sqrt();
                let t = rng.random_range(0.0..TAU);
                values.push(c[0] * s + r * t.cos());
                values.push(c[1] * s + r * t.sin());
            }
            DataMatrix::from_flat(count, 2, values)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::point_in_polygon;

    #[test]
    fn donut_points_lie_in_an_annulus() {
        let d = generate_shape(ShapeKind::TwoDonut, 10_000, &ShapeParams::default(), 3).unwrap();
        assert_eq!(d.n_rows(), 10_000);
        let mut per_center = [0usize; 2];
        for r in d.rows() {
            let hit = DONUT_CENTERS.iter().position(|c| {
                let rad = (r[0] - c[0]).hypot(r[1] - c[1]);
                rad >= DONUT_RADII.0 - 1e-12 && rad <= DONUT_RADII.1 + 1e-12
            });
            per_center[hit.expect("point outside both annuli")] += 1;
        }
        assert!(per_center.iter().all(|&c| c > 4700));
    }

    #[test]
    fn star_points_inside_star() {
        let d = generate_shape(ShapeKind::Star, 2000, &ShapeParams::default(), 1).unwrap();
        let star = star_polygon(1.0);
        assert!(d.rows().all(|r| point_in_polygon(&star, [r[0], r[1]])));
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        for kind in [ShapeKind::Banana, ShapeKind::Star, ShapeKind::TwoDonut] {
            let a = generate_shape(kind, 500, &ShapeParams::default(), 77).unwrap();
            assert_eq!(a, generate_shape(kind, 500, &ShapeParams::default(), 77).unwrap());
            assert_ne!(a, generate_shape(kind, 500, &ShapeParams::default(), 78).unwrap());
        }
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("two-donut".parse::<ShapeKind>().unwrap(), ShapeKind::TwoDonut);
        assert_eq!("Banana".parse::<ShapeKind>().unwrap(), ShapeKind::Banana);
        assert!("circle".parse::<ShapeKind>().is_err());
    }

    #[test]
    fn table_scale_counts() {
        let b = generate_shape(ShapeKind::Banana, 11_016, &ShapeParams::default(), 0).unwrap();
        assert_eq!(b.n_rows(), 11_016);
    }
}
