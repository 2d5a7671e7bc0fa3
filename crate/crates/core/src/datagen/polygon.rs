use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::DataMatrix;
use crate::error::{Result, SvddError};

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolygonParams {
    pub k: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub seed: u64,
}

/// Simple polygon with vertices in counterclockwise order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
    params: Option<PolygonParams>,
}

impl Polygon {
    pub fn from_vertices(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(SvddError::input("a polygon needs at least 3 vertices"));
        }
        Ok(Polygon {
            vertices,
            params: None,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn params(&self) -> Option<&PolygonParams> {
        self.params.as_ref()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// `(x_min, x_max, y_min, y_max)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        self.vertices.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), v| (a.min(v[0]), b.max(v[0]), c.min(v[1]), d.max(v[1])),
        )
    }

    /// Signed shoelace area; positive for counterclockwise order.
    pub fn signed_area(&self) -> f64 {
        0.5 * self
            .edges()
            .map(|(a, b)| a[0] * b[1] - b[0] * a[1])
            .sum::<f64>()
    }

    pub fn vertices_matrix(&self) -> DataMatrix {
        DataMatrix::from_rows(&self.vertices).expect("2-D vertices")
    }
}

/// Random star-shaped polygon: sorted uniform angles on `(0, 2π)` and
/// uniform radii on `[r_min, r_max]`.
///
/// Angle draws leaving a gap of π or more between neighbours are redrawn, so
/// the origin is always interior and the polygon is simple.
pub fn generate_polygon(k: usize, r_min: f64, r_max: f64, seed: u64) -> Result<Polygon> {
    if k < 3 {
        return Err(SvddError::input(format!("polygon needs k >= 3 vertices, got {k}")));
    }
    if !(r_min > 0.0 && r_min <= r_max && r_max.is_finite()) {
        return Err(SvddError::input("radii must satisfy 0 < r_min <= r_max"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = loop {
        let mut theta: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..TAU)).collect();
        theta.sort_by(f64::total_cmp);
        if max_angular_gap(&theta) < PI {
            break theta;
        }
    };
    let vertices = theta
        .iter()
        .map(|&t| {
            let r = if r_min == r_max { r_min } else { rng.random_range(r_min..=r_max) };
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    Ok(Polygon {
        vertices,
        params: Some(PolygonParams { k, r_min, r_max, seed }),
    })
}

fn max_angular_gap(sorted: &[f64]) -> f64 {
    let wrap = sorted[0] + TAU - sorted[sorted.len() - 1];
    sorted.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

/// `p` lies on an edge (to within rounding of the edge length).
pub fn on_boundary(poly: &Polygon, p: Point) -> bool {
    poly.edges().any(|(a, b)| {
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let cross = ex * (p[1] - a[1]) - ey * (p[0] - a[0]);
        let len2 = ex * ex + ey * ey;
        if cross.abs() > 1e-12 * len2.max(1.0) {
            return false;
        }
        let dot = ex * (p[0] - a[0]) + ey * (p[1] - a[1]);
        dot >= -1e-12 * len2 && dot <= len2 * (1.0 + 1e-12)
    })
}

/// Ray-casting parity test; points on the boundary count as inside.
pub fn point_in_polygon(poly: &Polygon, p: Point) -> bool {
    if on_boundary(poly, p) {
        return true;
    }
    strictly_inside(poly, p)
}

fn strictly_inside(poly: &Polygon, p: Point) -> bool {
    let mut inside = false;
    for (a, b) in poly.edges() {
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x_cross = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

pub(crate) fn sample_interior_with<R: Rng + ?Sized>(
    poly: &Polygon,
    count: usize,
    rng: &mut R,
) -> Result<DataMatrix> {
    if poly.signed_area().abs() <= f64::EPSILON {
        return Err(SvddError::input("polygon has no interior"));
    }
    let (x0, x1, y0, y1) = poly.bounding_box();
    let mut out = DataMatrix::empty(2);
    while out.n_rows() < count {
        let p = [rng.random_range(x0..x1), rng.random_range(y0..y1)];
        if strictly_inside(poly, p) && !on_boundary(poly, p) {
            out.push_row(&p)?;
        }
    }
    Ok(out)
}

/// `count` points uniform over the polygon interior (bounding-box rejection).
pub fn sample_polygon_interior(poly: &Polygon, count: usize, seed: u64) -> Result<DataMatrix> {
    if count == 0 {
        return Err(SvddError::input("interior sample count must be >= 1"));
    }
    sample_interior_with(poly, count, &mut ChaCha8Rng::seed_from_u64(seed))
}
