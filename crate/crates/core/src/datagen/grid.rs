use crate::data::DataMatrix;
use crate::error::{Result, SvddError};

use super::polygon::{point_in_polygon, Polygon};

/// Rectangular grid of cell-center points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Cells per axis.
    pub resolution: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(SvddError::input("grid resolution must be >= 2"));
        }
        if !(x_min < x_max && y_min < y_max) {
            return Err(SvddError::input("grid bounds are empty"));
        }
        Ok(GridSpec {
            x_min,
            x_max,
            y_min,
            y_max,
            resolution,
        })
    }

    /// Bounding rectangle of 2-D data, widened by `margin` times its extent
    /// on every side.
    pub fn around(data: &DataMatrix, resolution: usize, margin: f64) -> Result<Self> {
        if data.n_cols() != 2 || data.is_empty() {
            return Err(SvddError::input("grid needs non-empty 2-D data"));
        }
        let b = data.column_bounds();
        let dx = (b[0].1 - b[0].0).max(f64::EPSILON) * margin;
        let dy = (b[1].1 - b[1].0).max(f64::EPSILON) * margin;
        GridSpec::new(b[0].0 - dx, b[0].1 + dx, b[1].0 - dy, b[1].1 + dy, resolution)
    }

    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Center of cell (`row`, `col`); rows run along y, columns along x.
    pub fn point(&self, row: usize, col: usize) -> [f64; 2] {
        let r = self.resolution as f64;
        [
            self.x_min + (col as f64 + 0.5) * (self.x_max - self.x_min) / r,
            self.y_min + (row as f64 + 0.5) * (self.y_max - self.y_min) / r,
        ]
    }

    /// All cell centers, row-major.
    pub fn points(&self) -> DataMatrix {
        let mut values = Vec::with_capacity(2 * self.len());
        for row in 0..self.resolution {
            for col in 0..self.resolution {
                values.extend_from_slice(&self.point(row, col));
            }
        }
        DataMatrix::from_flat(self.len(), 2, values).expect("grid shape")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledGrid {
    pub spec: GridSpec,
    /// Row-major inside flags, aligned with [`GridSpec::points`].
    pub labels: Vec<bool>,
}

impl LabeledGrid {
    pub fn inside_fraction(&self) -> f64 {
        self.labels.iter().filter(|&&l| l).count() as f64 / self.labels.len() as f64
    }
}

/// Label the cell centers of the polygon's bounding rectangle.
pub fn label_grid(poly: &Polygon, resolution: usize) -> Result<LabeledGrid> {
    let (x0, x1, y0, y1) = poly.bounding_box();
    let spec = GridSpec::new(x0, x1, y0, y1, resolution)?;
    let labels = spec
        .points()
        .rows()
        .map(|p| point_in_polygon(poly, [p[0], p[1]]))
        .collect();
    Ok(LabeledGrid { spec, labels })
}
