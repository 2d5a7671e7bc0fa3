//! Synthetic evaluation geometries.

mod grid;
mod polygon;
mod shapes;

pub use grid::{label_grid, GridSpec, LabeledGrid};
pub use polygon::{
    generate_polygon, on_boundary, point_in_polygon, sample_polygon_interior, Point, Polygon,
    PolygonParams,
};
pub use shapes::{generate_shape, star_polygon, ShapeKind, ShapeParams, DONUT_CENTERS, DONUT_RADII};
