//! Stable and unstable manifolds of saddle orbits, rasterised instability
//! sets, and the comparisons run on them.

mod export;
mod grow;
mod hausdorff;
mod intersect;
mod interval;
mod linearize;
mod raster;

pub use export::{write_pgm, write_svg};
pub use grow::{grow_manifold, grow_manifold_with_offset, ArcGenerator, Branch, ManifoldArc, Stability, TURN_LIMIT};
pub use hausdorff::{closure_distance, directed_distances};
pub use intersect::{detect_intersections, IntersectionPoint};
pub use interval::{arclength_samples, lambda_rotation_interval};
pub use linearize::{linearize, EigenData};
pub use raster::{rasterize, rasterize_periodic, InstabilityRaster, RasterGrid, RasterSource, Window};
