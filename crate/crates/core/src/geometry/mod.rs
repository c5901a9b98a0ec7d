//! Geometry of model manifolds and density-derived characteristic functions.

mod bundle;
mod profile;
pub mod quadrature;
mod table;

pub use bundle::{Exponents, GeometricBundle, TabulationOptions};
pub use profile::{sphere_area, Density, DensityProfile, ManifoldProfile, RadialFn, Warp};
pub use table::{first_monotonicity_violation, MonotoneTable, Scale};
