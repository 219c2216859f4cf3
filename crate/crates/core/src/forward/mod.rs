//! Random line-integral forward operators.
//!
//! Each measurement cell `y` owns a path through the unit square whose
//! quartic coefficients are smooth (Perlin) functions of `y`; the operator row
//! averages the signal over the cells the path visits.

pub mod family;
pub mod lio;
pub mod paths;
pub mod perlin;

pub use family::{family_at, make_family, OperatorFamily};
pub use lio::assemble_lio;
pub use paths::{make_paths, PathSpec};
pub use perlin::{PerlinField, PerlinParams};
