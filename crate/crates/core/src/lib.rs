//! Structure semi-norm diagnostics for forward-operator error in linear inverse
//! problems.
//!
//! The structure of a residual is the Earth Mover's Distance between its
//! positive and negative parts after removing the mean: unstructured noise moves
//! only a short distance, while systematic model error moves mass far.

pub mod calibration;
pub mod emd;
pub mod error;
pub mod forward;
pub mod grid;
pub mod inversion;
pub mod sparse;

pub use emd::{emd, emd_exact, structure, EmdConfig, EmdResult, StructureResult};
pub use error::{Error, Result};
pub use grid::{FluxField, GridFn, GridShape};
pub use sparse::SparseOp;
