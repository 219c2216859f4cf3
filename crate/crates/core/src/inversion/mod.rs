//! Regularised inversion and residuals.
//!
//! Tikhonov: `min ||L v - b||^2 + lambda ||C v||^2`. Total variation:
//! `min ||L v - b||^2 + lambda ||C v||_1`, solved by split Bregman iteration.
//! Norms here are plain vector norms of the coefficient arrays.
//!
//! Configured weights are multiplied by [`InversionConfig::weight_scale`]
//! before use. Line-integral rows average over many cells, so `L^T L` is small
//! next to the gradient; the scale puts conventional weights such as
//! `lambda = 10`, `mu = 100` in a regime where the data term still matters.

pub mod cg;
pub mod residual;
pub mod tikhonov;
pub mod tv;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use residual::{residual, ResidualReport};
pub use tikhonov::{solve_tikhonov, solve_tikhonov_with};
pub use tv::{solve_tv, tv_objective};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularizer {
    Tikhonov,
    #[default]
    Tv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InversionConfig {
    pub regularizer: Regularizer,
    pub lambda: f64,
    /// Split penalty of the Bregman iteration.
    pub bregman_mu: f64,
    pub bregman_iters: usize,
    /// Alternating (u, d) sweeps per Bregman pass.
    pub inner_sweeps: usize,
    pub inner_tol: f64,
    /// Defaults to ten times the number of unknowns.
    pub inner_max_iter: Option<usize>,
    /// Common factor applied to `lambda` and `bregman_mu`.
    pub weight_scale: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            regularizer: Regularizer::Tv,
            lambda: 10.0,
            bregman_mu: 100.0,
            bregman_iters: 10,
            inner_sweeps: 1,
            inner_tol: 1e-8,
            inner_max_iter: None,
            weight_scale: 1e-6,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidConfig("lambda must be non-negative".into()));
        }
        if !pos(self.bregman_mu) || !pos(self.inner_tol) || !pos(self.weight_scale) {
            return Err(Error::InvalidConfig(
                "bregman_mu, inner_tol and weight_scale must be positive".into(),
            ));
        }
        if self.bregman_iters == 0 || self.inner_sweeps == 0 || self.inner_max_iter == Some(0) {
            return Err(Error::InvalidConfig("iteration counts must be positive".into()));
        }
        Ok(())
    }

    /// Regularisation weight actually used.
    pub fn effective_lambda(&self) -> f64 {
        self.lambda * self.weight_scale
    }

    /// Split penalty actually used.
    pub fn effective_mu(&self) -> f64 {
        self.bregman_mu * self.weight_scale
    }

    pub fn max_iter_for(&self, n: usize) -> usize {
        self.inner_max_iter.unwrap_or(10 * n.max(1))
    }
}

pub(crate) fn check_shapes(l: &crate::sparse::SparseOp, c: &crate::sparse::SparseOp, b: &[f64]) -> Result<()> {
    if l.cols() != c.cols() {
        return Err(Error::DimensionMismatch(format!(
            "forward operator has {} columns, regulariser {}",
            l.cols(),
            c.cols()
        )));
    }
    if b.len() != l.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} measurements for an operator with {} rows",
            b.len(),
            l.rows()
        )));
    }
    Ok(())
}

/// Diagonal of `L^T L + w C^T C`.
pub(crate) fn normal_diag(l: &crate::sparse::SparseOp, c: &crate::sparse::SparseOp, w: f64) -> Vec<f64> {
    let mut d = vec![0.0; l.cols()];
    for (_, j, v) in l.triplets() {
        d[j] += v * v;
    }
    for (_, j, v) in c.triplets() {
        d[j] += w * v * v;
    }
    d
}

/// Largest diagonal entry of `L^T L + w C^T C`.
pub(crate) fn normal_diag_max(l: &crate::sparse::SparseOp, c: &crate::sparse::SparseOp, w: f64) -> f64 {
    normal_diag(l, c, w).into_iter().fold(0.0, f64::max)
}
