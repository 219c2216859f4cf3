use serde::{Deserialize, Serialize};

use crate::emd::{structure, EmdConfig};
use crate::error::{Error, Result};
use crate::grid::{discrete_gradient_matrix, norm_l1, norm_l2, FluxField, GridFn, GridShape};
use crate::inversion::{solve_tikhonov_with, solve_tv, InversionConfig, Regularizer};
use crate::sparse::SparseOp;

/// Data misfit after regularised reconstruction, with its three size measures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `b - L u` on the measurement grid.
    pub residual: GridFn,
    pub struc_value: f64,
    pub l1_value: f64,
    pub l2_value: f64,
    pub reconstruction: GridFn,
    pub flux: Option<FluxField>,
    pub emd_converged: bool,
}

/// Reconstructs from `b_noisy` with the configured regulariser and measures
/// the residual.
pub fn residual(
    l_theta: &SparseOp,
    b_noisy: &GridFn,
    signal: GridShape,
    inv: &InversionConfig,
    emd: &EmdConfig,
) -> Result<ResidualReport> {
    inv.validate()?;
    if signal.len() != l_theta.cols() {
        return Err(Error::DimensionMismatch(format!(
            "signal grid has {} cells, operator {} columns",
            signal.len(),
            l_theta.cols()
        )));
    }
    let c = discrete_gradient_matrix(signal);
    let b = b_noisy.data();
    let u = match inv.regularizer {
        Regularizer::Tikhonov => {
            let lambda = inv.effective_lambda();
            solve_tikhonov_with(l_theta, &c, b, lambda, inv.inner_tol, inv.max_iter_for(signal.len()))?
        }
        Regularizer::Tv => solve_tv(l_theta, &c, b, inv)?,
    };
    let lu = l_theta.apply(&u)?;
    let r = b_noisy.with_data(b.iter().zip(&lu).map(|(b, p)| b - p).collect())?;
    let s = structure(&r, emd)?;
    Ok(ResidualReport {
        struc_value: s.value,
        l1_value: norm_l1(&r),
        l2_value: norm_l2(&r),
        residual: r,
        reconstruction: GridFn::new(signal, u)?,
        flux: Some(s.flux),
        emd_converged: s.converged,
    })
}
