//! Total-variation inversion by split Bregman iteration.
//!
//! Splits `d = C u` and alternates
//!   u <- argmin ||L u - b||^2 + mu ||d - C u - e||^2
//!   d <- shrink(C u + e, lambda / (2 mu))
//! followed by the Bregman update `e <- e + C u - d`.

use crate::error::Result;
use crate::inversion::cg::pcg;
use crate::inversion::{check_shapes, normal_diag, InversionConfig};
use crate::sparse::SparseOp;

/// `||L u - b||^2 + lambda ||C u||_1`.
pub fn tv_objective(l: &SparseOp, c: &SparseOp, b: &[f64], u: &[f64], lambda: f64) -> Result<f64> {
    let lu = l.apply(u)?;
    let cu = c.apply(u)?;
    let fit: f64 = lu.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(fit + lambda * cu.iter().map(|v| v.abs()).sum::<f64>())
}

/// Objective of the split problem for fixed Bregman variable `e`; every
/// alternating step decreases it.
pub fn split_objective(
    l: &SparseOp,
    c: &SparseOp,
    b: &[f64],
    u: &[f64],
    d: &[f64],
    e: &[f64],
    lambda: f64,
    mu: f64,
) -> Result<f64> {
    let lu = l.apply(u)?;
    let cu = c.apply(u)?;
    let fit: f64 = lu.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum();
    let l1: f64 = d.iter().map(|v| v.abs()).sum();
    let gap: f64 = (0..d.len()).map(|k| (d[k] - cu[k] - e[k]).powi(2)).sum();
    Ok(fit + lambda * l1 + mu * gap)
}

/// Observer for the intermediate iterates; used in tests.
pub(crate) type Trace<'a> = &'a mut dyn FnMut(Step, &[f64], &[f64], &[f64]);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Step {
    U,
    D,
    Bregman,
}

pub fn solve_tv(l: &SparseOp, c: &SparseOp, b: &[f64], cfg: &InversionConfig) -> Result<Vec<f64>> {
    solve_tv_traced(l, c, b, cfg, &mut |_, _, _, _| {})
}

pub(crate) fn solve_tv_traced(
    l: &SparseOp,
    c: &SparseOp,
    b: &[f64],
    cfg: &InversionConfig,
    trace: Trace<'_>,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_shapes(l, c, b)?;
    let n = l.cols();
    let mu = cfg.effective_mu();
    let thresh = cfg.effective_lambda() / (2.0 * mu);
    let max_iter = cfg.max_iter_for(n);
    let nd = normal_diag(l, c, mu);
    let diag = nd.iter().copied().fold(0.0, f64::max);
    let inv_diag: Vec<f64> = nd.iter().map(|&v| if v > 0.0 { 1.0 / v } else { 1.0 }).collect();

    let ltb = l.apply_transpose(b)?;
    let mut u = vec![0.0; n];
    let mut d = vec![0.0; c.rows()];
    let mut e = vec![0.0; c.rows()];
    let mut cu = vec![0.0; c.rows()];
    let mut rhs = vec![0.0; n];
    let mut lv = vec![0.0; l.rows()];
    let mut cv = vec![0.0; c.rows()];
    let mut tmp = vec![0.0; n];
    let mut de = vec![0.0; c.rows()];

    for _ in 0..cfg.bregman_iters {
        for _ in 0..cfg.inner_sweeps {
            for k in 0..de.len() {
                de[k] = d[k] - e[k];
            }
            c.apply_transpose_into(&de, &mut rhs)?;
            for (r, t) in rhs.iter_mut().zip(&ltb) {
                *r = t + mu * *r;
            }
            pcg(
                |v, out| {
                    l.apply_into(v, &mut lv).expect("shapes checked");
                    l.apply_transpose_into(&lv, out).expect("shapes checked");
                    c.apply_into(v, &mut cv).expect("shapes checked");
                    c.apply_transpose_into(&cv, &mut tmp).expect("shapes checked");
                    for (o, t) in out.iter_mut().zip(&tmp) {
                        *o += mu * t;
                    }
                },
                &rhs,
                &mut u,
                cfg.inner_tol,
                max_iter,
                diag,
                Some(&inv_diag),
            )?;
            trace(Step::U, &u, &d, &e);
            c.apply_into(&u, &mut cu)?;
            for k in 0..d.len() {
                d[k] = shrink(cu[k] + e[k], thresh);
            }
            trace(Step::D, &u, &d, &e);
        }
        for k in 0..e.len() {
            e[k] += cu[k] - d[k];
        }
        trace(Step::Bregman, &u, &d, &e);
    }
    Ok(u)
}

fn shrink(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}
