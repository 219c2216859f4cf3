//! Conjugate gradients for symmetric positive definite operators.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct CgOutcome {
    pub iterations: usize,
    /// `||A x - b|| / ||b||` at exit.
    pub residual: f64,
}

/// Solves `A x = b` in place, starting from the incoming `x`.
///
/// `apply(v, out)` must write `A v` into `out`. `diag_scale` is an estimate of
/// the largest diagonal entry of `A`, used to recognise numerically zero
/// curvature (a singular system).
pub fn cg(
    apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
    diag_scale: f64,
) -> Result<CgOutcome> {
    pcg(apply, b, x, tol, max_iter, diag_scale, None)
}

/// [`cg`] with an optional Jacobi preconditioner given as the inverse
/// diagonal. The stopping test always uses the unpreconditioned residual.
pub fn pcg(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
    diag_scale: f64,
    inv_diag: Option<&[f64]>,
) -> Result<CgOutcome> {
    let n = b.len();
    let nb = norm(b);
    if nb == 0.0 {
        x.fill(0.0);
        return Ok(CgOutcome { iterations: 0, residual: 0.0 });
    }
    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(b, a)| b - a).collect();
    let precondition = |r: &[f64], z: &mut Vec<f64>| match inv_diag {
        Some(m) => {
            z.clear();
            z.extend(r.iter().zip(m).map(|(r, m)| r * m));
        }
        None => z.clone_from_slice(r),
    };
    let mut z = r.clone();
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        let res = norm(&r) / nb;
        if res <= tol {
            return Ok(CgOutcome { iterations: it, residual: res });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 1e-14 * diag_scale * dot(&p, &p)) {
            return Err(Error::SingularSystem);
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    let res = norm(&r) / nb;
    if res <= tol {
        Ok(CgOutcome { iterations: max_iter, residual: res })
    } else {
        Err(Error::InnerSolveFailure { iterations: max_iter, residual: res })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
