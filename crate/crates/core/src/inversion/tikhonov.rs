use crate::error::{Error, Result};
use crate::inversion::cg::cg;
use crate::inversion::{check_shapes, normal_diag_max};
use crate::sparse::SparseOp;

/// Minimiser of `||L u - b||^2 + lambda ||C u||^2` via CG on the normal
/// equations, to relative residual `1e-10`.
pub fn solve_tikhonov(l: &SparseOp, c: &SparseOp, b: &[f64], lambda: f64) -> Result<Vec<f64>> {
    solve_tikhonov_with(l, c, b, lambda, 1e-10, 10 * l.cols().max(1))
}

pub fn solve_tikhonov_with(
    l: &SparseOp,
    c: &SparseOp,
    b: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    check_shapes(l, c, b)?;
    if has_unseen_unknown(l, c, lambda) {
        return Err(Error::SingularSystem);
    }
    let rhs = l.apply_transpose(b)?;
    let mut u = vec![0.0; l.cols()];
    let mut lv = vec![0.0; l.rows()];
    let mut cv = vec![0.0; c.rows()];
    let mut tmp = vec![0.0; l.cols()];
    let diag = normal_diag_max(l, c, lambda);
    cg(
        |v, out| {
            l.apply_into(v, &mut lv).expect("shapes checked");
            l.apply_transpose_into(&lv, out).expect("shapes checked");
            c.apply_into(v, &mut cv).expect("shapes checked");
            c.apply_transpose_into(&cv, &mut tmp).expect("shapes checked");
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += lambda * t;
            }
        },
        &rhs,
        &mut u,
        tol,
        max_iter,
        diag,
    )?;
    Ok(u)
}

/// True when some unknown has a zero column in `L` and (if weighted) in `C`.
fn has_unseen_unknown(l: &SparseOp, c: &SparseOp, lambda: f64) -> bool {
    let mut seen = vec![false; l.cols()];
    for (_, j, v) in l.triplets() {
        seen[j] |= v != 0.0;
    }
    if lambda != 0.0 {
        for (_, j, v) in c.triplets() {
            seen[j] |= v != 0.0;
        }
    }
    seen.contains(&false)
}
