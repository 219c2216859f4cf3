use serde::{Deserialize, Serialize};

use crate::calibration::{decay_order, ordered_map};
use crate::emd::{structure, EmdConfig};
use crate::error::{Error, Result};
use crate::grid::{GridFn, GridShape};

// Four-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL_WEIGHTS: [f64; 4] = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

/// Cell averages of `phi` on the `2^ell x 2^ell` partition of the unit square.
pub fn cell_averages(phi: &(dyn Fn(f64, f64) -> f64 + Sync), ell: u32) -> Result<GridFn> {
    if ell > 12 {
        return Err(Error::InvalidConfig(format!("refinement level {ell} too fine")));
    }
    let n = 1usize << ell;
    let shape = GridShape::unit_square(n)?;
    let h = shape.dx;
    let mut data = Vec::with_capacity(shape.len());
    for i in 0..n {
        for j in 0..n {
            let (cx, cy) = shape.center(i, j);
            let mut acc = 0.0;
            for (a, wa) in GL_NODES.iter().zip(GL_WEIGHTS) {
                for (b, wb) in GL_NODES.iter().zip(GL_WEIGHTS) {
                    acc += wa * wb * phi(cx + 0.5 * h * a, cy + 0.5 * h * b);
                }
            }
            data.push(acc / 4.0);
        }
    }
    GridFn::new(shape, data)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionRow {
    pub ell: u32,
    pub struc: f64,
    /// `|struc(R_ell phi) - reference|`.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionStudy {
    pub ell_ref: u32,
    pub reference: f64,
    pub rows: Vec<RestrictionRow>,
    /// Fitted `p` in `gap ~ 2^(-p ell)`; `None` if fewer than two gaps are positive.
    pub order: Option<f64>,
}

/// Structure of the cell averages at each level, compared against the finest
/// level `ell_ref`.
pub fn restriction_study(
    phi: &(dyn Fn(f64, f64) -> f64 + Sync),
    ells: &[u32],
    ell_ref: u32,
    emd: &EmdConfig,
) -> Result<RestrictionStudy> {
    if ells.iter().any(|&l| l >= ell_ref) {
        return Err(Error::InvalidConfig(format!("levels must be coarser than the reference level {ell_ref}")));
    }
    emd.validate()?;
    let mut levels = ells.to_vec();
    levels.push(ell_ref);
    let strucs = ordered_map(&levels, |&l| -> Result<f64> { Ok(structure(&cell_averages(phi, l)?, emd)?.value) });
    let strucs = strucs.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = *strucs.last().expect("non-empty");
    let rows: Vec<RestrictionRow> = ells
        .iter()
        .zip(&strucs)
        .map(|(&ell, &struc)| RestrictionRow { ell, struc, gap: (struc - reference).abs() })
        .collect();
    let order = decay_order(&rows.iter().map(|r| (r.ell as f64, r.gap)).collect::<Vec<_>>());
    Ok(RestrictionStudy { ell_ref, reference, rows, order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emd::EmdSolver;

    #[test]
    fn quadrature_is_exact_for_polynomials() {
        let g = cell_averages(&|x, y| x * x * x + x * y * y, 2).unwrap();
        let h = 0.25;
        for i in 0..4 {
            for j in 0..4 {
                let (x0, y0) = (i as f64 * h, j as f64 * h);
                let ix3 = ((x0 + h).powi(4) - x0.powi(4)) / 4.0 / h;
                let ix = ((x0 + h).powi(2) - x0.powi(2)) / 2.0 / h;
                let iy2 = ((y0 + h).powi(3) - y0.powi(3)) / 3.0 / h;
                assert!((g.get(i, j) - (ix3 + ix * iy2)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_has_zero_gap() {
        let cfg = EmdConfig { solver: EmdSolver::NetworkSimplex, ..Default::default() };
        let s = restriction_study(&|_, _| 3.0, &[1, 2, 3], 4, &cfg).unwrap();
        assert_eq!(s.reference, 0.0);
        assert!(s.rows.iter().all(|r| r.gap == 0.0));
        assert_eq!(s.order, None);
    }

    #[test]
    fn gap_shrinks_for_smooth_field() {
        let cfg = EmdConfig { solver: EmdSolver::NetworkSimplex, ..Default::default() };
        let s = restriction_study(&|x, _| x, &[2, 3, 4], 5, &cfg).unwrap();
        assert!(s.rows[2].gap < s.rows[0].gap, "{s:?}");
    }

    #[test]
    fn reference_must_be_finest() {
        assert!(restriction_study(&|x, _| x, &[3, 4], 4, &EmdConfig::default()).is_err());
    }
}
