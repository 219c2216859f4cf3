//! Affine and bilinear families of forward operators.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::lio::assemble_lio;
use crate::forward::paths::make_paths;
use crate::forward::perlin::PerlinParams;
use crate::sparse::SparseOp;

/// `L_theta` for `theta in [0,1]` (one parameter) or `[0,1]^2` (two).
///
/// With one parameter the endpoints are `[L0, L1]`; with two they are
/// `[L00, L10, L01, L11]`, indexed by `(theta1, theta2)` corners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily")]
pub struct OperatorFamily {
    endpoints: Vec<SparseOp>,
    #[serde(skip)]
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    endpoints: Vec<SparseOp>,
}

impl TryFrom<RawFamily> for OperatorFamily {
    type Error = Error;

    fn try_from(r: RawFamily) -> Result<Self> {
        OperatorFamily::new(r.endpoints)
    }
}

impl OperatorFamily {
    pub fn new(endpoints: Vec<SparseOp>) -> Result<Self> {
        let dim = match endpoints.len() {
            2 => 1,
            4 => 2,
            k => {
                return Err(Error::DimensionMismatch(format!(
                    "a family needs 2 or 4 endpoints, got {k}"
                )))
            }
        };
        let (r, c) = (endpoints[0].rows(), endpoints[0].cols());
        if endpoints.iter().any(|e| e.rows() != r || e.cols() != c) {
            return Err(Error::DimensionMismatch("endpoint operators differ in shape".into()));
        }
        Ok(Self { endpoints, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn endpoints(&self) -> &[SparseOp] {
        &self.endpoints
    }

    pub fn rows(&self) -> usize {
        self.endpoints[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.endpoints[0].cols()
    }

    /// Blend weights of the endpoints at `theta`.
    pub fn weights(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "theta has {} components, family has {}",
                theta.len(),
                self.dim
            )));
        }
        if let Some(&value) = theta.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::ThetaOutOfRange { value });
        }
        Ok(match *theta {
            [t] => vec![1.0 - t, t],
            [a, b] => vec![(1.0 - a) * (1.0 - b), a * (1.0 - b), (1.0 - a) * b, a * b],
            _ => unreachable!(),
        })
    }

    pub fn at(&self, theta: &[f64]) -> Result<SparseOp> {
        let w = self.weights(theta)?;
        // Exact vertex reproduction, free of 0 * x + 1 * y rounding.
        if let Some(k) = w.iter().position(|&v| v == 1.0) {
            return Ok(self.endpoints[k].clone());
        }
        let terms: Vec<(f64, &SparseOp)> = w.iter().copied().zip(&self.endpoints).collect();
        SparseOp::linear_combination(&terms)
    }
}

/// Convenience alias matching [`OperatorFamily::at`].
pub fn family_at(fam: &OperatorFamily, theta: &[f64]) -> Result<SparseOp> {
    fam.at(theta)
}

/// Builds a family of `2^dim` independent random line-integral operators from
/// `nx x nx` signals to `ny x ny` measurements.
pub fn make_family(seed: u64, nx: usize, ny: usize, dim: usize, params: &PerlinParams) -> Result<OperatorFamily> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidConfig(format!("family dimension must be 1 or 2, got {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..1 << dim).map(|_| rng.next_u64()).collect();
    let endpoints = seeds
        .iter()
        .map(|&s| assemble_lio(&make_paths(s, ny, params)?, nx, ny))
        .collect::<Result<Vec<_>>>()?;
    OperatorFamily::new(endpoints)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(seed: f64) -> SparseOp {
        SparseOp::from_triplets(2, 3, vec![(0, 0, seed), (1, 2, 1.0 - seed), (0, 1, 2.0 * seed)]).unwrap()
    }

    #[test]
    fn vertices_are_reproduced() {
        let f = OperatorFamily::new(vec![op(0.1), op(0.7)]).unwrap();
        assert_eq!(f.at(&[0.0]).unwrap(), op(0.1));
        assert_eq!(f.at(&[1.0]).unwrap(), op(0.7));
        let g = OperatorFamily::new(vec![op(0.1), op(0.2), op(0.3), op(0.4)]).unwrap();
        assert_eq!(g.at(&[1.0, 0.0]).unwrap(), op(0.2));
        assert_eq!(g.at(&[0.0, 1.0]).unwrap(), op(0.3));
    }

    #[test]
    fn midpoint_is_average() {
        let f = OperatorFamily::new(vec![op(0.1), op(0.7)]).unwrap();
        let m = f.at(&[0.5]).unwrap().to_dense();
        let (a, b) = (op(0.1).to_dense(), op(0.7).to_dense());
        for r in 0..2 {
            for c in 0..3 {
                assert!((m[r][c] - 0.5 * (a[r][c] + b[r][c])).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn affine_along_lines() {
        let g = OperatorFamily::new(vec![op(0.1), op(0.9), op(0.3), op(0.6)]).unwrap();
        // Along theta2 = 0.3 the blend is affine in theta1.
        let at = |t: f64| g.at(&[t, 0.3]).unwrap().to_dense();
        let (a, b, c) = (at(0.2), at(0.5), at(0.8));
        for r in 0..2 {
            for k in 0..3 {
                assert!((b[r][k] - 0.5 * (a[r][k] + c[r][k])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn argument_checks() {
        let f = OperatorFamily::new(vec![op(0.1), op(0.7)]).unwrap();
        assert!(matches!(f.at(&[1.5]), Err(Error::ThetaOutOfRange { .. })));
        assert!(f.at(&[0.5, 0.5]).is_err());
        assert!(OperatorFamily::new(vec![op(0.1)]).is_err());
        let other = SparseOp::identity(3);
        assert!(OperatorFamily::new(vec![op(0.1), other]).is_err());
    }

    #[test]
    fn seeded_families_are_reproducible() {
        let a = make_family(11, 6, 8, 1, &PerlinParams::default()).unwrap();
        let b = make_family(11, 6, 8, 1, &PerlinParams::default()).unwrap();
        let sa = serde_json::to_string(&a.endpoints()[1]).unwrap();
        let sb = serde_json::to_string(&b.endpoints()[1]).unwrap();
        assert_eq!(sa, sb);
        assert_ne!(a.endpoints()[0], a.endpoints()[1]);
    }

    #[test]
    fn serde_round_trip() {
        let g = OperatorFamily::new(vec![op(0.1), op(0.2), op(0.3), op(0.4)]).unwrap();
        let back: OperatorFamily = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.dim(), 2);
        assert!(serde_json::from_str::<OperatorFamily>(r#"{"endpoints":[]}"#).is_err());
    }
}
