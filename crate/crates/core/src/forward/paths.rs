//! Random quartic paths through the unit square.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::forward::perlin::{PerlinField, PerlinParams};

/// Polynomial degree of each path component.
pub const DEGREE: usize = 4;

/// A path `t -> x(t)`, `t in [0, 1]`, whose components are the quartics
/// `sum_p alpha[r][p] t^p / p!` min-max normalised onto `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub alpha: [[f64; DEGREE + 1]; 2],
    lo: [f64; 2],
    hi: [f64; 2],
}

const FACT: [f64; DEGREE + 1] = [1.0, 1.0, 2.0, 6.0, 24.0];

impl PathSpec {
    pub fn new(alpha: [[f64; DEGREE + 1]; 2]) -> Self {
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        for r in 0..2 {
            (lo[r], hi[r]) = extremes(&alpha[r]);
        }
        Self { alpha, lo, hi }
    }

    /// A component with no variation over `t`; it is pinned to `1/2`.
    pub fn is_degenerate(&self, r: usize) -> bool {
        let scale: f64 = self.alpha[r].iter().zip(FACT).map(|(a, f)| a.abs() / f).sum();
        self.hi[r] - self.lo[r] <= 1e-12 * scale.max(f64::MIN_POSITIVE)
    }

    /// Un-normalised component value.
    pub fn raw(&self, r: usize, t: f64) -> f64 {
        poly(&self.alpha[r], t)
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        let c = |r: usize| {
            if self.is_degenerate(r) {
                0.5
            } else {
                ((self.raw(r, t) - self.lo[r]) / (self.hi[r] - self.lo[r])).clamp(0.0, 1.0)
            }
        };
        (c(0), c(1))
    }
}

fn poly(a: &[f64; DEGREE + 1], t: f64) -> f64 {
    a.iter().zip(FACT).rev().fold(0.0, |acc, (c, f)| acc * t + c / f)
}

fn deriv(a: &[f64; DEGREE + 1], t: f64) -> f64 {
    a[1] + a[2] * t + a[3] * t * t / 2.0 + a[4] * t * t * t / 6.0
}

/// Minimum and maximum of the quartic over `[0, 1]`.
///
/// Roots of the second derivative (a quadratic, in closed form) cut `[0, 1]`
/// into pieces where the first derivative is monotone; each piece holds at
/// most one critical point, located by bisection.
fn extremes(a: &[f64; DEGREE + 1]) -> (f64, f64) {
    let mut cuts = vec![0.0, 1.0];
    // p''(t) = a2 + a3 t + a4 t^2 / 2
    let (qa, qb, qc) = (a[4] / 2.0, a[3], a[2]);
    if qa != 0.0 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let s = disc.sqrt();
            cuts.push((-qb - s) / (2.0 * qa));
            cuts.push((-qb + s) / (2.0 * qa));
        }
    } else if qb != 0.0 {
        cuts.push(-qc / qb);
    }
    cuts.retain(|t| (0.0..=1.0).contains(t));
    cuts.sort_by(f64::total_cmp);

    let mut lo = poly(a, 0.0).min(poly(a, 1.0));
    let mut hi = poly(a, 0.0).max(poly(a, 1.0));
    for w in cuts.windows(2) {
        let (mut l, mut r) = (w[0], w[1]);
        let (dl, dr) = (deriv(a, l), deriv(a, r));
        if dl == 0.0 || dr == 0.0 || dl.signum() != dr.signum() {
            for _ in 0..100 {
                let m = 0.5 * (l + r);
                if deriv(a, m).signum() == dl.signum() && dl != 0.0 {
                    l = m;
                } else {
                    r = m;
                }
            }
            let v = poly(a, 0.5 * (l + r));
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

/// Seeds of the ten coefficient fields, ordered `(r, p)` with `p` fastest.
pub fn coefficient_seeds(seed: u64) -> [u64; 2 * (DEGREE + 1)] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::array::from_fn(|_| rng.next_u64())
}

/// One path per measurement cell `y_{k,l} = (k/ny, l/ny)`, stored at `k * ny + l`.
pub fn make_paths(seed: u64, ny: usize, params: &PerlinParams) -> Result<Vec<PathSpec>> {
    let fields = coefficient_seeds(seed)
        .iter()
        .map(|&s| PerlinField::new(params.clone(), s))
        .collect::<Result<Vec<_>>>()?;
    let h = 1.0 / ny as f64;
    let mut out = Vec::with_capacity(ny * ny);
    for k in 0..ny {
        for l in 0..ny {
            let y = (k as f64 * h, l as f64 * h);
            let mut alpha = [[0.0; DEGREE + 1]; 2];
            for r in 0..2 {
                for p in 0..=DEGREE {
                    alpha[r][p] = fields[r * (DEGREE + 1) + p].eval(y)?;
                }
            }
            out.push(PathSpec::new(alpha));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_ramp_is_the_diagonal() {
        let p = PathSpec::new([[0.0, 1.0, 0.0, 0.0, 0.0]; 2]);
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let (x, y) = p.eval(t);
            assert!((x - t).abs() < 1e-15 && (y - t).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_component_is_pinned() {
        let p = PathSpec::new([[0.7, 0.0, 0.0, 0.0, 0.0], [0.0, -2.0, 0.0, 0.0, 1.0]]);
        assert!(p.is_degenerate(0));
        assert!(!p.is_degenerate(1));
        assert_eq!(p.eval(0.3).0, 0.5);
        assert_eq!(p.eval(0.0).1, 1.0);
    }

    #[test]
    fn extremes_match_dense_sampling() {
        let cases = [
            [0.1, -3.0, 20.0, -50.0, 40.0],
            [0.0, 1.0, -6.0, 6.0, 0.0],
            [1.0, 0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0],
            [0.3, 0.2, -0.4, 2.0, -3.0],
        ];
        for a in cases {
            let (lo, hi) = extremes(&a);
            let (mut slo, mut shi) = (f64::INFINITY, f64::NEG_INFINITY);
            for k in 0..=100_000 {
                let v = poly(&a, k as f64 / 100_000.0);
                slo = slo.min(v);
                shi = shi.max(v);
            }
            assert!(lo <= slo + 1e-12 && (lo - slo).abs() < 1e-8, "{a:?}");
            assert!(hi >= shi - 1e-12 && (hi - shi).abs() < 1e-8, "{a:?}");
        }
    }

    #[test]
    fn generated_paths_stay_in_the_square() {
        let paths = make_paths(42, 12, &PerlinParams::default()).unwrap();
        assert_eq!(paths.len(), 144);
        for p in &paths {
            for k in 0..=100 {
                let (x, y) = p.eval(k as f64 / 100.0);
                assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
            }
        }
    }

    #[test]
    fn origin_row_has_zero_coefficients() {
        // All coefficient fields vanish on the lattice, including y = (0, 0).
        let paths = make_paths(7, 4, &PerlinParams::default()).unwrap();
        assert!(paths[0].is_degenerate(0) && paths[0].is_degenerate(1));
        assert!(!paths[5].is_degenerate(0));
    }
}
