use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::calibration::ordered_map;
use crate::emd::{structure, EmdConfig};
use crate::error::{Error, Result};
use crate::grid::{GridFn, GridShape};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseDistribution {
    #[default]
    Gaussian,
    /// Uniform on `[mu - sqrt(3) sigma, mu + sqrt(3) sigma]`.
    Uniform,
}

/// Piecewise-constant noise with i.i.d. weights on the `2^(ell d)` dyadic
/// cubes of the unit cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DyadicNoiseSpec {
    pub d: usize,
    pub ell: u32,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default)]
    pub distribution: NoiseDistribution,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

impl DyadicNoiseSpec {
    pub fn new(d: usize, ell: u32, sigma: f64, seed: u64) -> Self {
        Self { d, ell, mu: 0.0, sigma, distribution: NoiseDistribution::Gaussian, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidConfig("dyadic noise needs d >= 1".into()));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidConfig(format!("bad weight moments mu={}, sigma={}", self.mu, self.sigma)));
        }
        if (self.ell as usize).saturating_mul(self.d) >= 48 {
            return Err(Error::InvalidConfig(format!("2^(ell d) cubes too many for ell={}, d={}", self.ell, self.d)));
        }
        Ok(())
    }

    /// Number of cubes, `2^(ell d)`.
    pub fn cubes(&self) -> usize {
        1usize << (self.ell as usize * self.d)
    }

    /// The i.i.d. cube weights in row-major cube order.
    pub fn weights(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok((0..self.cubes()).map(|_| self.draw(&mut rng)).collect())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let z: f64 = match self.distribution {
            NoiseDistribution::Gaussian => rng.sample(StandardNormal),
            NoiseDistribution::Uniform => 3f64.sqrt() * rng.random_range(-1.0..1.0),
        };
        self.mu + self.sigma * z
    }
}

/// Samples `h_ell` on a `resolution`-cell-per-axis grid of the unit square
/// (`d = 2`) or unit interval (`d = 1`, stored as `resolution x 1`).
pub fn dyadic_noise(spec: &DyadicNoiseSpec, resolution: usize) -> Result<GridFn> {
    spec.validate()?;
    if spec.d > 2 {
        return Err(Error::InvalidConfig(format!("grid sampling supports d <= 2, got {}", spec.d)));
    }
    let blocks = 1usize << spec.ell;
    if resolution == 0 || resolution % blocks != 0 {
        return Err(Error::ResolutionMismatch { resolution, level: spec.ell });
    }
    let w = spec.weights()?;
    let per = resolution / blocks;
    let h = 1.0 / resolution as f64;
    if spec.d == 1 {
        let shape = GridShape::new(resolution, 1, h, 1.0)?;
        return GridFn::new(shape, (0..resolution).map(|i| w[i / per]).collect());
    }
    let shape = GridShape::unit_square(resolution)?;
    let mut data = Vec::with_capacity(shape.len());
    for i in 0..resolution {
        for j in 0..resolution {
            data.push(w[(i / per) * blocks + j / per]);
        }
    }
    GridFn::new(shape, data)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseScalingRow {
    pub ell: u32,
    pub trials: usize,
    /// Mean structure over trials; `None` where no transport solve is done.
    pub mean_struc: Option<f64>,
    pub mean_l2_sq: f64,
    /// `sigma (-eps log2 eps)`, `eps = 2^-ell`; two-dimensional case only.
    pub bound: Option<f64>,
    pub unconverged: usize,
}

impl NoiseScalingRow {
    pub fn within_bound(&self) -> Option<bool> {
        Some(self.mean_struc? <= self.bound?)
    }
}

/// Monte-Carlo averages of `struc(h_ell)` and `||h_ell||_2^2` for zero-mean
/// noise. For `d = 2` each trial is solved on a `resolution^2` grid; other
/// dimensions report only the L2 norm, computed from the cube weights.
pub fn noise_scaling_study(
    d: usize,
    ells: &[u32],
    trials: usize,
    sigma: f64,
    seed: u64,
    resolution: usize,
    emd: &EmdConfig,
) -> Result<Vec<NoiseScalingRow>> {
    if trials == 0 {
        return Err(Error::InvalidConfig("noise scaling study needs at least one trial".into()));
    }
    emd.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(ells.len());
    for &ell in ells {
        let specs: Vec<DyadicNoiseSpec> =
            (0..trials).map(|_| DyadicNoiseSpec::new(d, ell, sigma, master.next_u64())).collect();
        let outcomes = ordered_map(&specs, |spec| -> Result<(f64, Option<(f64, bool)>)> {
            let w = spec.weights()?;
            let l2_sq = w.iter().map(|x| x * x).sum::<f64>() / w.len() as f64;
            if d != 2 {
                return Ok((l2_sq, None));
            }
            let h = dyadic_noise(spec, resolution)?;
            let s = structure(&h, emd)?;
            Ok((l2_sq, Some((s.value, s.converged))))
        });
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        let n = trials as f64;
        let mean_l2_sq = outcomes.iter().map(|o| o.0).sum::<f64>() / n;
        let (mean_struc, unconverged, bound) = if d == 2 {
            let s: f64 = outcomes.iter().filter_map(|o| o.1).map(|o| o.0).sum();
            let bad = outcomes.iter().filter_map(|o| o.1).filter(|o| !o.1).count();
            let eps = 2f64.powi(-(ell as i32));
            (Some(s / n), bad, Some(sigma * (-eps * eps.log2())))
        } else {
            (None, 0, None)
        };
        rows.push(NoiseScalingRow { ell, trials, mean_struc, mean_l2_sq, bound, unconverged });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emd::EmdSolver;

    #[test]
    fn level_zero_is_constant_with_zero_structure() {
        let h = dyadic_noise(&DyadicNoiseSpec::new(2, 0, 1.0, 9), 8).unwrap();
        assert!(h.data().iter().all(|&v| v == h.data()[0]));
        assert_eq!(structure(&h, &EmdConfig::default()).unwrap().value, 0.0);
    }

    #[test]
    fn level_one_has_four_blocks() {
        let h = dyadic_noise(&DyadicNoiseSpec::new(2, 1, 1.0, 3), 8).unwrap();
        let mut vals: Vec<f64> = h.data().to_vec();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        assert_eq!(vals.len(), 4);
        for bi in 0..2 {
            for bj in 0..2 {
                let v = h.get(4 * bi, 4 * bj);
                for i in 4 * bi..4 * bi + 4 {
                    for j in 4 * bj..4 * bj + 4 {
                        assert_eq!(h.get(i, j), v);
                    }
                }
            }
        }
    }

    #[test]
    fn one_dimensional_blocks() {
        let h = dyadic_noise(&DyadicNoiseSpec::new(1, 2, 1.0, 3), 16).unwrap();
        assert_eq!((h.nx(), h.ny()), (16, 1));
        let w = DyadicNoiseSpec::new(1, 2, 1.0, 3).weights().unwrap();
        for i in 0..16 {
            assert_eq!(h.data()[i], w[i / 4]);
        }
    }

    #[test]
    fn resolution_must_be_divisible() {
        let e = dyadic_noise(&DyadicNoiseSpec::new(2, 3, 1.0, 0), 12).unwrap_err();
        assert!(matches!(e, Error::ResolutionMismatch { resolution: 12, level: 3 }));
        assert!(dyadic_noise(&DyadicNoiseSpec::new(3, 1, 1.0, 0), 8).is_err());
    }

    #[test]
    fn weight_moments() {
        for distribution in [NoiseDistribution::Gaussian, NoiseDistribution::Uniform] {
            let mut means = Vec::new();
            for seed in 0..200 {
                let spec = DyadicNoiseSpec { d: 2, ell: 3, mu: 2.0, sigma: 0.5, distribution, seed };
                let w = spec.weights().unwrap();
                means.push(w.iter().sum::<f64>() / w.len() as f64);
            }
            // Each mean has std sigma/8; the grand mean is tighter by sqrt(200).
            let grand = means.iter().sum::<f64>() / means.len() as f64;
            assert!((grand - 2.0).abs() < 3.0 * 0.5 / 8.0 / 200f64.sqrt());
            let inside = means.iter().filter(|m| (**m - 2.0).abs() < 3.0 * 0.5 / 8.0).count();
            assert!(inside >= 195, "{inside}");
        }
    }

    #[test]
    fn l2_norm_in_higher_dimension() {
        let rows = noise_scaling_study(4, &[1, 2], 64, 1.0, 5, 0, &EmdConfig::default()).unwrap();
        for r in rows {
            assert!(r.mean_struc.is_none());
            assert!((r.mean_l2_sq - 1.0).abs() < 3.0 / 8.0, "{r:?}");
        }
    }

    #[test]
    fn small_scaling_study_respects_bound() {
        let cfg = EmdConfig { solver: EmdSolver::NetworkSimplex, ..Default::default() };
        let rows = noise_scaling_study(2, &[1, 2, 3], 8, 1.0, 1, 16, &cfg).unwrap();
        for r in &rows {
            assert!(r.within_bound().unwrap(), "{r:?}");
        }
        assert!(rows[1].mean_struc > rows[2].mean_struc);
    }
}
