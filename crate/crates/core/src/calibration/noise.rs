use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFn;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// I.i.d. zero-mean Gaussian per measurement cell.
    #[default]
    White,
}

/// Additive measurement noise rescaled to an exact signal-to-noise ratio
/// `||b||_2 / ||eta||_2`. No target means no noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub target_snr: Option<f64>,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { kind: NoiseKind::White, target_snr: Some(25.0), seed: 0 }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self { target_snr: None, ..Default::default() }
    }
}

pub fn inject_noise(b: &GridFn, nm: &NoiseModel) -> Result<GridFn> {
    let Some(snr) = nm.target_snr else {
        return Ok(b.clone());
    };
    if !(snr.is_finite() && snr > 0.0) {
        return Err(Error::InvalidConfig(format!("target SNR must be positive, got {snr}")));
    }
    let nb = b.data().iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(nm.seed);
    let eta: Vec<f64> = (0..b.data().len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let ne = eta.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = nb / (snr * ne);
    b.with_data(b.data().iter().zip(&eta).map(|(v, e)| v + scale * e).collect())
}
