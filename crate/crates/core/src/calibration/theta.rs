use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tensor grid of calibration parameters in `[0, 1]^dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawThetaGrid")]
pub struct ThetaGrid {
    axes: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawThetaGrid {
    axes: Vec<Vec<f64>>,
}

impl TryFrom<RawThetaGrid> for ThetaGrid {
    type Error = Error;

    fn try_from(r: RawThetaGrid) -> Result<Self> {
        ThetaGrid::new(r.axes)
    }
}

impl ThetaGrid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidConfig(format!("theta grid must have 1 or 2 axes, got {}", axes.len())));
        }
        for a in &axes {
            if a.is_empty() {
                return Err(Error::InvalidConfig("empty theta axis".into()));
            }
            if let Some(&value) = a.iter().find(|t| !(0.0..=1.0).contains(*t)) {
                return Err(Error::ThetaOutOfRange { value });
            }
            if a.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidConfig("theta axis must be strictly ascending".into()));
            }
        }
        Ok(Self { axes })
    }

    /// `0, step, 2 step, ..., 1` on each of `dim` axes.
    pub fn uniform(dim: usize, step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1.0) {
            return Err(Error::InvalidConfig(format!("theta step {step} outside (0, 1]")));
        }
        let n = (1.0 / step).round() as usize;
        if ((n as f64) * step - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("theta step {step} does not divide [0, 1]")));
        }
        let axis: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        Self::new(vec![axis; dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    /// All grid points, first axis slowest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        match self.axes.as_slice() {
            [a] => a.iter().map(|&t| vec![t]).collect(),
            [a, b] => a.iter().flat_map(|&s| b.iter().map(move |&t| vec![s, t])).collect(),
            _ => unreachable!("validated"),
        }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether `theta` lies in the bounding box of the grid.
    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && self.axes.iter().zip(theta).all(|(a, &t)| a[0] <= t && t <= a[a.len() - 1])
    }
}
