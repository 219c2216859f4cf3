//! Classic gradient noise on the unit square, summed over octaves.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar gradient set: the four diagonals and the four axis directions.
const GRADIENTS: [(f64, f64); 8] = [
    (1.0, 1.0),
    (-1.0, 1.0),
    (1.0, -1.0),
    (-1.0, -1.0),
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerlinParams {
    /// Lattice cells per unit length of the first octave.
    pub resolution: u32,
    pub octaves: u32,
    pub persistence: f64,
}

impl Default for PerlinParams {
    fn default() -> Self {
        Self { resolution: 2, octaves: 4, persistence: 0.5 }
    }
}

/// A seeded gradient-noise field. Every octave vanishes on its own lattice,
/// and the first-octave lattice is contained in all finer ones, so the field
/// vanishes at multiples of `1 / resolution`.
#[derive(Clone, Debug)]
pub struct PerlinField {
    params: PerlinParams,
    seed: u64,
    perm: [u8; 512],
}

impl PerlinField {
    pub fn new(params: PerlinParams, seed: u64) -> Result<Self> {
        if params.resolution == 0 || params.octaves == 0 {
            return Err(Error::InvalidConfig("Perlin resolution and octaves must be positive".into()));
        }
        if !(params.persistence.is_finite() && params.persistence > 0.0) {
            return Err(Error::InvalidConfig("Perlin persistence must be positive".into()));
        }
        let mut p: Vec<u8> = (0..=255).collect();
        p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut perm = [0u8; 512];
        for k in 0..512 {
            perm[k] = p[k & 255];
        }
        Ok(Self { params, seed, perm })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &PerlinParams {
        &self.params
    }

    pub fn eval(&self, y: (f64, f64)) -> Result<f64> {
        let inside = |v: f64| (0.0..=1.0).contains(&v);
        if !inside(y.0) || !inside(y.1) {
            return Err(Error::OutOfDomain(y.0, y.1));
        }
        let mut freq = self.params.resolution as f64;
        let mut amp = 1.0;
        let mut total = 0.0;
        for _ in 0..self.params.octaves {
            total += amp * self.noise(y.0 * freq, y.1 * freq);
            freq *= 2.0;
            amp *= self.params.persistence;
        }
        Ok(total)
    }

    fn hash(&self, i: i64, j: i64) -> usize {
        let a = self.perm[(i & 255) as usize] as usize;
        self.perm[a + (j & 255) as usize] as usize
    }

    fn grad(&self, i: i64, j: i64, x: f64, y: f64) -> f64 {
        let (gx, gy) = GRADIENTS[self.hash(i, j) & 7];
        gx * x + gy * y
    }

    fn noise(&self, x: f64, y: f64) -> f64 {
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let (i, j) = (x0 as i64, y0 as i64);
        let (u, v) = (fade(fx), fade(fy));
        let n00 = self.grad(i, j, fx, fy);
        let n10 = self.grad(i + 1, j, fx - 1.0, fy);
        let n01 = self.grad(i, j + 1, fx, fy - 1.0);
        let n11 = self.grad(i + 1, j + 1, fx - 1.0, fy - 1.0);
        let a = n00 + u * (n10 - n00);
        let b = n01 + u * (n11 - n01);
        a + v * (b - a)
    }
}

/// Quintic smoothstep `6t^5 - 15t^4 + 10t^3`.
fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(seed: u64) -> PerlinField {
        PerlinField::new(PerlinParams::default(), seed).unwrap()
    }

    #[test]
    fn vanishes_on_lattice() {
        let f = field(3);
        for i in 0..=2 {
            for j in 0..=2 {
                assert_eq!(f.eval((i as f64 / 2.0, j as f64 / 2.0)).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn deterministic_and_seed_dependent() {
        let y = (0.31, 0.77);
        assert_eq!(field(9).eval(y).unwrap(), field(9).eval(y).unwrap());
        assert_ne!(field(9).eval(y).unwrap(), field(10).eval(y).unwrap());
    }

    #[test]
    fn rejects_points_outside() {
        assert!(matches!(field(1).eval((1.2, 0.5)), Err(Error::OutOfDomain(..))));
        assert!(field(1).eval((0.5, -1e-9)).is_err());
    }

    #[test]
    fn lipschitz_probe() {
        // Each octave has slope at most ~2 * sqrt(2) * freq; sum the bound.
        let f = field(5);
        let k: f64 = (0..4).map(|o| 0.5f64.powi(o) * 2.0 * 2f64.powi(o) * 3.0).sum();
        let h = 1e-4;
        for a in 0..40 {
            for b in 0..40 {
                let y = (a as f64 / 41.0 + 0.01, b as f64 / 41.0 + 0.01);
                let v = f.eval(y).unwrap();
                let dx = (f.eval((y.0 + h, y.1)).unwrap() - v).abs();
                let dy = (f.eval((y.0, y.1 + h)).unwrap() - v).abs();
                assert!(dx <= k * h && dy <= k * h);
            }
        }
    }
}
