//! Ground-truth phantoms.

use serde::{Deserialize, Serialize};
use structure_core::{Error, GridFn, GridShape, Result};

/// Concentric annuli around `center`: the value is `amplitudes[k]` for radii in
/// `[radii[k-1], radii[k])`, and `background` beyond the last radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RingSpec {
    pub center: [f64; 2],
    pub radii: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub background: f64,
}

impl Default for RingSpec {
    fn default() -> Self {
        Self {
            center: [0.5, 0.5],
            radii: vec![0.1, 0.2, 0.3, 0.4],
            amplitudes: vec![1.0, 0.2, 1.0, 0.2],
            background: 0.0,
        }
    }
}

impl RingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() || self.radii.len() != self.amplitudes.len() {
            return Err(Error::InvalidConfig("ring phantom needs one amplitude per radius".into()));
        }
        if self.radii[0] <= 0.0 || self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("ring radii must be positive and ascending".into()));
        }
        let all = self.amplitudes.iter().chain([&self.background]).chain(&self.center);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("ring phantom values must be finite".into()));
        }
        Ok(())
    }

    pub fn value_at_radius(&self, r: f64) -> f64 {
        self.radii.iter().position(|&rk| r < rk).map_or(self.background, |k| self.amplitudes[k])
    }

    /// Sum of `perimeter x |jump|` with the l1 (anisotropic) perimeter `8r` of
    /// each circle, i.e. the anisotropic total variation of the continuous phantom.
    pub fn anisotropic_tv(&self) -> f64 {
        let mut tv = 0.0;
        for (k, &r) in self.radii.iter().enumerate() {
            let outside = self.amplitudes.get(k + 1).copied().unwrap_or(self.background);
            tv += 8.0 * r * (self.amplitudes[k] - outside).abs();
        }
        tv
    }
}

/// Ring phantom sampled at cell centres of an `nx x nx` unit-square grid.
pub fn make_signal(spec: &RingSpec, nx: usize) -> Result<GridFn> {
    spec.validate()?;
    if nx < 8 {
        return Err(Error::InvalidGrid(format!("signal grid must be at least 8 cells wide, got {nx}")));
    }
    let [cx, cy] = spec.center;
    GridFn::from_fn(GridShape::unit_square(nx)?, |x, y| spec.value_at_radius((x - cx).hypot(y - cy)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use structure_core::grid::discrete_gradient_matrix;

    #[test]
    fn radially_symmetric_and_non_negative() {
        let spec = RingSpec::default();
        let u = make_signal(&spec, 64).unwrap();
        assert!(u.data().iter().all(|&v| v >= 0.0));
        let n = 64;
        for i in 0..n {
            for j in 0..n {
                // Mirror images and the transpose sit at the same radius.
                let v = u.get(i, j);
                assert_eq!(v, u.get(n - 1 - i, j));
                assert_eq!(v, u.get(i, n - 1 - j));
                assert_eq!(v, u.get(j, i));
            }
        }
        assert_eq!(u.get(32, 32), 1.0);
        assert_eq!(u.get(0, 0), 0.0);
    }

    #[test]
    fn discrete_tv_approaches_perimeter_sum() {
        let spec = RingSpec::default();
        let exact = spec.anisotropic_tv();
        assert!((exact - 4.48).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for n in [64, 128, 256] {
            let u = make_signal(&spec, n).unwrap();
            let g = discrete_gradient_matrix(u.shape()).apply(u.data()).unwrap();
            let tv = g.iter().map(|v| v.abs()).sum::<f64>() * u.cell_area();
            let err = (tv - exact).abs() / exact;
            assert!(err < 0.05, "n={n}: {tv} vs {exact}");
            assert!(err <= prev + 1e-3);
            prev = err;
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(make_signal(&RingSpec::default(), 4).is_err());
        let bad = RingSpec { radii: vec![0.3, 0.2], amplitudes: vec![1.0, 1.0], ..Default::default() };
        assert!(make_signal(&bad, 16).is_err());
        let short = RingSpec { amplitudes: vec![1.0], ..Default::default() };
        assert!(make_signal(&short, 16).is_err());
    }
}
