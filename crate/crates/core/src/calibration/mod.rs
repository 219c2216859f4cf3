//! Parameter sweeps, noise injection and the scaling studies.

pub mod dyadic;
pub mod noise;
pub mod restriction;
pub mod sweep;
pub mod theta;

pub use dyadic::{dyadic_noise, noise_scaling_study, DyadicNoiseSpec, NoiseDistribution, NoiseScalingRow};
pub use noise::{inject_noise, NoiseKind, NoiseModel};
pub use restriction::{cell_averages, restriction_study, RestrictionRow, RestrictionStudy};
pub use sweep::{contrast, sweep, CalibrationReport, SweepProblem, ThetaRecord};
pub use theta::ThetaGrid;

/// Ordered parallel map when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub(crate) fn ordered_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn ordered_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Least-squares slope of `log2(y)` against `x`, negated: the decay order of
/// `y ~ 2^(-order x)`. `None` with fewer than two positive samples.
pub fn decay_order(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|&(x, y)| (x, y.log2())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}
