use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::calibration::noise::{inject_noise, NoiseModel};
use crate::calibration::ordered_map;
use crate::calibration::theta::ThetaGrid;
use crate::emd::EmdConfig;
use crate::error::{Error, Result};
use crate::forward::OperatorFamily;
use crate::grid::{GridFn, GridShape};
use crate::inversion::{residual, InversionConfig, ResidualReport};

/// `(max - min) / (max + min)` of non-negative values with a positive sum.
pub fn contrast(values: &[f64]) -> Result<f64> {
    if values.is_empty() || values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::NonPositiveValue);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max + min <= 0.0 {
        return Err(Error::NonPositiveValue);
    }
    Ok((max - min) / (max + min))
}

/// The fixed ingredients of a sweep: operator family, ground truth and the
/// measurement geometry.
#[derive(Clone, Debug)]
pub struct SweepProblem {
    pub family: OperatorFamily,
    pub u_true: GridFn,
    pub measurement: GridShape,
    pub theta_hat: Vec<f64>,
}

impl SweepProblem {
    pub fn new(family: OperatorFamily, u_true: GridFn, measurement: GridShape, theta_hat: Vec<f64>) -> Result<Self> {
        if family.cols() != u_true.data().len() || family.rows() != measurement.len() {
            return Err(Error::DimensionMismatch(format!(
                "family maps {} -> {}, signal has {} cells and measurement grid {}",
                family.cols(),
                family.rows(),
                u_true.data().len(),
                measurement.len()
            )));
        }
        family.weights(&theta_hat)?;
        Ok(Self { family, u_true, measurement, theta_hat })
    }

    /// Clean data `L_theta_hat u_true`.
    pub fn clean_data(&self) -> Result<GridFn> {
        let b = self.family.at(&self.theta_hat)?.apply(self.u_true.data())?;
        GridFn::new(self.measurement, b)
    }

    /// Residual report at a single parameter value.
    pub fn evaluate(&self, b_noisy: &GridFn, theta: &[f64], inv: &InversionConfig, emd: &EmdConfig) -> Result<ResidualReport> {
        residual(&self.family.at(theta)?, b_noisy, self.u_true.shape(), inv, emd)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaRecord {
    pub theta: Vec<f64>,
    pub struc: Option<f64>,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub valid: bool,
    /// Solver error message for invalid points.
    pub error: Option<String>,
    /// Whether the transport solve met its tolerance.
    pub emd_converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measures<T> {
    pub struc: T,
    pub l1: T,
    pub l2: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub noise: NoiseModel,
    pub inversion: InversionConfig,
    pub emd: EmdConfig,
    pub signal_cells: usize,
    pub measurement_cells: usize,
    pub invalid_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub theta_grid: ThetaGrid,
    pub theta_hat: Vec<f64>,
    pub records: Vec<ThetaRecord>,
    /// `None` when a column has no usable values.
    pub contrast: Measures<Option<f64>>,
    pub minimizer: Measures<Option<Vec<f64>>>,
    pub metadata: RunMetadata,
}

impl CalibrationReport {
    /// Flat table with columns `theta1, theta2, struc, l1, l2, valid`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta1,theta2,struc,l1,l2,valid\n");
        let cell = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.records {
            let t2 = r.theta.get(1).map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.theta[0],
                t2,
                cell(r.struc),
                cell(r.l1),
                cell(r.l2),
                r.valid
            );
        }
        out
    }

    /// Euclidean distance between the structure minimiser and the truth.
    pub fn struc_error(&self) -> Option<f64> {
        let m = self.minimizer.struc.as_ref()?;
        Some(m.iter().zip(&self.theta_hat).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
    }
}

fn argmin(records: &[ThetaRecord], pick: impl Fn(&ThetaRecord) -> Option<f64>) -> Option<Vec<f64>> {
    let mut best: Option<(f64, &ThetaRecord)> = None;
    for r in records.iter().filter(|r| r.valid) {
        if let Some(v) = pick(r) {
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, r));
            }
        }
    }
    best.map(|(_, r)| r.theta.clone())
}

fn column_contrast(records: &[ThetaRecord], pick: impl Fn(&ThetaRecord) -> Option<f64>) -> Option<f64> {
    let v: Vec<f64> = records.iter().filter(|r| r.valid).filter_map(pick).collect();
    contrast(&v).ok()
}

/// Evaluates the residual measures at every grid point with one shared noise
/// realisation. Failures mark the point invalid instead of aborting.
pub fn sweep(
    problem: &SweepProblem,
    grid: &ThetaGrid,
    nm: &NoiseModel,
    inv: &InversionConfig,
    emd: &EmdConfig,
) -> Result<CalibrationReport> {
    if grid.dim() != problem.family.dim() {
        return Err(Error::DimensionMismatch(format!(
            "theta grid has {} axes, family {}",
            grid.dim(),
            problem.family.dim()
        )));
    }
    if !grid.contains(&problem.theta_hat) {
        return Err(Error::InvalidConfig("true parameter lies outside the theta grid".into()));
    }
    inv.validate()?;
    emd.validate()?;
    let b_noisy = inject_noise(&problem.clean_data()?, nm)?;
    let points = grid.points();
    let records = ordered_map(&points, |theta| match problem.evaluate(&b_noisy, theta, inv, emd) {
        Ok(rep) => ThetaRecord {
            theta: theta.clone(),
            struc: Some(rep.struc_value),
            l1: Some(rep.l1_value),
            l2: Some(rep.l2_value),
            valid: true,
            error: None,
            emd_converged: rep.emd_converged,
        },
        Err(e) => ThetaRecord {
            theta: theta.clone(),
            struc: None,
            l1: None,
            l2: None,
            valid: false,
            error: Some(e.to_string()),
            emd_converged: false,
        },
    });
    let invalid_points = records.iter().filter(|r| !r.valid).count();
    Ok(CalibrationReport {
        theta_grid: grid.clone(),
        theta_hat: problem.theta_hat.clone(),
        contrast: Measures {
            struc: column_contrast(&records, |r| r.struc),
            l1: column_contrast(&records, |r| r.l1),
            l2: column_contrast(&records, |r| r.l2),
        },
        minimizer: Measures {
            struc: argmin(&records, |r| r.struc),
            l1: argmin(&records, |r| r.l1),
            l2: argmin(&records, |r| r.l2),
        },
        metadata: RunMetadata {
            noise: nm.clone(),
            inversion: inv.clone(),
            emd: emd.clone(),
            signal_cells: problem.u_true.data().len(),
            measurement_cells: problem.measurement.len(),
            invalid_points,
        },
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{make_family, PerlinParams};
    use crate::inversion::Regularizer;

    #[test]
    fn contrast_examples() {
        assert_eq!(contrast(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert_eq!(contrast(&[1.0, 3.0]).unwrap(), 0.5);
        assert!(contrast(&[1.0, -1.0]).is_err());
        assert!(contrast(&[]).is_err());
        assert!(contrast(&[0.0, 0.0]).is_err());
        let v = [0.3, 0.7, 1.9];
        let c = contrast(&v).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| x * 4.0).collect();
        assert_eq!(contrast(&scaled).unwrap(), c);
    }

    fn small_problem() -> SweepProblem {
        let fam = make_family(5, 8, 10, 1, &PerlinParams::default()).unwrap();
        let u = GridFn::from_fn(GridShape::unit_square(8).unwrap(), |x, y| {
            if (x - 0.5).hypot(y - 0.5) < 0.3 { 1.0 } else { 0.2 }
        })
        .unwrap();
        SweepProblem::new(fam, u, GridShape::unit_square(10).unwrap(), vec![0.0]).unwrap()
    }

    #[test]
    fn degenerate_single_point_sweep() {
        let p = small_problem();
        let grid = ThetaGrid::new(vec![vec![0.0]]).unwrap();
        let inv = InversionConfig { regularizer: Regularizer::Tikhonov, lambda: 1e-4, ..Default::default() };
        let rep = sweep(&p, &grid, &NoiseModel::noiseless(), &inv, &EmdConfig::default()).unwrap();
        assert_eq!(rep.minimizer.struc, Some(vec![0.0]));
        assert_eq!(rep.minimizer.l2, Some(vec![0.0]));
        let b = p.clean_data().unwrap();
        let sb = crate::emd::structure(&b, &EmdConfig::default()).unwrap().value;
        assert!(rep.records[0].struc.unwrap() < 1e-3 * sb);
    }

    #[test]
    fn sweep_is_deterministic_and_tabulates() {
        let p = small_problem();
        let grid = ThetaGrid::uniform(1, 0.5).unwrap();
        let cfg = EmdConfig { max_iter: 2000, ..Default::default() };
        let a = sweep(&p, &grid, &NoiseModel::default(), &InversionConfig::default(), &cfg).unwrap();
        let b = sweep(&p, &grid, &NoiseModel::default(), &InversionConfig::default(), &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let csv = a.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("theta1,theta2,struc,l1,l2,valid\n0,,"));
        for m in [&a.minimizer.struc, &a.minimizer.l1, &a.minimizer.l2] {
            assert!(grid.points().contains(m.as_ref().unwrap()));
        }
    }

    #[test]
    fn failures_are_recorded_not_dropped() {
        let p = small_problem();
        let grid = ThetaGrid::uniform(1, 0.5).unwrap();
        let inv = InversionConfig { inner_max_iter: Some(1), inner_tol: 1e-15, ..Default::default() };
        let rep = sweep(&p, &grid, &NoiseModel::default(), &inv, &EmdConfig::default()).unwrap();
        assert_eq!(rep.records.len(), 3);
        assert_eq!(rep.metadata.invalid_points, 3);
        assert!(rep.records.iter().all(|r| !r.valid && r.error.is_some()));
        assert_eq!(rep.minimizer.struc, None);
    }

    #[test]
    fn rejects_mismatched_grid() {
        let p = small_problem();
        let grid = ThetaGrid::uniform(2, 0.5).unwrap();
        assert!(sweep(&p, &grid, &NoiseModel::default(), &InversionConfig::default(), &EmdConfig::default()).is_err());
    }
}
