//! Drivers for the calibration experiments and the two scaling studies.
//!
//! The `run_*` functions compute; the `write_*` functions turn results into
//! artifact files.

use serde::{Deserialize, Serialize};
use structure_core::calibration::{
    inject_noise, noise_scaling_study, restriction_study, sweep, CalibrationReport, NoiseModel, NoiseScalingRow,
    RestrictionStudy, SweepProblem,
};
use structure_core::emd::EmdConfig;
use structure_core::forward::make_family;
use structure_core::inversion::ResidualReport;
use structure_core::GridShape;

use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{num, opt_num, ArtifactWriter};
use crate::signal::make_signal;

fn problem(cfg: &ExperimentConfig, nx: usize, ny: usize, dim: usize) -> CliResult<SweepProblem> {
    let family = make_family(cfg.operator_seed, nx, ny, dim, &cfg.perlin)?;
    let u = make_signal(&cfg.signal, nx)?;
    Ok(SweepProblem::new(family, u, GridShape::unit_square(ny)?, cfg.theta_hat(dim)?)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Snapshot {
    pub theta: f64,
    pub report: ResidualReport,
}

#[derive(Clone, Debug)]
pub struct Experiment1 {
    pub report: CalibrationReport,
    pub snapshots: Vec<Snapshot>,
}

/// One-parameter sweep, plus residuals and optimal fluxes at the snapshot
/// parameters (computed from the same noisy data as the sweep).
pub fn run_experiment1(cfg: &ExperimentConfig) -> CliResult<Experiment1> {
    cfg.validate()?;
    let p = problem(cfg, cfg.nx, cfg.ny, 1)?;
    let report = sweep(&p, &cfg.theta_grid(1)?, &cfg.noise, &cfg.inversion, &cfg.emd)?;
    let b = inject_noise(&p.clean_data()?, &cfg.noise)?;
    let snapshots = cfg
        .snapshot_thetas
        .iter()
        .map(|&theta| Ok(Snapshot { theta, report: p.evaluate(&b, &[theta], &cfg.inversion, &cfg.emd)? }))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Experiment1 { report, snapshots })
}

/// Two-parameter sweeps, one per noise level, all with the same noise seed.
pub fn run_experiment2(cfg: &ExperimentConfig) -> CliResult<Vec<(f64, CalibrationReport)>> {
    cfg.validate()?;
    let p = problem(cfg, cfg.nx, cfg.ny, 2)?;
    let grid = cfg.theta_grid(2)?;
    cfg.snr_list
        .iter()
        .map(|&snr| {
            let nm = NoiseModel { target_snr: Some(snr), ..cfg.noise.clone() };
            Ok((snr, sweep(&p, &grid, &nm, &cfg.inversion, &cfg.emd)?))
        })
        .collect()
}

/// Two-parameter sweeps over the measurement-grid ladder with a fixed signal
/// grid. Each rung gets its own operator family drawn from the same seed.
pub fn run_experiment3(cfg: &ExperimentConfig) -> CliResult<Vec<(usize, CalibrationReport)>> {
    cfg.validate()?;
    let grid = cfg.theta_grid(2)?;
    cfg.ladder
        .ny_list
        .iter()
        .map(|&ny| {
            let p = problem(cfg, cfg.ladder.nx, ny, 2)?;
            Ok((ny, sweep(&p, &grid, &cfg.noise, &cfg.inversion, &cfg.emd)?))
        })
        .collect()
}

pub fn run_noise_scaling(cfg: &ExperimentConfig) -> CliResult<Vec<NoiseScalingRow>> {
    let ns = &cfg.noise_scaling;
    let emd = EmdConfig { solver: ns.solver, ..cfg.emd.clone() };
    Ok(noise_scaling_study(ns.d, &ns.ells, ns.trials, ns.sigma, cfg.noise.seed, ns.resolution, &emd)?)
}

pub fn run_restriction(cfg: &ExperimentConfig) -> CliResult<Vec<(String, RestrictionStudy)>> {
    let rs = &cfg.restriction;
    let emd = EmdConfig { solver: rs.solver, ..cfg.emd.clone() };
    rs.fields
        .iter()
        .map(|&f| Ok((f.name().to_string(), restriction_study(&move |x, y| f.eval(x, y), &rs.ells, rs.ell_ref, &emd)?)))
        .collect()
}

fn write_report(out: &mut ArtifactWriter, prefix: &str, r: &CalibrationReport) -> CliResult<()> {
    out.json(&format!("{prefix}report.json"), r)?;
    out.text(&format!("{prefix}sweep.csv"), &r.to_csv())?;
    Ok(())
}

fn theta_cell(t: &Option<Vec<f64>>) -> String {
    t.as_ref().map(|v| v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")).unwrap_or_default()
}

pub fn write_experiment1(out: &mut ArtifactWriter, e: &Experiment1) -> CliResult<()> {
    write_report(out, "", &e.report)?;
    let mut summary = String::from("theta,struc,l1,l2\n");
    for s in &e.snapshots {
        let tag = format!("theta_{}", num(s.theta));
        out.json(&format!("{tag}/residual.json"), &s.report.residual)?;
        out.json(&format!("{tag}/reconstruction.json"), &s.report.reconstruction)?;
        if let Some(flux) = &s.report.flux {
            out.json(&format!("{tag}/flux.json"), flux)?;
        }
        summary += &format!(
            "{},{},{},{}\n",
            num(s.theta),
            num(s.report.struc_value),
            num(s.report.l1_value),
            num(s.report.l2_value)
        );
    }
    out.text("snapshots.csv", &summary)?;
    Ok(())
}

pub fn write_experiment2(out: &mut ArtifactWriter, runs: &[(f64, CalibrationReport)]) -> CliResult<()> {
    let mut table = String::from("snr,cont_struc,cont_l1,cont_l2,theta_s,theta_1,theta_2\n");
    for (snr, r) in runs {
        write_report(out, &format!("snr_{}/", num(*snr)), r)?;
        table += &format!(
            "{},{},{},{},{},{},{}\n",
            num(*snr),
            opt_num(r.contrast.struc),
            opt_num(r.contrast.l1),
            opt_num(r.contrast.l2),
            theta_cell(&r.minimizer.struc),
            theta_cell(&r.minimizer.l1),
            theta_cell(&r.minimizer.l2)
        );
    }
    out.text("contrast.csv", &table)?;
    Ok(())
}

pub fn write_experiment3(out: &mut ArtifactWriter, runs: &[(usize, CalibrationReport)]) -> CliResult<()> {
    let mut table = String::from("ny,theta_s,theta_1,theta_2,error_s,cont_struc,cont_l1,cont_l2\n");
    for (ny, r) in runs {
        write_report(out, &format!("ny_{ny}/"), r)?;
        table += &format!(
            "{ny},{},{},{},{},{},{},{}\n",
            theta_cell(&r.minimizer.struc),
            theta_cell(&r.minimizer.l1),
            theta_cell(&r.minimizer.l2),
            opt_num(r.struc_error()),
            opt_num(r.contrast.struc),
            opt_num(r.contrast.l1),
            opt_num(r.contrast.l2)
        );
    }
    out.text("ladder.csv", &table)?;
    Ok(())
}

pub fn write_noise_scaling(out: &mut ArtifactWriter, rows: &[NoiseScalingRow]) -> CliResult<()> {
    out.json("noise_scaling.json", rows)?;
    let mut t = String::from("ell,trials,mean_struc,bound,mean_l2_sq,unconverged\n");
    for r in rows {
        t += &format!(
            "{},{},{},{},{},{}\n",
            r.ell,
            r.trials,
            opt_num(r.mean_struc),
            opt_num(r.bound),
            num(r.mean_l2_sq),
            r.unconverged
        );
    }
    out.text("noise_scaling.csv", &t)?;
    Ok(())
}

pub fn write_restriction(out: &mut ArtifactWriter, studies: &[(String, RestrictionStudy)]) -> CliResult<()> {
    out.json("restriction.json", studies)?;
    let mut t = String::from("field,ell,struc,gap,reference,order\n");
    for (name, s) in studies {
        for r in &s.rows {
            t += &format!(
                "{name},{},{},{},{},{}\n",
                r.ell,
                num(r.struc),
                num(r.gap),
                num(s.reference),
                opt_num(s.order)
            );
        }
    }
    out.text("restriction.csv", &t)?;
    Ok(())
}
