//! `structcal`: command-line front end for structure-based calibration.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod signal;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use structure_core::calibration::{sweep, SweepProblem};
use structure_core::emd::{emd, structure, EmdConfig, EmdSolver};
use structure_core::forward::{make_family, OperatorFamily};
use structure_core::inversion::Regularizer;
use structure_core::inversion::residual;
use structure_core::{GridFn, GridShape, SparseOp};

pub use config::{ExperimentConfig, ExperimentId};
pub use error::{CliError, CliResult};
use output::{read_json, ArtifactWriter};

#[derive(Debug, Parser)]
#[command(name = "structcal", version, about = "Structure-based diagnostics for forward-operator calibration")]
pub struct Cli {
    /// TOML run configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides both the operator and the noise seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Artifact directory for runs (default `out`); output file for
    /// `make-op` and `invert`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parameter sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SolverArg {
    PrimalDual,
    NetworkSimplex,
}

impl From<SolverArg> for EmdSolver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::PrimalDual => EmdSolver::PrimalDual,
            SolverArg::NetworkSimplex => EmdSolver::NetworkSimplex,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Earth mover's distance between two grid densities; prints the value.
    Emd {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Writes the optimal flux here.
        #[arg(long)]
        flux: Option<PathBuf>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Primal step.
        #[arg(long)]
        mu: Option<f64>,
        /// Dual step.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        solver: Option<SolverArg>,
    },
    /// Structure of a grid function; prints the value.
    Structure {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        flux: Option<PathBuf>,
        #[arg(long)]
        solver: Option<SolverArg>,
    },
    /// Random line-integral operator at one parameter; `--out` names the
    /// operator file (default `operator.json`).
    MakeOp {
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Member to write, e.g. `0.5,0.5`; defaults to the configured truth.
        #[arg(long, value_delimiter = ',')]
        theta: Option<Vec<f64>>,
        /// Also writes the whole family here, for `calibrate`.
        #[arg(long)]
        family: Option<PathBuf>,
    },
    /// Regularised reconstruction; `--out` names the reconstruction file
    /// (default `reconstruction.json`). Prints the residual measures.
    Invert {
        #[arg(long)]
        op: PathBuf,
        /// Measurement grid function.
        #[arg(long, alias = "data")]
        b: PathBuf,
        #[arg(long)]
        reg: Option<RegArg>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        bregman_mu: Option<f64>,
        #[arg(long)]
        bregman_iters: Option<usize>,
        /// Signal grid width; inferred from a square domain if omitted.
        #[arg(long)]
        nx: Option<usize>,
        /// Writes the residual `b - L u` here.
        #[arg(long)]
        residual: Option<PathBuf>,
        /// Writes the residual's optimal flux here.
        #[arg(long)]
        flux: Option<PathBuf>,
    },
    /// Parameter sweep for a given family and ground truth.
    Calibrate {
        #[arg(long)]
        family: PathBuf,
        /// Ground-truth signal grid function.
        #[arg(long)]
        signal: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        theta_hat: Vec<f64>,
        /// Measurement grid width; inferred if the family has a square range.
        #[arg(long)]
        ny: Option<usize>,
    },
    /// Runs one of the configured experiments.
    Experiment {
        #[arg(long)]
        id: Option<ExperimentId>,
    },
    /// Structure and L2 norm of dyadic noise across refinement levels.
    NoiseScaling,
    /// Structure of cell averages of smooth fields across refinement levels.
    RestrictionStudy,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RegArg {
    Tv,
    Tikhonov,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Emd { .. } => "emd",
            Self::Structure { .. } => "structure",
            Self::MakeOp { .. } => "make-op",
            Self::Invert { .. } => "invert",
            Self::Calibrate { .. } => "calibrate",
            Self::Experiment { .. } => "experiment",
            Self::NoiseScaling => "noise-scaling",
            Self::RestrictionStudy => "restriction-study",
        }
    }
}

/// Resolves the configuration, runs the command and writes its artifacts.
/// Returns a short human-readable summary.
pub fn run(cli: &Cli) -> CliResult<String> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.reseed(s);
    }
    if let Command::Experiment { id: Some(id) } = &cli.command {
        cfg.id = *id;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        // Only the first call in a process can size the global pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if let Some(summary) = run_tool(cli, &cfg)? {
        return Ok(summary);
    }
    let dir = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let mut out = ArtifactWriter::create(dir)?;
    let name = cli.command.name();
    match execute(&cli.command, &cfg, &mut out) {
        Ok(summary) => {
            out.finish(name, &cfg)?;
            Ok(summary)
        }
        Err(e) => {
            let _ = out.fail(name, &cfg, &e);
            Err(e)
        }
    }
}

fn emd_cfg(cfg: &ExperimentConfig, solver: Option<SolverArg>) -> EmdConfig {
    let mut e = cfg.emd.clone();
    if let Some(s) = solver {
        e.solver = s.into();
    }
    e
}

fn write_file<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("artifacts serialise");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// Single-result commands: read inputs, write exactly the requested files and
/// return the printed summary. `None` for commands with an artifact directory.
fn run_tool(cli: &Cli, cfg: &ExperimentConfig) -> CliResult<Option<String>> {
    let summary = match &cli.command {
        Command::Emd { a, b, flux, max_iter, mu, tau, tol, solver } => {
            if cli.out.is_some() {
                return Err(CliError::Config("emd writes no directory; use --flux for the flux".into()));
            }
            let mut e = emd_cfg(cfg, *solver);
            e.max_iter = max_iter.unwrap_or(e.max_iter);
            e.mu_step = mu.unwrap_or(e.mu_step);
            e.tau_step = tau.unwrap_or(e.tau_step);
            e.tol = tol.unwrap_or(e.tol);
            e.validate()?;
            let r = emd(&read_json(a)?, &read_json(b)?, &e)?;
            if let Some(p) = flux {
                write_file(p, &r.flux)?;
            }
            json!({ "value": r.value, "iterations": r.iterations, "converged": r.converged, "residual": r.residual })
        }
        Command::Structure { f, flux, solver } => {
            if cli.out.is_some() {
                return Err(CliError::Config("structure writes no directory; use --flux for the flux".into()));
            }
            let r = structure(&read_json(f)?, &emd_cfg(cfg, *solver))?;
            if let Some(p) = flux {
                write_file(p, &r.flux)?;
            }
            json!({
                "value": r.value, "mean": r.mean, "iterations": r.iterations,
                "converged": r.converged, "residual": r.residual
            })
        }
        Command::MakeOp { nx, ny, dim, theta, family } => {
            let (nx, ny) = (nx.unwrap_or(cfg.nx), ny.unwrap_or(cfg.ny));
            let fam = make_family(cfg.operator_seed, nx, ny, *dim, &cfg.perlin)?;
            let theta = match theta {
                Some(t) => t.clone(),
                None => cfg.theta_hat(*dim)?,
            };
            let path = cli.out.clone().unwrap_or_else(|| PathBuf::from("operator.json"));
            write_file(&path, &fam.at(&theta)?)?;
            if let Some(p) = family {
                write_file(p, &fam)?;
            }
            json!({ "theta": theta, "rows": fam.rows(), "cols": fam.cols(), "seed": cfg.operator_seed })
        }
        Command::Invert { op, b, reg, lambda, bregman_mu, bregman_iters, nx, residual: res_path, flux } => {
            let l: SparseOp = read_json(op)?;
            let data: GridFn = read_json(b)?;
            let mut inv = cfg.inversion.clone();
            if let Some(r) = reg {
                inv.regularizer = match r {
                    RegArg::Tv => Regularizer::Tv,
                    RegArg::Tikhonov => Regularizer::Tikhonov,
                };
            }
            inv.lambda = lambda.unwrap_or(inv.lambda);
            inv.bregman_mu = bregman_mu.unwrap_or(inv.bregman_mu);
            inv.bregman_iters = bregman_iters.unwrap_or(inv.bregman_iters);
            let nx = match nx {
                Some(n) => *n,
                None => square_side(l.cols(), "operator domain")?,
            };
            let rep = residual(&l, &data, GridShape::unit_square(nx)?, &inv, &cfg.emd)?;
            let path = cli.out.clone().unwrap_or_else(|| PathBuf::from("reconstruction.json"));
            write_file(&path, &rep.reconstruction)?;
            if let Some(p) = res_path {
                write_file(p, &rep.residual)?;
            }
            if let (Some(p), Some(f)) = (flux, &rep.flux) {
                write_file(p, f)?;
            }
            json!({ "struc": rep.struc_value, "l1": rep.l1_value, "l2": rep.l2_value, "emd_converged": rep.emd_converged })
        }
        _ => return Ok(None),
    };
    Ok(Some(summary.to_string()))
}

fn square_side(n: usize, what: &str) -> CliResult<usize> {
    let s = (n as f64).sqrt().round() as usize;
    if s * s == n {
        Ok(s)
    } else {
        Err(CliError::Config(format!("{what} has {n} cells, not a square grid; pass its width")))
    }
}

fn execute(cmd: &Command, cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> CliResult<String> {
    match cmd {
        Command::Calibrate { family, signal, theta_hat, ny } => {
            let fam: OperatorFamily = read_json(family)?;
            let u: GridFn = read_json(signal)?;
            let ny = match ny {
                Some(n) => *n,
                None => square_side(fam.rows(), "operator range")?,
            };
            let p = SweepProblem::new(fam, u, GridShape::unit_square(ny)?, theta_hat.clone())?;
            let grid = cfg.theta_grid(p.family.dim())?;
            let r = sweep(&p, &grid, &cfg.noise, &cfg.inversion, &cfg.emd)?;
            out.json("report.json", &r)?;
            out.text("sweep.csv", &r.to_csv())?;
            Ok(format!("struc minimiser {:?}, contrast {:?}", r.minimizer.struc, r.contrast.struc))
        }
        Command::Experiment { .. } => run_configured(cfg, out),
        Command::Emd { .. } | Command::Structure { .. } | Command::MakeOp { .. } | Command::Invert { .. } => {
            unreachable!("handled by run_tool")
        }
        Command::NoiseScaling => {
            let rows = experiments::run_noise_scaling(cfg)?;
            experiments::write_noise_scaling(out, &rows)?;
            Ok(format!("{} levels", rows.len()))
        }
        Command::RestrictionStudy => {
            let s = experiments::run_restriction(cfg)?;
            experiments::write_restriction(out, &s)?;
            Ok(s.iter().map(|(n, s)| format!("{n}: order {:?}", s.order)).collect::<Vec<_>>().join("; "))
        }
    }
}

fn run_configured(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> CliResult<String> {
    use experiments::*;
    match cfg.id {
        ExperimentId::One => {
            let e = run_experiment1(cfg)?;
            write_experiment1(out, &e)?;
            Ok(format!("minimisers {:?}, contrasts {:?}", e.report.minimizer, e.report.contrast))
        }
        ExperimentId::Two => {
            let runs = run_experiment2(cfg)?;
            write_experiment2(out, &runs)?;
            Ok(runs.iter().map(|(s, r)| format!("snr {s}: {:?}", r.contrast)).collect::<Vec<_>>().join("\n"))
        }
        ExperimentId::Three => {
            let runs = run_experiment3(cfg)?;
            write_experiment3(out, &runs)?;
            Ok(runs
                .iter()
                .map(|(ny, r)| format!("ny {ny}: theta_s {:?}, contrast {:?}", r.minimizer.struc, r.contrast.struc))
                .collect::<Vec<_>>()
                .join("\n"))
        }
        ExperimentId::NoiseScaling => {
            let rows = run_noise_scaling(cfg)?;
            write_noise_scaling(out, &rows)?;
            Ok(format!("{} levels", rows.len()))
        }
        ExperimentId::Restriction => {
            let s = run_restriction(cfg)?;
            write_restriction(out, &s)?;
            Ok(format!("{} fields", s.len()))
        }
    }
}
