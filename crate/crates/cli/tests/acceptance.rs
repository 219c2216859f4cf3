//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs every criterion by default; pass criterion numbers to run a subset,
//! e.g. `cargo test -p structcal --test acceptance -- 2 9`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use structure_cli::config::{ExperimentConfig, RestrictionConfig, SmoothField};
use structure_cli::experiments::{run_experiment1, run_experiment2, run_experiment3, run_restriction};
use structure_core::calibration::noise_scaling_study;
use structure_core::emd::{emd, emd_exact, structure_exact, EmdConfig, EmdSolver};
use structure_core::forward::{make_family, PerlinParams};
use structure_core::grid::{discrete_gradient_matrix, norm_l2};
use structure_core::inversion::solve_tikhonov;
use structure_core::{GridFn, GridShape, SparseOp};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn simplex() -> EmdConfig {
    EmdConfig { solver: EmdSolver::NetworkSimplex, ..Default::default() }
}

fn random_density(rng: &mut ChaCha8Rng, shape: GridShape) -> GridFn {
    GridFn::new(shape, (0..shape.len()).map(|_| rng.random::<f64>()).collect()).unwrap()
}

fn equal_mass_pair(rng: &mut ChaCha8Rng, shape: GridShape) -> (GridFn, GridFn) {
    let a = random_density(rng, shape);
    let b = random_density(rng, shape);
    let b = b.scale(a.integral() / b.integral());
    (a, b)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let shape = GridShape::unit_square(8).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (a, b) = equal_mass_pair(&mut rng, shape);
        let exact = emd_exact(&a, &b).unwrap();
        let got = emd(&a, &b, &EmdConfig::default()).unwrap().value;
        worst = worst.max((got - exact).abs() / exact);
    }
    let t = start.elapsed();
    outcome(
        worst <= 2e-2 && t < Duration::from_secs(60),
        format!("worst relative error {worst:.2e} over 50 pairs (limit 2e-2), {t:.1?} (limit 60 s)"),
    )
}

/// `integral |F1 - F2|` for point masses at cell centres of a 1D grid: the
/// cumulative difference is constant between neighbouring centres.
fn cdf_distance(a: &[f64], b: &[f64], dx: f64) -> f64 {
    let mut g = 0.0;
    let mut total = 0.0;
    for k in 0..a.len() - 1 {
        g += (a[k] - b[k]) * dx;
        total += g.abs() * dx;
    }
    total
}

fn one_dimensional_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut check = |a: &GridFn, b: &GridFn, want: f64| {
        let got = emd(a, b, &EmdConfig::default()).unwrap().value;
        worst = worst.max((got - want).abs() / want);
    };
    // 2 on [0, 1/2] against 2 on [1/2, 1].
    let s = GridShape::new(64, 1, 1.0 / 64.0, 1.0).unwrap();
    let a = GridFn::from_fn(s, |x, _| if x < 0.5 { 2.0 } else { 0.0 }).unwrap();
    let b = GridFn::from_fn(s, |x, _| if x > 0.5 { 2.0 } else { 0.0 }).unwrap();
    check(&a, &b, 0.5);
    // 1/2 on [0, 2] against 1/2 on [1, 3], on [0, 4].
    let s = GridShape::new(64, 1, 4.0 / 64.0, 1.0).unwrap();
    let a = GridFn::from_fn(s, |x, _| if x < 2.0 { 0.5 } else { 0.0 }).unwrap();
    let b = GridFn::from_fn(s, |x, _| if (1.0..3.0).contains(&x) { 0.5 } else { 0.0 }).unwrap();
    check(&a, &b, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = GridShape::new(64, 1, 1.0 / 64.0, 1.0).unwrap();
    for _ in 0..10 {
        let (a, b) = equal_mass_pair(&mut rng, s);
        let want = cdf_distance(a.data(), b.data(), s.dx);
        check(&a, &b, want);
    }
    outcome(worst <= 1e-3, format!("worst relative error {worst:.2e} over 12 instances (limit 1e-3)"))
}

fn semi_norm_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let shape = GridShape::new(4, 4, 0.25, 0.25).unwrap();
    let signed = |rng: &mut ChaCha8Rng| {
        GridFn::new(shape, (0..16).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    };
    let st = |f: &GridFn| structure_exact(f).unwrap();
    let ex = |a: &GridFn, b: &GridFn| emd_exact(a, b).unwrap();
    let tol = |scale: f64| 1e-8 * (1.0 + scale.abs());
    let mut violations: Vec<String> = Vec::new();
    let mut flag = |name: &str, ok: bool| {
        if !ok {
            violations.push(name.to_string());
        }
    };
    for _ in 0..100 {
        let (f, g) = (signed(&mut rng), signed(&mut rng));
        let c = rng.random_range(-4.0..4.0);
        let (sf, sg) = (st(&f), st(&g));
        flag("homogeneity", (st(&f.scale(c)) - c.abs() * sf).abs() <= tol(sf));
        flag("triangle", st(&f.add(&g).unwrap()) <= sf + sg + tol(sf + sg));
        flag("shift", (st(&f.map(|v| v + c)) - sf).abs() <= tol(sf));
        flag("constant", st(&GridFn::constant(shape, c)) == 0.0);

        let (r1, r2) = equal_mass_pair(&mut rng, shape);
        let e12 = ex(&r1, &r2);
        flag("difference", (st(&r2.sub(&r1).unwrap()) - e12).abs() <= tol(e12));

        let r3 = random_density(&mut rng, shape);
        let r3 = r3.scale(r1.integral() / r3.integral());
        flag("emd-triangle", e12 <= ex(&r1, &r3) + ex(&r3, &r2) + tol(e12));

        let rho = random_density(&mut rng, shape);
        let flat = GridFn::constant(shape, rho.mean());
        let sm = st(&rho);
        flag("mean", (sm - ex(&rho, &flat)).abs() <= tol(sm));

        let (f1, g1) = equal_mass_pair(&mut rng, shape);
        let (f2, g2) = equal_mass_pair(&mut rng, shape);
        let sum = ex(&f1.add(&f2).unwrap(), &g1.add(&g2).unwrap());
        let parts = ex(&f1, &g1) + ex(&f2, &g2);
        flag("subadditivity", sum <= parts + tol(parts));

        let l1: f64 = r1.sub(&r2).unwrap().data().iter().map(|v| v.abs()).sum::<f64>() * shape.cell_area();
        flag("l1-bound", e12 <= 0.5 * shape.diameter() * l1 + tol(e12));
    }
    outcome(
        violations.is_empty(),
        if violations.is_empty() {
            "9 properties x 100 cases, no violations".to_string()
        } else {
            format!("{} violations: {:?}", violations.len(), violations)
        },
    )
}

fn noise_scaling() -> Outcome {
    let start = Instant::now();
    let ells: Vec<u32> = (2..=7).collect();
    let rows = noise_scaling_study(2, &ells, 32, 1.0, 4242, 128, &simplex()).unwrap();
    let t = start.elapsed();
    let mut pass = t < Duration::from_secs(600);
    let mut parts = Vec::new();
    for r in &rows {
        let s = r.mean_struc.unwrap();
        let b = r.bound.unwrap();
        pass &= s <= b && (0.7..=1.3).contains(&r.mean_l2_sq);
        parts.push(format!("l{}: {s:.4}<={b:.4}, |h|^2={:.3}", r.ell, r.mean_l2_sq));
    }
    outcome(pass, format!("{}; {t:.0?} (limit 600 s)", parts.join("; ")))
}

fn restriction_convergence() -> Outcome {
    let cfg = ExperimentConfig {
        restriction: RestrictionConfig {
            ells: vec![3, 4, 5, 6],
            ell_ref: 7,
            fields: vec![SmoothField::Ramp, SmoothField::SinSin],
            solver: EmdSolver::NetworkSimplex,
        },
        ..Default::default()
    };
    let studies = run_restriction(&cfg).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, s) in &studies {
        let order = s.order.unwrap_or(f64::NAN);
        let decreasing = s.rows.windows(2).all(|w| w[1].gap < w[0].gap);
        pass &= decreasing && (order - 2.0).abs() <= 0.6;
        parts.push(format!("{name}: order {order:.3}"));
    }
    outcome(pass, format!("{} (target 2.0 +- 0.6)", parts.join(", ")))
}

fn experiment_one() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig { nx: 48, ny: 64, theta_step: 0.05, snapshot_thetas: vec![], ..Default::default() };
    let e = run_experiment1(&cfg).unwrap();
    let t = start.elapsed();
    let r = &e.report;
    let (cs, c1, c2) = (r.contrast.struc.unwrap(), r.contrast.l1.unwrap(), r.contrast.l2.unwrap());
    let at_truth = r.minimizer.struc.as_deref() == Some(&[0.0][..]);
    outcome(
        at_truth && cs > c1 && cs > c2 && t < Duration::from_secs(900),
        format!(
            "theta_s {:?}, contrast struc {cs:.4} / l1 {c1:.4} / l2 {c2:.4}, {} invalid, {t:.0?} (limit 900 s)",
            r.minimizer.struc, r.metadata.invalid_points
        ),
    )
}

fn experiment_two() -> Outcome {
    let cfg = ExperimentConfig {
        nx: EXP2_NX,
        ny: EXP2_NY,
        theta_step: EXP2_STEP,
        snr_list: vec![25.0, 5.0],
        ..Default::default()
    };
    let runs = run_experiment2(&cfg).unwrap();
    let (hi, lo) = (&runs[0].1, &runs[1].1);
    let s = (hi.contrast.struc.unwrap(), lo.contrast.struc.unwrap());
    let l2 = (hi.contrast.l2.unwrap(), lo.contrast.l2.unwrap());
    outcome(
        s.1 >= 0.5 * s.0 && l2.1 <= 0.5 * l2.0,
        format!(
            "struc contrast {:.4} -> {:.4} (kept {:.0}%), l2 contrast {:.4} -> {:.4} (kept {:.0}%)",
            s.0,
            s.1,
            100.0 * s.1 / s.0,
            l2.0,
            l2.1,
            100.0 * l2.1 / l2.0
        ),
    )
}

fn experiment_three() -> Outcome {
    let mut cfg = ExperimentConfig { theta_step: EXP3_STEP, ..Default::default() };
    cfg.ladder.nx = 25;
    cfg.ladder.ny_list = vec![25, 50, 75, 100];
    let runs = run_experiment3(&cfg).unwrap();
    let errs: Vec<f64> = runs.iter().map(|(_, r)| r.struc_error().unwrap()).collect();
    let conts: Vec<f64> = runs.iter().map(|(_, r)| r.contrast.struc.unwrap()).collect();
    let non_increasing = errs.windows(2).all(|w| w[1] <= w[0]);
    let increasing = conts.windows(2).all(|w| w[1] > w[0]);
    outcome(
        non_increasing && increasing,
        format!(
            "ny 25/50/75/100: |theta_s - theta_hat| {:?}, struc contrast {:?}",
            errs.iter().map(|e| format!("{e:.3}")).collect::<Vec<_>>(),
            conts.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn dense(op: &SparseOp) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(op.rows(), op.cols());
    for (r, c, v) in op.triplets() {
        m[(r, c)] += v;
    }
    m
}

fn inversion_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(3..7usize);
        let shape = GridShape::unit_square(n).unwrap();
        let cols = shape.len();
        let rows = cols + rng.random_range(1..cols);
        let mut trip = Vec::new();
        for r in 0..rows {
            for _ in 0..4 {
                trip.push((r, rng.random_range(0..cols), rng.random_range(-1.0..1.0)));
            }
        }
        let l = SparseOp::from_triplets(rows, cols, trip).unwrap();
        let c = discrete_gradient_matrix(shape);
        let b: Vec<f64> = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lambda = 10f64.powf(rng.random_range(-4.0..0.0));
        let (ld, cd) = (dense(&l), dense(&c));
        let a = ld.transpose() * &ld + lambda * cd.transpose() * &cd;
        let rhs = ld.transpose() * DVector::from_vec(b.clone());
        let want = a.lu().solve(&rhs).expect("regularised normal matrix is invertible");
        let got = DVector::from_vec(solve_tikhonov(&l, &c, &b, lambda).unwrap());
        worst = worst.max((got - &want).norm() / want.norm());
    }

    // Residual dichotomy on a consistent, overdetermined problem.
    let (nx, ny) = (8, 12);
    let fam = make_family(5, nx, ny, 1, &PerlinParams::default()).unwrap();
    let sig = GridShape::unit_square(nx).unwrap();
    let u = GridFn::from_fn(sig, |x, y| if (x - 0.5).hypot(y - 0.4) < 0.3 { 1.0 } else { 0.1 + x }).unwrap();
    let c = discrete_gradient_matrix(sig);
    let b = fam.at(&[0.0]).unwrap().apply(u.data()).unwrap();
    let meas = GridShape::unit_square(ny).unwrap();
    let nb = norm_l2(&GridFn::new(meas, b.clone()).unwrap());
    let res = |theta: f64, lambda: f64| {
        let l = fam.at(&[theta]).unwrap();
        let x = solve_tikhonov(&l, &c, &b, lambda).unwrap();
        let lx = l.apply(&x).unwrap();
        norm_l2(&GridFn::new(meas, b.iter().zip(&lx).map(|(p, q)| p - q).collect()).unwrap()) / nb
    };
    let lambdas = [1e-2, 1e-4, 1e-6, 1e-8];
    let truth: Vec<f64> = lambdas.iter().map(|&l| res(0.0, l)).collect();
    let off: Vec<f64> = lambdas.iter().map(|&l| res(0.5, l)).collect();
    let vanishes = truth.windows(2).all(|w| w[1] < w[0]) && *truth.last().unwrap() < 1e-5;
    let floor = off.iter().copied().fold(f64::INFINITY, f64::min);
    let bounded = floor > 1e-2;
    outcome(
        worst <= 1e-8 && vanishes && bounded,
        format!(
            "dense oracle worst {worst:.1e} (limit 1e-8); relative residual at truth {:.1e} -> {:.1e}, off-truth floor {floor:.3}",
            truth[0],
            truth[3]
        ),
    )
}

// Grid and theta resolution for the two-parameter experiments; see README.
const EXP2_NX: usize = 48;
const EXP2_NY: usize = 64;
const EXP2_STEP: f64 = 0.1;
const EXP3_STEP: f64 = 0.1;

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "oracle equivalence", oracle_equivalence),
        (2, "1D closed form", one_dimensional_closed_form),
        (3, "semi-norm properties", semi_norm_suite),
        (4, "dyadic noise scaling", noise_scaling),
        (5, "smooth-field convergence", restriction_convergence),
        (6, "experiment 1 replica", experiment_one),
        (7, "SNR degradation", experiment_two),
        (8, "overdetermination trend", experiment_three),
        (9, "inversion correctness", inversion_correctness),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failed += 1;
        }
        println!("criterion {id} ({name}): {verdict} - {} [{:.1?}]", result.detail, start.elapsed());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
