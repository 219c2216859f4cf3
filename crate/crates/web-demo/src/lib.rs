//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function returns a JSON string; the page parses it and draws
//! on canvases. The plain-Rust `*_data` functions hold the logic so they can be
//! tested natively.

use serde::Serialize;
use structure_core::calibration::{dyadic_noise, sweep, DyadicNoiseSpec, NoiseModel, SweepProblem, ThetaGrid};
use structure_core::emd::{structure, EmdConfig, EmdSolver};
use structure_core::forward::{make_family, PerlinField, PerlinParams};
use structure_core::inversion::InversionConfig;
use structure_core::{GridFn, GridShape, Result};
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct FieldView {
    pub n: usize,
    /// Row-major by x, as stored in `GridFn`.
    pub values: Vec<f64>,
    pub struc: f64,
    /// Cell-centred flux vectors for arrows.
    pub flux_x: Vec<f64>,
    pub flux_y: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SweepView {
    pub theta: Vec<f64>,
    pub struc: Vec<f64>,
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    pub contrast: [Option<f64>; 3],
}

fn exact() -> EmdConfig {
    EmdConfig { solver: EmdSolver::NetworkSimplex, ..Default::default() }
}

fn rings(n: usize) -> Result<GridFn> {
    GridFn::from_fn(GridShape::unit_square(n)?, |x, y| {
        let r = (x - 0.5).hypot(y - 0.5);
        match r {
            r if r < 0.1 => 1.0,
            r if r < 0.2 => 0.2,
            r if r < 0.3 => 1.0,
            r if r < 0.4 => 0.2,
            _ => 0.0,
        }
    })
}

/// `kind`: `"rings"`, `"perlin"` or `"noise"` (dyadic noise at level 4).
pub fn field_data(kind: &str, n: usize, seed: u64) -> Result<FieldView> {
    let shape = GridShape::unit_square(n)?;
    let f = match kind {
        "rings" => rings(n)?,
        "perlin" => {
            let p = PerlinField::new(PerlinParams::default(), seed)?;
            let mut vals = Vec::with_capacity(shape.len());
            for i in 0..n {
                for j in 0..n {
                    vals.push(p.eval(shape.center(i, j))?);
                }
            }
            GridFn::new(shape, vals)?
        }
        "noise" => dyadic_noise(&DyadicNoiseSpec::new(2, 4.min(n.trailing_zeros()), 1.0, seed), n)?,
        other => return Err(structure_core::Error::InvalidConfig(format!("unknown field kind {other:?}"))),
    };
    let s = structure(&f, &exact())?;
    let (flux_x, flux_y) = s.flux.cell_vectors();
    Ok(FieldView { n, values: f.into_data(), struc: s.value, flux_x, flux_y })
}

/// Mean structure of dyadic noise at each level `0..=max_ell` next to the
/// structure of a smooth bump of equal L2 norm.
pub fn noise_vs_smooth_data(n: usize, max_ell: u32, seed: u64) -> Result<Vec<(u32, f64, f64)>> {
    let shape = GridShape::unit_square(n)?;
    let bump = GridFn::from_fn(shape, |x, y| (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin())?;
    let centred = bump.map(|v| v - bump.mean());
    let norm = (centred.data().iter().map(|v| v * v).sum::<f64>() * shape.cell_area()).sqrt();
    let smooth = structure(&centred.scale(1.0 / norm), &exact())?.value;
    (0..=max_ell)
        .map(|ell| {
            let h = dyadic_noise(&DyadicNoiseSpec::new(2, ell, 1.0, seed + ell as u64), n)?;
            Ok((ell, structure(&h, &exact())?.value, smooth))
        })
        .collect()
}

/// One-parameter sweep on a small random line-integral family with `theta_hat = 0`.
pub fn sweep_data(step: f64, snr: f64, seed: u64) -> Result<SweepView> {
    let (nx, ny) = (16, 24);
    let fam = make_family(seed, nx, ny, 1, &PerlinParams::default())?;
    let p = SweepProblem::new(fam, rings(nx)?, GridShape::unit_square(ny)?, vec![0.0])?;
    let grid = ThetaGrid::uniform(1, step)?;
    let nm = NoiseModel { target_snr: (snr > 0.0).then_some(snr), seed, ..Default::default() };
    let emd = EmdConfig { max_iter: 3000, ..Default::default() };
    let r = sweep(&p, &grid, &nm, &InversionConfig::default(), &emd)?;
    let col = |f: fn(&structure_core::calibration::ThetaRecord) -> Option<f64>| {
        r.records.iter().map(|x| f(x).unwrap_or(f64::NAN)).collect::<Vec<_>>()
    };
    Ok(SweepView {
        theta: r.records.iter().map(|x| x.theta[0]).collect(),
        struc: col(|x| x.struc),
        l1: col(|x| x.l1),
        l2: col(|x| x.l2),
        contrast: [r.contrast.struc, r.contrast.l1, r.contrast.l2],
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
        .and_then(|v| serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string())))
}

#[wasm_bindgen]
pub fn field(kind: &str, n: usize, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(field_data(kind, n, seed as u64))
}

#[wasm_bindgen]
pub fn noise_vs_smooth(n: usize, max_ell: u32, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(noise_vs_smooth_data(n, max_ell, seed as u64))
}

#[wasm_bindgen]
pub fn theta_sweep(step: f64, snr: f64, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(sweep_data(step, snr, seed as u64))
}
