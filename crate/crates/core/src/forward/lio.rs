//! Line-integral operators by nearest-cell rasterisation of paths.

use crate::error::{Error, Result};
use crate::forward::paths::PathSpec;
use crate::sparse::SparseOp;

/// Number of path samples used to rasterise onto an `nx x nx` grid when the
/// measurement grid is `ny x ny`.
pub fn sample_count(nx: usize, ny: usize) -> usize {
    8 * nx.max(ny)
}

/// Cells whose centres are nearest to `p` on the `n x n` unit-square grid,
/// ties included. Returned as flat indices `i * n + j`.
pub fn nearest_cells(p: (f64, f64), n: usize) -> Vec<usize> {
    let axis = |v: f64| -> Vec<usize> {
        let s = v * n as f64;
        let i = (s.floor() as usize).min(n - 1);
        // Exactly on an interior face: both neighbours are equidistant.
        if s == s.floor() && i > 0 && (s as usize) < n {
            vec![i - 1, i]
        } else {
            vec![i]
        }
    };
    let (xs, ys) = (axis(p.0), axis(p.1));
    xs.iter().flat_map(|&i| ys.iter().map(move |&j| i * n + j)).collect()
}

/// Assembles the operator whose row `k` averages the signal over every cell
/// visited by `paths[k]`.
pub fn assemble_lio(paths: &[PathSpec], nx: usize, ny: usize) -> Result<SparseOp> {
    if nx == 0 {
        return Err(Error::InvalidGrid("signal grid must be non-empty".into()));
    }
    if paths.len() != ny * ny {
        return Err(Error::DimensionMismatch(format!(
            "{} paths for a {ny}x{ny} measurement grid",
            paths.len()
        )));
    }
    let samples = sample_count(nx, ny);
    let mut triplets = Vec::new();
    let mut cells = Vec::new();
    for (row, path) in paths.iter().enumerate() {
        cells.clear();
        for s in 0..samples {
            let t = s as f64 / (samples - 1).max(1) as f64;
            cells.extend(nearest_cells(path.eval(t), nx));
        }
        cells.sort_unstable();
        cells.dedup();
        if cells.is_empty() {
            return Err(Error::EmptyPath(row));
        }
        let w = 1.0 / cells.len() as f64;
        triplets.extend(cells.iter().map(|&c| (row, c, w)));
    }
    SparseOp::from_triplets(ny * ny, nx * nx, triplets)
}
