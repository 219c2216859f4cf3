//! Exact point-mass transport by successive shortest paths.
//!
//! Mass sits at cell centres and moves at Euclidean cost. Independent of the
//! lattice solver and meant as a reference on small grids.

use crate::error::{Error, Result};
use crate::grid::GridFn;

pub const EXACT_MAX_CELLS: usize = 64;

/// Exact EMD between two small densities on the same grid.
pub fn emd_exact(rho1: &GridFn, rho2: &GridFn) -> Result<f64> {
    let s = rho1.shape();
    if s.len() > EXACT_MAX_CELLS {
        return Err(Error::TooLarge { cells: s.len(), max: EXACT_MAX_CELLS });
    }
    let (m1, m2) = super::check_pair(rho1, rho2, 1e-9)?;
    if m1 == 0.0 {
        return Ok(0.0);
    }
    let area = s.cell_area();
    let points = |rho: &GridFn, m: f64| -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for i in 0..s.nx {
            for j in 0..s.ny {
                let v = rho.get(i, j);
                if v > 0.0 {
                    let (x, y) = s.center(i, j);
                    out.push((x, y, v * area / m));
                }
            }
        }
        out
    };
    let mass = 0.5 * (m1 + m2);
    Ok(mass * transport_exact(&points(rho1, m1), &points(rho2, m2)))
}

/// Optimal transport cost between weighted point sets `(x, y, mass)` of equal
/// total mass under the Euclidean ground cost.
pub fn transport_exact(sources: &[(f64, f64, f64)], sinks: &[(f64, f64, f64)]) -> f64 {
    let (ns, nt) = (sources.len(), sinks.len());
    if ns == 0 || nt == 0 {
        return 0.0;
    }
    let total: f64 = sources.iter().map(|p| p.2).sum();
    let eps = 1e-14 * total;
    let cost: Vec<Vec<f64>> = sources
        .iter()
        .map(|a| sinks.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect())
        .collect();
    let mut supply: Vec<f64> = sources.iter().map(|p| p.2).collect();
    let mut demand: Vec<f64> = sinks.iter().map(|p| p.2).collect();
    let mut flow = vec![vec![0.0; nt]; ns];
    // Node potentials keep reduced costs non-negative; sources first, then sinks.
    let mut pot = vec![0.0; ns + nt];
    let mut dist = vec![0.0; ns + nt];
    let mut prev = vec![usize::MAX; ns + nt];
    let mut done = vec![false; ns + nt];

    while supply.iter().any(|&v| v > eps) {
        dist.fill(f64::INFINITY);
        prev.fill(usize::MAX);
        done.fill(false);
        for (s, &v) in supply.iter().enumerate() {
            if v > eps {
                dist[s] = 0.0;
            }
        }
        // Dense Dijkstra over the residual bipartite graph.
        loop {
            let mut best = usize::MAX;
            for v in 0..ns + nt {
                if !done[v] && dist[v].is_finite() && (best == usize::MAX || dist[v] < dist[best]) {
                    best = v;
                }
            }
            if best == usize::MAX {
                break;
            }
            done[best] = true;
            if best < ns {
                let s = best;
                for t in 0..nt {
                    let rc = cost[s][t] + pot[s] - pot[ns + t];
                    let nd = dist[s] + rc.max(0.0);
                    if nd < dist[ns + t] {
                        dist[ns + t] = nd;
                        prev[ns + t] = s;
                    }
                }
            } else {
                let t = best - ns;
                for s in 0..ns {
                    if flow[s][t] > eps {
                        let rc = -cost[s][t] + pot[ns + t] - pot[s];
                        let nd = dist[best] + rc.max(0.0);
                        if nd < dist[s] {
                            dist[s] = nd;
                            prev[s] = best;
                        }
                    }
                }
            }
        }
        let Some(target) = (0..nt)
            .filter(|&t| demand[t] > eps && dist[ns + t].is_finite())
            .min_by(|&a, &b| dist[ns + a].total_cmp(&dist[ns + b]))
        else {
            break;
        };
        let reach = dist[ns + target];
        for v in 0..ns + nt {
            pot[v] += dist[v].min(reach);
        }

        // Walk back to the originating source, collecting the bottleneck.
        let mut push = demand[target];
        let mut v = ns + target;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u >= ns {
                // v is a source reached backwards along a used arc.
                push = push.min(flow[v][u - ns]);
            }
            v = u;
        }
        push = push.min(supply[v]);
        supply[v] -= push;
        demand[target] -= push;
        let mut v = ns + target;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u < ns {
                flow[u][v - ns] += push;
            } else {
                flow[v][u - ns] -= push;
            }
            v = u;
        }
    }

    flow.iter().zip(&cost).map(|(f, c)| f.iter().zip(c).map(|(a, b)| a * b).sum::<f64>()).sum()
}
