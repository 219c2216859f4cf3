//! Min-cost flow on the cell-centre lattice by preconditioned primal-dual steps.

use crate::emd::simplex::NetworkSimplex;
use crate::emd::{EmdConfig, SolveStats};
use crate::grid::{FluxField, GridShape};

/// Half of the 16-neighbour stencil; the other half is covered by signed flows.
const STENCIL: [(usize, isize); 8] =
    [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2)];

/// Over-relaxation margin on the preconditioned step-size product.
const STEP_SAFETY: f64 = 0.95;

/// How often convergence is checked.
const CHECK_EVERY: usize = 50;

/// Edges sharing one stencil offset, laid out as a `rows x cols` block so that
/// tails and heads of consecutive edges are contiguous in memory.
#[derive(Clone, Debug)]
struct Family {
    di: usize,
    dj: isize,
    length: f64,
    rows: usize,
    cols: usize,
    /// Column of the tail cell of edge `(a, 0)`.
    j0: usize,
}

impl Family {
    fn len(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    fn tail(&self, a: usize, ny: usize) -> usize {
        a * ny + self.j0
    }

    #[inline]
    fn head(&self, a: usize, ny: usize) -> usize {
        (((a + self.di) * ny + self.j0) as isize + self.dj) as usize
    }
}

#[derive(Clone, Debug)]
pub struct Lattice {
    shape: GridShape,
    families: Vec<Family>,
    degree: Vec<f64>,
}

pub(crate) struct LatticeSolution {
    shape: GridShape,
    families: Vec<Family>,
    flows: Vec<Vec<f64>>,
    pub cost: f64,
    pub stats: SolveStats,
}

impl Lattice {
    pub fn new(shape: GridShape) -> Self {
        let (nx, ny) = (shape.nx, shape.ny);
        let mut offsets = STENCIL.to_vec();
        // On a single row or column the stencil collapses to a path, on which
        // first-order iterations diffuse slowly. Collinear dyadic shortcuts
        // leave the optimum unchanged (their cost is the sum of the unit steps
        // they bridge) but cut the graph diameter to O(log n).
        if nx == 1 || ny == 1 {
            let mut k = 2;
            while k < nx.max(ny) {
                offsets.push(if ny == 1 { (k, 0) } else { (0, k as isize) });
                k *= 2;
            }
        }
        let mut families = Vec::new();
        for &(di, dj) in &offsets {
            let adj = dj.unsigned_abs();
            if di >= nx || adj >= ny {
                continue;
            }
            families.push(Family {
                di,
                dj,
                length: (di as f64 * shape.dx).hypot(dj as f64 * shape.dy),
                rows: nx - di,
                cols: ny - adj,
                j0: if dj < 0 { adj } else { 0 },
            });
        }
        let mut degree = vec![0.0; shape.len()];
        for f in &families {
            for a in 0..f.rows {
                let (u, v) = (f.tail(a, ny), f.head(a, ny));
                for b in 0..f.cols {
                    degree[u + b] += 1.0;
                    degree[v + b] += 1.0;
                }
            }
        }
        Self { shape, families, degree }
    }

    pub fn edge_count(&self) -> usize {
        self.families.iter().map(Family::len).sum()
    }

    /// Solves `min sum w|f|  s.t.  B f = supply` where `sum supply = 0`.
    pub(crate) fn solve(&self, supply: &[f64], cfg: &EmdConfig) -> LatticeSolution {
        let n = self.shape.len();
        let ny = self.shape.ny;
        let norm_d = supply.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut flows: Vec<Vec<f64>> = self.families.iter().map(|f| vec![0.0; f.len()]).collect();

        // Diagonal preconditioning: every edge touches two nodes, node i touches
        // deg_i edges. The configured pair only sets the primal/dual balance.
        let balance = (2.0 * cfg.mu_step / cfg.tau_step).sqrt();
        let primal = STEP_SAFETY * balance / 2.0;
        let dual: Vec<f64> = self.degree.iter().map(|&d| STEP_SAFETY / (balance * d.max(1.0))).collect();

        let mut phi = vec![0.0; n];
        let mut bf = vec![0.0; n];
        let mut bf_old = vec![0.0; n];
        let mut row = vec![0.0; ny];
        let mut last_cost = f64::INFINITY;
        let mut stats = SolveStats { iterations: 0, converged: false, residual: f64::INFINITY };

        for it in 1..=cfg.max_iter {
            std::mem::swap(&mut bf, &mut bf_old);
            bf.fill(0.0);
            for (fam, flow) in self.families.iter().zip(flows.iter_mut()) {
                let thresh = primal * fam.length;
                let cols = fam.cols;
                for a in 0..fam.rows {
                    let (u, v) = (fam.tail(a, ny), fam.head(a, ny));
                    let f = &mut flow[a * cols..(a + 1) * cols];
                    let pu = &phi[u..u + cols];
                    let pv = &phi[v..v + cols];
                    let out = &mut row[..cols];
                    for b in 0..cols {
                        let z = f[b] - primal * (pu[b] - pv[b]);
                        let s = if z > thresh {
                            z - thresh
                        } else if z < -thresh {
                            z + thresh
                        } else {
                            0.0
                        };
                        f[b] = s;
                        out[b] = s;
                    }
                    for (acc, s) in bf[u..u + cols].iter_mut().zip(out.iter()) {
                        *acc += s;
                    }
                    for (acc, s) in bf[v..v + cols].iter_mut().zip(out.iter()) {
                        *acc -= s;
                    }
                }
            }
            for i in 0..n {
                phi[i] += dual[i] * (2.0 * bf[i] - bf_old[i] - supply[i]);
            }

            if it % CHECK_EVERY == 0 || it == cfg.max_iter {
                let res = bf.iter().zip(supply).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() / norm_d;
                let cost = self.cost(&flows);
                let change = (cost - last_cost).abs() / cost.max(f64::MIN_POSITIVE);
                last_cost = cost;
                stats = SolveStats { iterations: it, converged: res < cfg.tol && change < cfg.tol, residual: res };
                if stats.converged {
                    break;
                }
            }
        }
        LatticeSolution {
            shape: self.shape,
            families: self.families.clone(),
            cost: self.cost(&flows),
            flows,
            stats,
        }
    }

    /// Exact solution of the same linear program by network simplex. Supplies
    /// are quantised to integers at a resolution of `2^-50` of the unit mass.
    pub(crate) fn solve_exact(&self, supply: &[f64]) -> LatticeSolution {
        const SCALE: f64 = (1u64 << 50) as f64;
        let ny = self.shape.ny;
        let mut q: Vec<i64> = supply.iter().map(|v| (v * SCALE).round() as i64).collect();
        let drift: i64 = q.iter().sum();
        if drift != 0 {
            let k = (0..q.len()).max_by_key(|&k| q[k].abs()).unwrap_or(0);
            q[k] -= drift;
        }
        let mut arcs = Vec::with_capacity(2 * self.edge_count());
        for fam in &self.families {
            for a in 0..fam.rows {
                let (u, v) = (fam.tail(a, ny), fam.head(a, ny));
                for b in 0..fam.cols {
                    arcs.push((u + b, v + b, fam.length));
                    arcs.push((v + b, u + b, fam.length));
                }
            }
        }
        let span = self.shape.nx as f64 * self.shape.dx + self.shape.ny as f64 * self.shape.dy;
        let mut ns = NetworkSimplex::new(&q, &arcs, 2.0 * span + 1.0);
        let feasible = ns.run();
        let raw = ns.flows();
        let mut k = 0;
        let flows: Vec<Vec<f64>> = self
            .families
            .iter()
            .map(|fam| {
                (0..fam.len())
                    .map(|_| {
                        let f = (raw[k] - raw[k + 1]) as f64 / SCALE;
                        k += 2;
                        f
                    })
                    .collect()
            })
            .collect();
        LatticeSolution {
            shape: self.shape,
            families: self.families.clone(),
            cost: self.cost(&flows),
            flows,
            stats: SolveStats { iterations: ns.pivots, converged: feasible, residual: 0.0 },
        }
    }

    fn cost(&self, flows: &[Vec<f64>]) -> f64 {
        self.families
            .iter()
            .zip(flows)
            .map(|(f, fl)| f.length * fl.iter().map(|v| v.abs()).sum::<f64>())
            .sum()
    }
}

impl LatticeSolution {
    /// Routes each lattice edge flow along the two monotone staircases between
    /// its end cells (half along each), giving a face flux whose discrete
    /// divergence equals the lattice divergence. Flows are scaled by `mass`.
    pub fn route(&self, mass: f64) -> FluxField {
        let s = self.shape;
        let (nx, ny) = (s.nx, s.ny);
        let mut fx = vec![0.0; nx * ny];
        let mut fy = vec![0.0; nx * ny];
        for (fam, flow) in self.families.iter().zip(&self.flows) {
            let steps_y = fam.dj.unsigned_abs();
            let sign_y = if fam.dj < 0 { -1.0 } else { 1.0 };
            for a in 0..fam.rows {
                for b in 0..fam.cols {
                    let f = flow[a * fam.cols + b];
                    if f == 0.0 {
                        continue;
                    }
                    let half = 0.5 * mass * f;
                    let (i, j) = (a, b + fam.j0);
                    let j_end = (j as isize + fam.dj) as usize;
                    // x first, then y at column i + di; and y first, then x at row j_end.
                    for (xrow, ycol) in [(j, a + fam.di), (j_end, i)] {
                        for t in 1..=fam.di {
                            fx[(i + t) * ny + xrow] += half;
                        }
                        for t in 0..steps_y {
                            // Face between rows jj - 1 and jj is stored at row jj.
                            let jj = if fam.dj > 0 { j + t + 1 } else { j - t };
                            fy[ycol * ny + jj] += sign_y * half;
                        }
                    }
                }
            }
        }
        for v in fx.iter_mut() {
            *v /= s.dy;
        }
        for v in fy.iter_mut() {
            *v /= s.dx;
        }
        FluxField::new(s, fx, fy).expect("routed flux stays inside the grid")
    }
}
