//! Primal network simplex for uncapacitated min-cost flow.
//!
//! Supplies are integers so that pivoting is exact; costs are real. The tree is
//! kept strongly feasible, and entering arcs are chosen by block search.

const UP: i8 = 1;
const DOWN: i8 = -1;
const IN_TREE: i8 = 0;
const AT_LOWER: i8 = 1;

/// Directed arcs `(tail, head, cost)` with non-negative costs.
pub(crate) struct NetworkSimplex {
    n: usize,
    source: Vec<usize>,
    target: Vec<usize>,
    cost: Vec<f64>,
    flow: Vec<i64>,
    state: Vec<i8>,
    pi: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<i8>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    arc_num: usize,
    block: usize,
    next_arc: usize,
    eps: f64,
    pub pivots: usize,
}

const NONE: usize = usize::MAX;

impl NetworkSimplex {
    /// `supply` must sum to zero; `art_cost` must exceed the cost of any simple path.
    pub fn new(supply: &[i64], arcs: &[(usize, usize, f64)], art_cost: f64) -> Self {
        let n = supply.len();
        let m = arcs.len();
        let total = m + n;
        let mut s = Self {
            n,
            source: Vec::with_capacity(total),
            target: Vec::with_capacity(total),
            cost: Vec::with_capacity(total),
            flow: vec![0; total],
            state: vec![AT_LOWER; total],
            pi: vec![0.0; n + 1],
            parent: vec![NONE; n + 1],
            pred: vec![NONE; n + 1],
            pred_dir: vec![UP; n + 1],
            thread: vec![0; n + 1],
            rev_thread: vec![0; n + 1],
            succ_num: vec![1; n + 1],
            last_succ: vec![0; n + 1],
            arc_num: m,
            block: ((m as f64).sqrt().ceil() as usize).max(10),
            next_arc: 0,
            eps: 1e-12 * art_cost,
            pivots: 0,
        };
        for &(u, v, c) in arcs {
            s.source.push(u);
            s.target.push(v);
            s.cost.push(c);
        }
        let root = n;
        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = n + 1;
        s.last_succ[root] = root - 1;
        for u in 0..n {
            let e = m + u;
            s.parent[u] = root;
            s.pred[u] = e;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.last_succ[u] = u;
            s.state[e] = IN_TREE;
            if supply[u] >= 0 {
                s.pred_dir[u] = UP;
                s.source.push(u);
                s.target.push(root);
                s.cost.push(0.0);
                s.flow[e] = supply[u];
            } else {
                s.pred_dir[u] = DOWN;
                s.pi[u] = art_cost;
                s.source.push(root);
                s.target.push(u);
                s.cost.push(art_cost);
                s.flow[e] = -supply[u];
            }
        }
        s
    }

    #[inline]
    fn reduced(&self, e: usize) -> f64 {
        self.state[e] as f64 * (self.cost[e] + self.pi[self.source[e]] - self.pi[self.target[e]])
    }

    fn find_entering(&mut self) -> Option<usize> {
        let m = self.arc_num;
        let mut best = -self.eps;
        let mut found = None;
        let mut cnt = self.block;
        let start = self.next_arc;
        for k in 0..m {
            let e = (start + k) % m;
            let c = self.reduced(e);
            if c < best {
                best = c;
                found = Some(e);
            }
            cnt -= 1;
            if cnt == 0 {
                if found.is_some() {
                    self.next_arc = (e + 1) % m;
                    return found;
                }
                cnt = self.block;
            }
        }
        found
    }

    /// Runs to optimality. Returns false if artificial flow remains (infeasible).
    pub fn run(&mut self) -> bool {
        while let Some(in_arc) = self.find_entering() {
            self.pivot(in_arc);
            self.pivots += 1;
        }
        (self.arc_num..self.arc_num + self.n).all(|e| self.flow[e] == 0)
    }

    pub fn flows(&self) -> &[i64] {
        &self.flow[..self.arc_num]
    }

    #[cfg(test)]
    pub fn potentials(&self) -> &[f64] {
        &self.pi[..self.n]
    }

    fn pivot(&mut self, in_arc: usize) {
        // Join node of the cycle closed by the entering arc.
        let (mut u, mut v) = (self.source[in_arc], self.target[in_arc]);
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        let join = u;

        // Leaving arc: first blocking arc, ties resolved for strong feasibility.
        let (first, second) = (self.source[in_arc], self.target[in_arc]);
        let mut delta = i64::MAX;
        let mut u_out = NONE;
        let mut side = 0;
        let mut u = first;
        while u != join {
            if self.pred_dir[u] == UP {
                let d = self.flow[self.pred[u]];
                if d < delta {
                    delta = d;
                    u_out = u;
                    side = 1;
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != join {
            if self.pred_dir[u] == DOWN {
                let d = self.flow[self.pred[u]];
                if d <= delta {
                    delta = d;
                    u_out = u;
                    side = 2;
                }
            }
            u = self.parent[u];
        }
        assert!(side != 0, "unbounded cycle with positive arc costs");
        let (u_in, v_in) = if side == 1 { (first, second) } else { (second, first) };

        if delta > 0 {
            self.flow[in_arc] += delta;
            let mut u = self.source[in_arc];
            while u != join {
                self.flow[self.pred[u]] -= self.pred_dir[u] as i64 * delta;
                u = self.parent[u];
            }
            let mut u = self.target[in_arc];
            while u != join {
                self.flow[self.pred[u]] += self.pred_dir[u] as i64 * delta;
                u = self.parent[u];
            }
        }
        self.state[in_arc] = IN_TREE;
        self.state[self.pred[u_out]] = AT_LOWER;

        self.update_tree(in_arc, join, u_in, v_in, u_out);

        let dir = self.pred_dir[u_in] as f64;
        let sigma = self.pi[v_in] - self.pi[u_in] - dir * self.cost[in_arc];
        let end = self.thread[self.last_succ[u_in]];
        let mut u = u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    fn update_tree(&mut self, in_arc: usize, join: usize, u_in: usize, v_in: usize, u_out: usize) {
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] { UP } else { DOWN };
            if self.thread[v_in] != u_out {
                let after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                let after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue =
                if old_rev_thread == v_in { self.thread[old_last_succ] } else { self.thread[v_in] };

            // Re-hang the stem between u_in and u_out under v_in.
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            let mut dirty = vec![v_in];
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                dirty.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }
            for &u in &dirty {
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] { UP } else { DOWN };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }
        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }
}
