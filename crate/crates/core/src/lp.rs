//! Dense two-phase simplex method for `min c.x  s.t.  A x = b, x >= 0`.
//!
//! Pivoting uses the most negative reduced cost and falls back to Bland's
//! rule after a run of degenerate pivots, which rules out cycling.

const EPS: f64 = 1e-11;
const PIVOT_EPS: f64 = 1e-12;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    /// `duals` certify infeasibility: `y^T A <= 0` and `y^T b > 0` (within tolerance).
    Infeasible { phase1: f64, duals: Vec<f64> },
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize,
    // rows x (cols + 1), last column is the right-hand side
    t: Vec<f64>,
    // reduced costs, last entry is minus the objective
    cost: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.cols + 1) + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let p = self.t[r * w + c];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (x, y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (x, y) in self.cost.iter_mut().zip(prow.iter()) {
                *x -= f * y;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        let mut degenerate = 0usize;
        let max_iter = 50 * (self.rows + self.cols) + 1000;
        for _ in 0..max_iter {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -EPS;
            for j in 0..allowed {
                let rc = self.cost[j];
                if rc < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = rc;
                }
            }
            let Some(c) = enter else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a > PIVOT_EPS {
                    let ratio = self.at(i, self.cols) / a;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-15 * lr.abs().max(1.0)
                                || (ratio <= lr + 1e-15 * lr.abs().max(1.0) && self.basis[i] < self.basis[li])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((r, ratio)) = leave else { return false };
            if ratio <= EPS {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
        true
    }
}

/// Solves `min c.x` subject to `A x = b`, `x >= 0`, with `A` given row-major
/// as an `m x n` slice.
pub fn solve_standard_form(m: usize, n: usize, a: &[f64], b: &[f64], c: &[f64]) -> LpOutcome {
    assert_eq!(a.len(), m * n);
    assert_eq!(b.len(), m);
    assert_eq!(c.len(), n);
    let cols = n + m;
    let w = cols + 1;
    let mut t = vec![0.0; m * w];
    let mut sign = vec![1.0; m];
    for i in 0..m {
        if b[i] < 0.0 {
            sign[i] = -1.0;
        }
        for j in 0..n {
            t[i * w + j] = sign[i] * a[i * n + j];
        }
        t[i * w + n + i] = 1.0;
        t[i * w + cols] = sign[i] * b[i];
    }
    // phase 1: minimize the sum of artificials
    let mut cost = vec![0.0; w];
    for j in n..cols {
        cost[j] = 1.0;
    }
    let mut tab = Tableau {
        rows: m,
        cols,
        t,
        cost,
        basis: (n..cols).collect(),
    };
    for i in 0..m {
        for j in 0..w {
            tab.cost[j] -= tab.t[i * w + j];
        }
    }
    tab.optimize(cols);
    let phase1 = -tab.cost[cols];
    let bscale = b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    if phase1 > 1e-9 * bscale {
        // y_i = 1 - reduced cost of artificial i, in the original row signs
        let duals = (0..m).map(|i| sign[i] * (1.0 - tab.cost[n + i])).collect();
        return LpOutcome::Infeasible { phase1, duals };
    }
    // drive zero-level artificials out of the basis where possible
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| tab.at(r, j).abs() > 1e-9) {
                tab.pivot(r, j);
            }
        }
    }
    // phase 2
    tab.cost = vec![0.0; w];
    tab.cost[..n].copy_from_slice(c);
    for r in 0..m {
        let bj = tab.basis[r];
        let cb = if bj < n { c[bj] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..w {
                tab.cost[j] -= cb * tab.t[r * w + j];
            }
        }
    }
    if !tab.optimize(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for r in 0..m {
        if tab.basis[r] < n {
            x[tab.basis[r]] = tab.at(r, cols);
        }
    }
    let objective = x.iter().zip(c).map(|(x, c)| x * c).sum();
    LpOutcome::Optimal { x, objective }
}
