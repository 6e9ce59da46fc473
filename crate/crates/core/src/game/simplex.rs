//! Dense two-phase tableau simplex with Bland's anticycling rule.
//!
//! Problems are stated as `minimize cᵀx` subject to linear rows with a
//! relation and right-hand side, and `x ≥ 0`. The solver returns the primal
//! optimum together with the row duals read off the final basis.

use thiserror::Error;

use crate::matrix::{Lu, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    LessEq,
    GreaterEq,
    Equal,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize objectiveᵀ x` subject to `constraints`, `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub pivot_tolerance: f64,
    pub reduced_cost_tolerance: f64,
    pub feasibility_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            pivot_tolerance: 1e-12,
            reduced_cost_tolerance: 1e-12,
            feasibility_tolerance: 1e-9,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpOptimum {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per constraint row, in the sign convention of a
    /// minimisation (`≥` rows get nonnegative duals).
    pub duals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplexError {
    #[error("linear program is infeasible (phase one objective {0:e})")]
    Infeasible(f64),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex exceeded {0} iterations")]
    IterationLimit(usize),
    #[error("constraint {row} has {got} coefficients, expected {expected}")]
    Dimension { row: usize, got: usize, expected: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    // rows × (cols + 1); last column is the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.cols + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.cols + 1;
        let p = self.t[row * w + col];
        for j in 0..w {
            self.t[row * w + j] /= p;
        }
        self.t[row * w + col] = 1.0;
        let pivot_row: Vec<f64> = self.t[row * w..(row + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.t[i * w + col];
            if f == 0.0 {
                continue;
            }
            for (j, &pr) in pivot_row.iter().enumerate() {
                self.t[i * w + j] -= f * pr;
            }
            self.t[i * w + col] = 0.0;
        }
        self.basis[row] = col;
    }

    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let mut d = costs.to_vec();
        for i in 0..self.rows {
            let cb = costs[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                *dj -= cb * self.at(i, j);
            }
        }
        d
    }

    fn objective(&self, costs: &[f64]) -> f64 {
        (0..self.rows).map(|i| costs[self.basis[i]] * self.rhs(i)).sum()
    }

    /// Runs Bland's-rule iterations until optimal. Columns with
    /// `allowed[j] == false` never enter the basis.
    fn optimize(
        &mut self,
        costs: &[f64],
        allowed: &[bool],
        opts: &SimplexOptions,
        iterations: &mut usize,
    ) -> Result<(), SimplexError> {
        loop {
            if *iterations >= opts.max_iterations {
                return Err(SimplexError::IterationLimit(opts.max_iterations));
            }
            let d = self.reduced_costs(costs);
            let entering = (0..self.cols)
                .find(|&j| allowed[j] && d[j] < -opts.reduced_cost_tolerance);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, col);
                if a <= opts.pivot_tolerance {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best || (ratio == best && self.basis[i] < self.basis[r]) {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((row, _)) = leave else {
                return Err(SimplexError::Unbounded);
            };
            self.pivot(row, col);
            *iterations += 1;
        }
    }
}

impl LinearProgram {
    pub fn solve(&self) -> Result<LpOptimum, SimplexError> {
        self.solve_with(&SimplexOptions::default())
    }

    pub fn solve_with(&self, opts: &SimplexOptions) -> Result<LpOptimum, SimplexError> {
        let n = self.objective.len();
        let m = self.constraints.len();
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != n {
                return Err(SimplexError::Dimension { row, got: c.coefficients.len(), expected: n });
            }
        }

        // Normalise to nonnegative right-hand sides.
        let mut sign = vec![1.0; m];
        let mut relations = Vec::with_capacity(m);
        for (r, c) in self.constraints.iter().enumerate() {
            let rel = if c.rhs < 0.0 {
                sign[r] = -1.0;
                match c.relation {
                    Relation::LessEq => Relation::GreaterEq,
                    Relation::GreaterEq => Relation::LessEq,
                    Relation::Equal => Relation::Equal,
                }
            } else {
                c.relation
            };
            relations.push(rel);
        }

        let n_slack = relations.iter().filter(|r| **r != Relation::Equal).count();
        let n_art = relations.iter().filter(|r| **r != Relation::LessEq).count();
        let cols = n + n_slack + n_art;
        let first_art = n + n_slack;

        let mut a = Matrix::zeros(m, cols);
        let mut b = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut identity_col = vec![0; m];
        let (mut next_slack, mut next_art) = (n, first_art);
        for (r, c) in self.constraints.iter().enumerate() {
            for (j, &v) in c.coefficients.iter().enumerate() {
                a[(r, j)] = sign[r] * v;
            }
            b[r] = sign[r] * c.rhs;
            match relations[r] {
                Relation::LessEq => {
                    a[(r, next_slack)] = 1.0;
                    basis[r] = next_slack;
                    identity_col[r] = next_slack;
                    next_slack += 1;
                }
                Relation::GreaterEq => {
                    a[(r, next_slack)] = -1.0;
                    next_slack += 1;
                    a[(r, next_art)] = 1.0;
                    basis[r] = next_art;
                    identity_col[r] = next_art;
                    next_art += 1;
                }
                Relation::Equal => {
                    a[(r, next_art)] = 1.0;
                    basis[r] = next_art;
                    identity_col[r] = next_art;
                    next_art += 1;
                }
            }
        }

        let mut t = Vec::with_capacity(m * (cols + 1));
        for r in 0..m {
            t.extend_from_slice(a.row(r));
            t.push(b[r]);
        }
        let mut tab = Tableau { rows: m, cols, t, basis };
        let mut iterations = 0;

        // Phase one: drive the artificial variables to zero.
        if n_art > 0 {
            let costs: Vec<f64> = (0..cols).map(|j| if j >= first_art { 1.0 } else { 0.0 }).collect();
            let allowed = vec![true; cols];
            tab.optimize(&costs, &allowed, opts, &mut iterations)?;
            let infeasibility = tab.objective(&costs);
            if infeasibility > opts.feasibility_tolerance {
                return Err(SimplexError::Infeasible(infeasibility));
            }
            // Pivot any artificial still in the basis (at level zero) out,
            // when a structural or slack column can replace it.
            for r in 0..m {
                if tab.basis[r] < first_art {
                    continue;
                }
                if let Some(col) = (0..first_art).find(|&j| tab.at(r, j).abs() > opts.pivot_tolerance) {
                    tab.pivot(r, col);
                    iterations += 1;
                }
            }
        }

        // Phase two on the original objective; artificials may not re-enter.
        let mut costs = vec![0.0; cols];
        costs[..n].copy_from_slice(&self.objective);
        let allowed: Vec<bool> = (0..cols).map(|j| j < first_art).collect();
        tab.optimize(&costs, &allowed, opts, &mut iterations)?;

        let mut x_basic: Vec<f64> = (0..m).map(|i| tab.rhs(i)).collect();
        let mut duals: Vec<f64> = (0..m)
            .map(|r| (0..m).map(|i| costs[tab.basis[i]] * tab.at(i, identity_col[r])).sum())
            .collect();

        // Re-solve the final basis directly against the original data; this
        // removes the error accumulated across tableau pivots.
        let basis_matrix = Matrix::from_fn(m, m, |i, k| a[(i, tab.basis[k])]);
        if m > 0 {
            if let Ok(lu) = Lu::factor(&basis_matrix, opts.pivot_tolerance) {
                x_basic = lu.solve(&b);
                let cb: Vec<f64> = tab.basis.iter().map(|&j| costs[j]).collect();
                duals = lu.solve_transposed(&cb);
            }
        }

        let mut x = vec![0.0; n];
        for (i, &j) in tab.basis.iter().enumerate() {
            if j < n {
                x[j] = x_basic[i];
            }
        }
        for (y, s) in duals.iter_mut().zip(&sign) {
            *y *= s;
        }
        let objective = x.iter().zip(&self.objective).map(|(a, c)| a * c).sum();
        Ok(LpOptimum { x, objective, duals, iterations })
    }
}
