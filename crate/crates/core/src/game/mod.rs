//! Finite zero-sum two-person games with positive payoffs.
//!
//! The row player (the online algorithm) maximises, the column player (the
//! adversary) minimises. A game is solved either through the primal/dual
//! linear programs
//!
//! ```text
//! minimize xᵀu_m  s.t.  xᵀH ≥ u_nᵀ, x ≥ 0
//! maximize yᵀu_n  s.t.  H y ≤ u_m,  y ≥ 0
//! ```
//!
//! or, for square nonsingular matrices with a nonnegative inverse image of
//! the all-ones vector, directly through `H⁻¹`. In both cases the value is
//! `v* = 1 / xᵀu_m` and the optimal competitive ratio is `r* = 1 / v*`.

pub mod simplex;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::matrix::{Lu, Matrix, MatrixError};
use simplex::{Constraint, LinearProgram, Relation, SimplexError, SimplexOptions};

pub use crate::matrix::invert_matrix;

/// Primal/dual feasibility slack used by the checks in this module.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;
/// Slack on optimality conditions (duality gap, saddle inequalities).
pub const OPTIMALITY_TOLERANCE: f64 = 1e-8;
/// Smallest pivot magnitude accepted during elimination.
pub const PIVOT_TOLERANCE: f64 = 1e-12;
/// Components of the closed-form `x`, `y` in `[-ε, 0)` are rounded to zero.
pub const NEGATIVE_ROUNDING_TOLERANCE: f64 = 1e-12;
/// Slack on probability vectors summing to one.
pub const SIMPLEX_SUM_TOLERANCE: f64 = 1e-12;
/// Slack used when collecting worst-case columns.
pub const WORST_CASE_TOLERANCE: f64 = 1e-10;
/// Slack used when verifying an extreme-point certificate.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub feasibility: f64,
    pub optimality: f64,
    pub pivot: f64,
    pub negative_rounding: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feasibility: FEASIBILITY_TOLERANCE,
            optimality: OPTIMALITY_TOLERANCE,
            pivot: PIVOT_TOLERANCE,
            negative_rounding: NEGATIVE_ROUNDING_TOLERANCE,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("payoff entry ({row}, {col}) = {value} is not a positive finite number")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },
    #[error("singular matrix: {0}")]
    SingularMatrix(MatrixError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("closed-form route does not apply: {0}")]
    PreconditionViolated(String),
    #[error("invalid mixed strategy: {0}")]
    InvalidStrategy(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl From<MatrixError> for GameError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::Singular { .. } => GameError::SingularMatrix(e),
            MatrixError::NotSquare { rows, cols } => {
                GameError::DimensionMismatch(format!("expected a square matrix, got {rows}x{cols}"))
            }
            MatrixError::DimensionMismatch(s) => GameError::DimensionMismatch(s),
            MatrixError::Empty => GameError::DimensionMismatch("empty matrix".into()),
        }
    }
}

/// A payoff matrix with strictly positive, finite entries.
#[derive(Clone, PartialEq)]
pub struct PayoffMatrix(Matrix);

impl PayoffMatrix {
    pub fn new(m: Matrix) -> Result<Self, GameError> {
        if m.rows() == 0 || m.cols() == 0 {
            return Err(GameError::DimensionMismatch("payoff matrix must be non-empty".into()));
        }
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = m[(i, j)];
                if !(v.is_finite() && v > 0.0) {
                    return Err(GameError::NonPositiveEntry { row: i, col: j, value: v });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, GameError> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// Multiplies every payoff by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self, GameError> {
        Self::new(self.0.scale(factor))
    }

    /// Expected payoff of the row mixture `f` against each column.
    pub fn row_mixture_payoffs(&self, f: &[f64]) -> Vec<f64> {
        self.0.vec_mul(f)
    }

    /// Expected payoff of each row against the column mixture `g`.
    pub fn column_mixture_payoffs(&self, g: &[f64]) -> Vec<f64> {
        self.0.mul_vec(g)
    }
}

impl fmt::Debug for PayoffMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A probability vector over a finite set of pure strategies.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    pub fn new(weights: Vec<f64>) -> Result<Self, GameError> {
        if weights.is_empty() {
            return Err(GameError::InvalidStrategy("no pure strategies".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(GameError::InvalidStrategy(format!("weight {i} = {w} is negative or not finite")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOLERANCE {
            return Err(GameError::InvalidStrategy(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(weights))
    }

    /// Normalises a nonnegative, nonzero vector onto the probability simplex.
    /// Entries in `[-tol, 0)` are treated as zero.
    pub fn from_nonnegative(v: &[f64], tol: f64) -> Result<Self, GameError> {
        let mut w: Vec<f64> = Vec::with_capacity(v.len());
        for (i, &x) in v.iter().enumerate() {
            if !x.is_finite() || x < -tol {
                return Err(GameError::InvalidStrategy(format!("component {i} = {x} is negative")));
            }
            w.push(x.max(0.0));
        }
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0) {
            return Err(GameError::InvalidStrategy("zero vector".into()));
        }
        w.iter_mut().for_each(|x| *x /= sum);
        Self::new(w)
    }

    /// The pure strategy `index` out of `len`.
    pub fn pure(len: usize, index: usize) -> Self {
        assert!(index < len);
        let mut w = vec![0.0; len];
        w[index] = 1.0;
        Self(w)
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0);
        Self(vec![1.0 / len as f64; len])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Optimal feasible solutions of the primal and dual programs.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl LpSolution {
    pub fn duality_gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
    }

    /// Largest violation of `xᵀH ≥ u`, `Hy ≤ u`, `x, y ≥ 0`.
    pub fn max_infeasibility(&self, h: &PayoffMatrix) -> f64 {
        let col = h.row_mixture_payoffs(&self.primal);
        let row = h.column_mixture_payoffs(&self.dual);
        let a = col.iter().map(|v| 1.0 - v).fold(0.0, f64::max);
        let b = row.iter().map(|v| v - 1.0).fold(0.0, f64::max);
        let c = self.primal.iter().chain(&self.dual).map(|v| -v).fold(0.0, f64::max);
        a.max(b).max(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    pub value: f64,
    pub ratio: f64,
    pub online: MixedStrategy,
    pub adversary: MixedStrategy,
    /// Set only when uniqueness of the optimal strategies is certified.
    pub unique: bool,
}

impl GameSolution {
    fn from_value(value: f64, online: MixedStrategy, adversary: MixedStrategy, unique: bool) -> Self {
        Self { value, ratio: 1.0 / value, online, adversary, unique }
    }

    /// How far `(f, g)` is from a saddle point at `v*`: the larger of
    /// `v* − min_j fᵀH^j` and `max_i H_i g − v*`, floored at zero.
    pub fn saddle_violation(&self, h: &PayoffMatrix) -> f64 {
        let lo = h
            .row_mixture_payoffs(self.online.weights())
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let hi = h
            .column_mixture_payoffs(self.adversary.weights())
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        (self.value - lo).max(hi - self.value).max(0.0)
    }
}

/// Which solver produced a [`GameSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveRoute {
    ClosedForm,
    LinearProgram,
}

impl fmt::Display for SolveRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveRoute::ClosedForm => "closed-form",
            SolveRoute::LinearProgram => "linear-program",
        })
    }
}

/// Solves the primal and the dual program with the two-phase simplex.
pub fn solve_lp(h: &PayoffMatrix) -> Result<LpSolution, GameError> {
    solve_lp_with(h, &Tolerances::default())
}

pub fn solve_lp_with(h: &PayoffMatrix, tol: &Tolerances) -> Result<LpSolution, GameError> {
    let (m, n) = (h.rows(), h.cols());
    let constraints = (0..n)
        .map(|j| Constraint {
            coefficients: h.matrix().column(j),
            relation: Relation::GreaterEq,
            rhs: 1.0,
        })
        .collect();
    let lp = LinearProgram { objective: vec![1.0; m], constraints };
    let opts = SimplexOptions {
        pivot_tolerance: tol.pivot,
        feasibility_tolerance: tol.feasibility,
        ..SimplexOptions::default()
    };
    let opt = lp.solve_with(&opts).map_err(|e| match e {
        SimplexError::IterationLimit(_) => GameError::NumericalFailure(e.to_string()),
        // Positive payoffs make both programs feasible and bounded.
        other => GameError::NumericalFailure(format!("unexpected simplex outcome: {other}")),
    })?;

    let clamp = |v: Vec<f64>| -> Vec<f64> {
        v.into_iter().map(|x| if x < 0.0 && x >= -tol.feasibility { 0.0 } else { x }).collect()
    };
    let primal = clamp(opt.x);
    let dual = clamp(opt.duals);
    let solution = LpSolution {
        primal_objective: primal.iter().sum(),
        dual_objective: dual.iter().sum(),
        primal,
        dual,
    };
    let infeasible = solution.max_infeasibility(h);
    if infeasible > tol.feasibility {
        return Err(GameError::NumericalFailure(format!(
            "simplex returned a point violating feasibility by {infeasible:e}"
        )));
    }
    Ok(solution)
}

/// Solves the game via linear programming. Never certifies uniqueness.
pub fn solve_game_lp(h: &PayoffMatrix) -> Result<GameSolution, GameError> {
    solve_game_lp_with(h, &Tolerances::default())
}

pub fn solve_game_lp_with(h: &PayoffMatrix, tol: &Tolerances) -> Result<GameSolution, GameError> {
    let lp = solve_lp_with(h, tol)?;
    let online = MixedStrategy::from_nonnegative(&lp.primal, 0.0)?;
    let adversary = MixedStrategy::from_nonnegative(&lp.dual, 0.0)?;
    Ok(GameSolution::from_value(1.0 / lp.primal_objective, online, adversary, false))
}

/// `x = (u_nᵀH⁻¹)ᵀ` and `y = H⁻¹u_n` for a square nonsingular `H`.
pub fn closed_form_vectors(h: &Matrix, tol: &Tolerances) -> Result<(Vec<f64>, Vec<f64>), GameError> {
    if !h.is_square() {
        return Err(GameError::DimensionMismatch(format!(
            "closed form needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let n = h.rows();
    let lu = Lu::factor(h, tol.pivot)?;
    let ones = vec![1.0; n];
    Ok((lu.solve_transposed(&ones), lu.solve(&ones)))
}

/// Solves a square game through `H⁻¹`.
///
/// Requires `x = (u_nᵀH⁻¹)ᵀ ≥ 0` and `y = H⁻¹u_n ≥ 0`; otherwise returns
/// [`GameError::PreconditionViolated`] and the caller should use
/// [`solve_game_lp`]. The solution is flagged unique when every component
/// of both vectors is strictly positive.
pub fn solve_game_closed_form(h: &PayoffMatrix) -> Result<GameSolution, GameError> {
    solve_game_closed_form_with(h, &Tolerances::default())
}

pub fn solve_game_closed_form_with(h: &PayoffMatrix, tol: &Tolerances) -> Result<GameSolution, GameError> {
    let (x, y) = closed_form_vectors(h.matrix(), tol)?;
    let clean = |v: Vec<f64>, name: &str| -> Result<Vec<f64>, GameError> {
        v.into_iter()
            .enumerate()
            .map(|(i, c)| {
                if c >= 0.0 {
                    Ok(c)
                } else if c >= -tol.negative_rounding {
                    Ok(0.0)
                } else {
                    Err(GameError::PreconditionViolated(format!("{name}[{i}] = {c:e} is negative")))
                }
            })
            .collect()
    };
    let x = clean(x, "x")?;
    let y = clean(y, "y")?;
    let unique = x.iter().chain(&y).all(|&c| c > tol.negative_rounding);
    let ratio: f64 = x.iter().sum();
    let online = MixedStrategy::from_nonnegative(&x, 0.0)?;
    let adversary = MixedStrategy::from_nonnegative(&y, 0.0)?;
    Ok(GameSolution { value: 1.0 / ratio, ratio, online, adversary, unique })
}

/// Tries the closed form first and falls back to the LP when it does not
/// apply (non-square, singular, or a negative component).
pub fn solve_game(h: &PayoffMatrix) -> Result<(GameSolution, SolveRoute), GameError> {
    solve_game_with(h, &Tolerances::default())
}

pub fn solve_game_with(h: &PayoffMatrix, tol: &Tolerances) -> Result<(GameSolution, SolveRoute), GameError> {
    match solve_game_closed_form_with(h, tol) {
        Ok(s) => Ok((s, SolveRoute::ClosedForm)),
        Err(GameError::PreconditionViolated(_))
        | Err(GameError::SingularMatrix(_))
        | Err(GameError::DimensionMismatch(_)) => Ok((solve_game_lp_with(h, tol)?, SolveRoute::LinearProgram)),
        Err(e) => Err(e),
    }
}

/// Columns `j` minimising `xᵀH^j` (within `WORST_CASE_TOLERANCE`), i.e. the
/// adversary's best replies to the row mixture proportional to `x`.
/// Indices are zero-based.
pub fn worst_case_columns(h: &PayoffMatrix, x: &[f64]) -> Result<BTreeSet<usize>, GameError> {
    if x.len() != h.rows() {
        return Err(GameError::DimensionMismatch(format!(
            "x has {} components for {} rows",
            x.len(),
            h.rows()
        )));
    }
    if x.iter().any(|&v| !(v >= 0.0)) || x.iter().all(|&v| v == 0.0) {
        return Err(GameError::InvalidStrategy("x must be nonnegative and nonzero".into()));
    }
    let payoffs = h.row_mixture_payoffs(x);
    let min = payoffs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(payoffs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p - min <= WORST_CASE_TOLERANCE)
        .map(|(j, _)| j)
        .collect())
}

/// Verifies an extreme-point certificate `(I, J)` for the optimal pair
/// `(x, y)`: the submatrix `H[I, J]` is square and nonsingular, `x` and `y`
/// make the selected columns and rows tight, and vanish off `I` and `J`.
///
/// `rows` and `cols` are zero-based index sets. Sets of different size are a
/// [`GameError::DimensionMismatch`].
pub fn check_extreme_point(
    h: &PayoffMatrix,
    x: &[f64],
    y: &[f64],
    rows: &BTreeSet<usize>,
    cols: &BTreeSet<usize>,
) -> Result<bool, GameError> {
    if rows.len() != cols.len() {
        return Err(GameError::DimensionMismatch(format!(
            "|I| = {} but |J| = {}",
            rows.len(),
            cols.len()
        )));
    }
    if x.len() != h.rows() || y.len() != h.cols() {
        return Err(GameError::DimensionMismatch("x or y does not match the payoff matrix".into()));
    }
    if rows.iter().any(|&i| i >= h.rows()) || cols.iter().any(|&j| j >= h.cols()) {
        return Err(GameError::DimensionMismatch("index out of range".into()));
    }
    if rows.is_empty() {
        return Ok(false);
    }
    let tol = CERTIFICATE_TOLERANCE;
    let ri: Vec<usize> = rows.iter().copied().collect();
    let cj: Vec<usize> = cols.iter().copied().collect();
    let sub = h.matrix().submatrix(&ri, &cj);
    if Lu::factor(&sub, PIVOT_TOLERANCE).is_err() {
        return Ok(false);
    }
    let columns_tight = cj
        .iter()
        .all(|&j| (ri.iter().map(|&i| h.get(i, j) * x[i]).sum::<f64>() - 1.0).abs() <= tol);
    let rows_tight = ri
        .iter()
        .all(|&i| (cj.iter().map(|&j| h.get(i, j) * y[j]).sum::<f64>() - 1.0).abs() <= tol);
    let x_support = (0..h.rows()).filter(|i| !rows.contains(i)).all(|i| x[i].abs() <= tol);
    let y_support = (0..h.cols()).filter(|j| !cols.contains(j)).all(|j| y[j].abs() <= tol);
    Ok(columns_tight && rows_tight && x_support && y_support)
}
