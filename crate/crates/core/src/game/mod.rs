//! Known-matrix zero-sum games: payoff matrices, mixed strategies, exact
//! saddle-point solving and the small utilities built on top of it.
//!
//! Conventions: the row player picks `i`, the column player picks `j`, and
//! the row player pays `A[i][j]` to the column player. The column player
//! (strategy `x` over `k` columns) maximizes `yᵀAx`; the row player (strategy
//! `y` over `m` rows) minimizes it.

mod simplex;
pub(crate) mod support;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use support::{brute_force_solution, BRUTE_FORCE_MAX_DIM};

/// Tolerance on `Σ p = 1` accepted by [`MixedStrategy::new`].
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

/// Wire form: explicit dimensions plus row-major entries.
#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl TryFrom<RawMatrix> for PayoffMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        PayoffMatrix::new(raw.rows, raw.cols, raw.entries)
    }
}

impl From<PayoffMatrix> for RawMatrix {
    fn from(a: PayoffMatrix) -> Self {
        RawMatrix {
            rows: a.rows,
            cols: a.cols,
            entries: a.entries,
        }
    }
}

impl PayoffMatrix {
    /// Builds an `rows × cols` matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "payoff matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "entry ({}, {}) is not finite",
                pos / cols,
                pos % cols
            )));
        }
        Ok(PayoffMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::invalid("ragged payoff matrix"));
        }
        PayoffMatrix::new(m, k, rows.concat())
    }

    /// Rock-paper-scissors.
    pub fn rock_paper_scissors() -> Self {
        PayoffMatrix::new(
            3,
            3,
            vec![0.0, 1.0, -1.0, -1.0, 0.0, 1.0, 1.0, -1.0, 0.0],
        )
        .expect("static matrix")
    }

    /// `m`: number of row-player actions.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `k`: number of column-player actions.
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    /// `A x`, one entry per row.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        self.entries
            .chunks(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Aᵀ y`, one entry per column.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (row, &w) in self.entries.chunks(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += w * a;
            }
        }
        out
    }

    /// The game seen from the other seat: `−Aᵀ`.
    pub fn negated_transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(-self.get(i, j));
            }
        }
        PayoffMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        PayoffMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|v| v + c).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl fmt::Display for PayoffMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.entries.chunks(self.cols) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>8.4}")).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// A probability vector over one player's actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy(Vec<f64>);

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        MixedStrategy::new(v)
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(s: MixedStrategy) -> Self {
        s.0
    }
}

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("mixed strategy over zero actions"));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::invalid(format!(
                "mixed strategy has invalid component {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::invalid(format!(
                "mixed strategy sums to {total}, not 1"
            )));
        }
        Ok(MixedStrategy(probs))
    }

    /// Normalizes non-negative weights; negative round-off is clipped to zero.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let clipped: Vec<f64> = weights.into_iter().map(|w| w.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::invalid("weights do not define a distribution"));
        }
        MixedStrategy::new(clipped.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform strategy over zero actions");
        MixedStrategy(vec![1.0 / n as f64; n])
    }

    pub fn pure(n: usize, action: usize) -> Self {
        assert!(action < n, "action {action} out of range for {n} actions");
        let mut p = vec![0.0; n];
        p[action] = 1.0;
        MixedStrategy(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs_diff(&self, other: &MixedStrategy) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// A saddle point `(x*, y*, V*)` of a known matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    /// Column player's optimal strategy.
    pub x_star: MixedStrategy,
    /// Row player's optimal strategy.
    pub y_star: MixedStrategy,
    pub value: f64,
    /// `max_j (Aᵀy*)_j − min_i (Ax*)_i`, zero at an exact saddle point.
    pub gap: f64,
}

impl GameSolution {
    /// What the column player's `x*` guarantees: `min_i (Ax*)_i`.
    pub fn column_guarantee(&self, a: &PayoffMatrix) -> f64 {
        a.apply(self.x_star.probs())
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// What the row player's `y*` concedes at most: `max_j (Aᵀy*)_j`.
    pub fn row_guarantee(&self, a: &PayoffMatrix) -> f64 {
        a.apply_transpose(self.y_star.probs())
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn duality_gap(a: &PayoffMatrix, x: &MixedStrategy, y: &MixedStrategy) -> f64 {
    let upper = a
        .apply_transpose(y.probs())
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let lower = a.apply(x.probs()).into_iter().fold(f64::INFINITY, f64::min);
    upper - lower
}

/// Solves the zero-sum game exactly with a dense simplex method.
///
/// Ties between optimal vertices are broken by Bland's rule, so the result is
/// a deterministic function of `a`.
pub fn solve_zero_sum(a: &PayoffMatrix, tol: f64) -> Result<GameSolution> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let sol = simplex::solve(a)?;
    if sol.gap > tol {
        return Err(Error::Numerical(format!(
            "simplex solution has duality gap {:.3e} above tolerance {tol:.3e}",
            sol.gap
        )));
    }
    Ok(sol)
}

/// The row that minimizes the column player's expected payoff against `x`,
/// with the payoff it achieves. Ties go to the lowest index.
pub fn best_response_row(a: &PayoffMatrix, x: &MixedStrategy) -> Result<(usize, f64)> {
    if x.len() != a.cols() {
        return Err(Error::invalid(format!(
            "strategy has {} components, matrix has {} columns",
            x.len(),
            a.cols()
        )));
    }
    let payoffs = a.apply(x.probs());
    let mut best = (0, payoffs[0]);
    for (i, &p) in payoffs.iter().enumerate().skip(1) {
        if p < best.1 {
            best = (i, p);
        }
    }
    Ok(best)
}

/// `yᵀ A x`.
pub fn expected_payoff(a: &PayoffMatrix, x: &MixedStrategy, y: &MixedStrategy) -> Result<f64> {
    if x.len() != a.cols() || y.len() != a.rows() {
        return Err(Error::invalid(format!(
            "strategy sizes ({}, {}) do not match a {}x{} matrix",
            y.len(),
            x.len(),
            a.rows(),
            a.cols()
        )));
    }
    Ok(a.apply(x.probs())
        .iter()
        .zip(y.probs())
        .map(|(ax, yi)| ax * yi)
        .sum())
}

/// `Σ p_i ln(p_i / q_i)` with `0 ln 0 = 0`.
///
/// Returns `f64::INFINITY` when `p` puts mass where `q` has none; the run logs
/// write this sentinel as `inf`.
pub fn kl_divergence(p: &MixedStrategy, q: &MixedStrategy) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!(
            "KL divergence between strategies of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    let mut total = 0.0;
    for (&pi, &qi) in p.probs().iter().zip(q.probs()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += pi * (pi / qi).ln();
    }
    // Round-off can leave a tiny negative number for identical inputs.
    Ok(total.max(0.0))
}
