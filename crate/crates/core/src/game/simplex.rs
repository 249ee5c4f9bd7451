//! Dense tableau simplex for the row player's program
//!
//!   maximize Σ_i w_i  subject to  Bᵀw ≤ 1, w ≥ 0,
//!
//! where `B = A − min(A) + 1` is entrywise ≥ 1. At the optimum `Σ w = 1/V_B`,
//! `y* = w / Σw`, and the reduced costs of the slacks are the dual `u` with
//! `x* = u / Σu`.

use super::{duality_gap, GameSolution, MixedStrategy, PayoffMatrix};
use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;

pub(super) fn solve(a: &PayoffMatrix) -> Result<GameSolution> {
    let m = a.rows();
    let k = a.cols();
    let shift = 1.0 - a.min_entry();
    let vars = m + k;
    let width = vars + 1;

    // k constraint rows, one per column of A.
    let mut tab = vec![0.0; k * width];
    for j in 0..k {
        let row = &mut tab[j * width..(j + 1) * width];
        for (i, cell) in row[..m].iter_mut().enumerate() {
            *cell = a.get(i, j) + shift;
        }
        row[m + j] = 1.0;
        row[vars] = 1.0;
    }
    let mut obj = vec![0.0; width];
    obj[..m].fill(-1.0);
    let mut basis: Vec<usize> = (m..m + k).collect();

    let cap = 10 * (m + k + 2).pow(2);
    let mut iterations = 0;
    // Bland: lowest-index improving column enters.
    while let Some(enter) = (0..vars).find(|&c| obj[c] < -PIVOT_EPS) {
        if iterations >= cap {
            return Err(Error::SolverCycling { iterations });
        }
        iterations += 1;

        let mut leave: Option<(usize, f64)> = None;
        for r in 0..k {
            let coef = tab[r * width + enter];
            if coef <= PIVOT_EPS {
                continue;
            }
            let ratio = tab[r * width + vars] / coef;
            leave = match leave {
                None => Some((r, ratio)),
                Some((best, best_ratio)) => {
                    let tie = (ratio - best_ratio).abs() <= PIVOT_EPS * best_ratio.abs().max(1.0);
                    if ratio < best_ratio && !tie || tie && basis[r] < basis[best] {
                        Some((r, ratio))
                    } else {
                        Some((best, best_ratio))
                    }
                }
            };
        }
        // Bᵀw ≤ 1 with B > 0 keeps the program bounded.
        let (pivot_row, _) = leave.ok_or_else(|| {
            Error::Numerical("unbounded simplex step on a bounded program".into())
        })?;
        pivot(&mut tab, &mut obj, width, pivot_row, enter);
        basis[pivot_row] = enter;
    }

    let mut w = vec![0.0; m];
    for (r, &b) in basis.iter().enumerate() {
        if b < m {
            w[b] = tab[r * width + vars];
        }
    }
    let u: Vec<f64> = obj[m..m + k].to_vec();
    let total = obj[vars];
    if !(total > 0.0) {
        return Err(Error::Numerical(format!(
            "degenerate simplex optimum with objective {total}"
        )));
    }

    let y_star = MixedStrategy::from_weights(w)?;
    let x_star = MixedStrategy::from_weights(u)?;
    let value = 1.0 / total - shift;
    let gap = duality_gap(a, &x_star, &y_star);
    Ok(GameSolution {
        x_star,
        y_star,
        value,
        gap,
    })
}

fn pivot(tab: &mut [f64], obj: &mut [f64], width: usize, pr: usize, pc: usize) {
    let rows = tab.len() / width;
    let p = tab[pr * width + pc];
    for c in 0..width {
        tab[pr * width + c] /= p;
    }
    tab[pr * width + pc] = 1.0;
    let pivot_row: Vec<f64> = tab[pr * width..(pr + 1) * width].to_vec();
    for r in (0..rows).filter(|&r| r != pr) {
        let f = tab[r * width + pc];
        if f != 0.0 {
            for (c, pv) in pivot_row.iter().enumerate() {
                tab[r * width + c] -= f * pv;
            }
            tab[r * width + pc] = 0.0;
        }
    }
    let f = obj[pc];
    if f != 0.0 {
        for (o, pv) in obj.iter_mut().zip(&pivot_row) {
            *o -= f * pv;
        }
        obj[pc] = 0.0;
    }
}
