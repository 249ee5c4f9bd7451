//! Support-enumeration oracle for small games, independent of the simplex.

use super::{duality_gap, GameSolution, MixedStrategy, PayoffMatrix};
use crate::error::{Error, Result};

/// Largest `m` or `k` accepted by [`brute_force_solution`].
pub const BRUTE_FORCE_MAX_DIM: usize = 5;

const SINGULAR_EPS: f64 = 1e-12;
const FEAS_EPS: f64 = 1e-9;

/// Finds a saddle point by enumerating equal-size support pairs `(I, J)`,
/// solving the two bordered indifference systems on the positively shifted
/// matrix, and keeping the first candidate whose saddle certificate holds.
///
/// Singular support systems are skipped: every matrix game has an extreme
/// optimal pair supported on a nonsingular square submatrix.
pub fn brute_force_solution(a: &PayoffMatrix) -> Result<GameSolution> {
    let m = a.rows();
    let k = a.cols();
    if m > BRUTE_FORCE_MAX_DIM || k > BRUTE_FORCE_MAX_DIM {
        return Err(Error::invalid(format!(
            "support enumeration is capped at {BRUTE_FORCE_MAX_DIM}x{BRUTE_FORCE_MAX_DIM}, got {m}x{k}"
        )));
    }
    let shift = 1.0 - a.min_entry();
    let b = a.shifted(shift);
    let scale = b.max_abs().max(1.0);

    for size in 1..=m.min(k) {
        for rows in subsets(m, size) {
            for cols in subsets(k, size) {
                if let Some(sol) = try_support(&b, &rows, &cols, scale) {
                    let value = sol.2 - shift;
                    let x_star = MixedStrategy::from_weights(sol.0)?;
                    let y_star = MixedStrategy::from_weights(sol.1)?;
                    let gap = duality_gap(a, &x_star, &y_star);
                    return Ok(GameSolution {
                        x_star,
                        y_star,
                        value,
                        gap,
                    });
                }
            }
        }
    }
    Err(Error::Numerical(
        "support enumeration found no certified saddle point".into(),
    ))
}

fn try_support(
    b: &PayoffMatrix,
    rows: &[usize],
    cols: &[usize],
    scale: f64,
) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let s = rows.len();
    // Column strategy: Σ_{j∈J} B_ij x_j − v = 0 for i ∈ I, Σ x_j = 1.
    let mut sys = vec![0.0; (s + 1) * (s + 1)];
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            sys[r * (s + 1) + c] = b.get(i, j);
        }
        sys[r * (s + 1) + s] = -1.0;
    }
    for c in 0..s {
        sys[s * (s + 1) + c] = 1.0;
    }
    let mut rhs = vec![0.0; s + 1];
    rhs[s] = 1.0;
    let xs = solve_linear(sys, rhs, SINGULAR_EPS)?;

    // Row strategy: Σ_{i∈I} B_ij y_i − v = 0 for j ∈ J, Σ y_i = 1.
    let mut sys = vec![0.0; (s + 1) * (s + 1)];
    for (r, &j) in cols.iter().enumerate() {
        for (c, &i) in rows.iter().enumerate() {
            sys[r * (s + 1) + c] = b.get(i, j);
        }
        sys[r * (s + 1) + s] = -1.0;
    }
    for c in 0..s {
        sys[s * (s + 1) + c] = 1.0;
    }
    let mut rhs = vec![0.0; s + 1];
    rhs[s] = 1.0;
    let ys = solve_linear(sys, rhs, SINGULAR_EPS)?;

    let v = xs[s];
    if (v - ys[s]).abs() > FEAS_EPS * scale {
        return None;
    }
    if xs[..s].iter().chain(&ys[..s]).any(|&p| p < -FEAS_EPS) {
        return None;
    }

    let mut x = vec![0.0; b.cols()];
    for (c, &j) in cols.iter().enumerate() {
        x[j] = xs[c].max(0.0);
    }
    let mut y = vec![0.0; b.rows()];
    for (c, &i) in rows.iter().enumerate() {
        y[i] = ys[c].max(0.0);
    }
    // Saddle certificate over all rows and columns, not only the support.
    let bx = b.apply(&x);
    let by = b.apply_transpose(&y);
    let tol = FEAS_EPS * scale;
    if bx.iter().any(|&p| p < v - tol) || by.iter().any(|&p| p > v + tol) {
        return None;
    }
    Some((x, y, v))
}

/// Gaussian elimination with partial pivoting on a dense square system.
/// Gaussian elimination with partial pivoting; `None` once a pivot falls below `eps`.
pub(crate) fn solve_linear(mut a: Vec<f64>, mut b: Vec<f64>, eps: f64) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs < eps {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|c| a[r * n + c] * x[c]).sum();
        x[r] = (b[r] - tail) / a[r * n + r];
    }
    Some(x)
}

/// All `size`-subsets of `0..n` in increasing bitmask order.
fn subsets(n: usize, size: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..1 << n)
        .filter(move |mask| mask.count_ones() as usize == size)
        .map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
}
