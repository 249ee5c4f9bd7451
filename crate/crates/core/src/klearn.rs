//! The K-learning convex program
//!
//!   minimize over y ∈ Δ_m, τ ∈ [τ_min, τ_max]:  F(y, τ) = τ · lse_j K_j(y/τ),
//!
//! where `K_j` is the posterior cumulant generating function of column `j`.
//! The policy is the softmax `x_j ∝ exp K_j(y*/τ*)`.
//!
//! The solver alternates exponentiated-gradient and projected-gradient steps
//! on `y` (each with backtracking) and an exact line search on `ln τ`. `F` is
//! jointly convex, so it is unimodal in `τ` for fixed `y` and unimodal in any
//! monotone reparametrization of `τ`.

use serde::{Deserialize, Serialize};

use crate::belief::BeliefState;
use crate::error::{Error, Result};
use crate::game::support::solve_linear;
use crate::game::MixedStrategy;

pub const TAU_MIN: f64 = 1e-6;
pub const TAU_MAX: f64 = 1e4;
pub const DEFAULT_MAX_SWEEPS: usize = 5000;

const TAU_BISECT_TOL: f64 = 1e-13;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KLearnSolution {
    pub y_star: MixedStrategy,
    pub tau_star: f64,
    pub x_star: MixedStrategy,
    pub objective: f64,
    pub iterations: usize,
    /// Gradient-mapping norm over `Δ_m × [τ_min, τ_max]` at the returned point.
    pub stationarity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl SolverOptions {
    pub fn new(tol: f64) -> Self {
        SolverOptions {
            tol,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

/// Column log-partition terms at `(y, τ)`.
struct Eval {
    value: f64,
    /// `K_j(y/τ)` per column.
    cgfs: Vec<f64>,
    lse: f64,
}

fn evaluate(b: &BeliefState, y: &[f64], tau: f64) -> Eval {
    let (m, k) = (b.rows(), b.cols());
    let mut cgfs = vec![0.0; k];
    for (i, &yi) in y.iter().enumerate().take(m) {
        let v = yi / tau;
        for (j, c) in cgfs.iter_mut().enumerate() {
            *c += b.entry_cgf(i * k + j, v).0;
        }
    }
    let lse = log_sum_exp(&cgfs);
    Eval {
        value: tau * lse,
        cgfs,
        lse,
    }
}

/// `(∂F/∂y, ∂F/∂τ, F, softmax policy)` at `(y, τ)`.
fn evaluate_with_gradient(b: &BeliefState, y: &[f64], tau: f64) -> (Vec<f64>, f64, f64, Vec<f64>) {
    let (m, k) = (b.rows(), b.cols());
    let mut cgfs = vec![0.0; k];
    let mut slopes = vec![0.0; m * k];
    for (i, &yi) in y.iter().enumerate().take(m) {
        let v = yi / tau;
        for j in 0..k {
            let (c, d) = b.entry_cgf(i * k + j, v);
            cgfs[j] += c;
            slopes[i * k + j] = d;
        }
    }
    let lse = log_sum_exp(&cgfs);
    let x = softmax_from(&cgfs, lse);
    let mut grad_y = vec![0.0; m];
    let mut tilt = 0.0;
    for (i, g) in grad_y.iter_mut().enumerate() {
        let row = &slopes[i * k..(i + 1) * k];
        let s: f64 = row.iter().zip(&x).map(|(d, xj)| d * xj).sum();
        *g = s;
        tilt += y[i] / tau * s;
    }
    (grad_y, lse - tilt, tau * lse, x)
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::INFINITY {
        return top;
    }
    top + v.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

fn softmax_from(v: &[f64], lse: f64) -> Vec<f64> {
    let w: Vec<f64> = v.iter().map(|x| (x - lse).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn check_point(b: &BeliefState, y: &MixedStrategy, tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    if y.len() != b.rows() {
        return Err(Error::invalid(format!(
            "y has {} components, belief has {} rows",
            y.len(),
            b.rows()
        )));
    }
    Ok(())
}

/// `τ · ln Σ_j exp K_j(y/τ)`.
pub fn objective(b: &BeliefState, y: &MixedStrategy, tau: f64) -> Result<f64> {
    check_point(b, y, tau)?;
    Ok(evaluate(b, y.probs(), tau).value)
}

/// Analytic gradient of the objective with respect to `y` (unconstrained
/// coordinates) and `τ`.
pub fn gradient(b: &BeliefState, y: &[f64], tau: f64) -> Result<(Vec<f64>, f64)> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    if y.len() != b.rows() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("gradient point must be finite with one entry per row"));
    }
    let (gy, gt, _, _) = evaluate_with_gradient(b, y, tau);
    Ok((gy, gt))
}

/// Objective evaluated at an arbitrary (not necessarily simplex) `y`.
pub fn objective_at(b: &BeliefState, y: &[f64], tau: f64) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    if y.len() != b.rows() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("objective point must be finite with one entry per row"));
    }
    Ok(evaluate(b, y, tau).value)
}

/// `Σ_j x_j τ K_j(y/τ) + τ H(x)` with natural-log entropy.
pub fn lagrangian(b: &BeliefState, x: &MixedStrategy, y: &MixedStrategy, tau: f64) -> Result<f64> {
    check_point(b, y, tau)?;
    if x.len() != b.cols() {
        return Err(Error::invalid(format!(
            "x has {} components, belief has {} columns",
            x.len(),
            b.cols()
        )));
    }
    let e = evaluate(b, y.probs(), tau);
    let mut total = 0.0;
    for (&xj, &kj) in x.probs().iter().zip(&e.cgfs) {
        if xj > 0.0 {
            total += xj * tau * kj - tau * xj * xj.ln();
        }
    }
    Ok(total)
}

/// The policy `x_j ∝ exp K_j(y/τ)`.
pub fn policy(b: &BeliefState, y: &MixedStrategy, tau: f64) -> Result<MixedStrategy> {
    check_point(b, y, tau)?;
    let e = evaluate(b, y.probs(), tau);
    MixedStrategy::from_weights(softmax_from(&e.cgfs, e.lse))
}

/// Solves the program from a cold start.
pub fn solve(b: &BeliefState, tol: f64) -> Result<KLearnSolution> {
    solve_with(b, SolverOptions::new(tol), None)
}

/// Solves the program, optionally warm-started from a previous `(y, τ)`.
pub fn solve_with(
    b: &BeliefState,
    opts: SolverOptions,
    warm: Option<(&MixedStrategy, f64)>,
) -> Result<KLearnSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let m = b.rows();
    let mut y: Vec<f64> = match warm {
        Some((w, _)) if w.len() == m => {
            // Keep every coordinate reachable by the multiplicative update.
            let mix = 1e-4;
            w.probs().iter().map(|p| (1.0 - mix) * p + mix / m as f64).collect()
        }
        _ => vec![1.0 / m as f64; m],
    };
    let mut log_tau = match warm {
        Some((_, t)) if t.is_finite() && t > 0.0 => {
            line_search_tau(b, &y, t.clamp(TAU_MIN, TAU_MAX).ln())
        }
        _ => line_search_tau(b, &y, 0.0),
    };

    let max_var = b.post_vars().iter().copied().fold(0.0, f64::max);
    let mut step = 1.0 / (1.0 + max_var / log_tau.exp());
    let mut pg_step = step;

    let mut sweeps = 0;
    loop {
        let tau = log_tau.exp();
        let (grad_y, grad_tau, value, x) = evaluate_with_gradient(b, &y, tau);
        let stat = stationarity(&y, &grad_y, tau, grad_tau);
        if stat <= opts.tol || sweeps >= opts.max_sweeps {
            let sol = KLearnSolution {
                y_star: MixedStrategy::from_weights(y)?,
                tau_star: tau,
                x_star: MixedStrategy::from_weights(x)?,
                objective: value,
                iterations: sweeps,
                stationarity: stat,
            };
            if stat <= opts.tol {
                return Ok(sol);
            }
            return Err(Error::NonConvergence {
                iterations: sweeps,
                stationarity: stat,
                best: Box::new(sol),
            });
        }
        sweeps += 1;

        // Exponentiated-gradient step on y at fixed τ.
        let shift = grad_y.iter().copied().fold(f64::INFINITY, f64::min);
        let mut moved = false;
        for _ in 0..MAX_BACKTRACKS {
            let mut cand: Vec<f64> = y
                .iter()
                .zip(&grad_y)
                .map(|(yi, g)| yi * (-step * (g - shift)).exp())
                .collect();
            let total: f64 = cand.iter().sum();
            cand.iter_mut().for_each(|c| *c /= total);
            let cand_value = evaluate(b, &cand, tau).value;
            // Mirror-descent sufficient decrease: the step must not exceed the
            // local smoothness relative to KL, otherwise EG overshoots and
            // settles into a slowly damped two-cycle.
            let linear: f64 = grad_y.iter().zip(cand.iter().zip(&y)).map(|(g, (c, a))| g * (c - a)).sum();
            let kl = kl_divergence_near(&cand, &y);
            let model = value + linear + kl / step;
            if cand_value <= model + 4.0 * f64::EPSILON * value.abs() {
                y = cand;
                step *= 2.0;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            // No representable decrease in y; restart the step scale.
            step = 1.0 / (1.0 + max_var / tau);
        }

        // Euclidean projected-gradient step. Multiplicative updates only
        // approach the boundary geometrically, and when the optimum sits on a
        // face with a vanishing gradient gap they crawl; projection sets such
        // coordinates to zero outright.
        let value = evaluate(b, &y, tau).value;
        let (grad_y, _, _, _) = evaluate_with_gradient(b, &y, tau);
        let mean_grad = grad_y.iter().sum::<f64>() / m as f64;
        let mut pg_moved = false;
        for _ in 0..MAX_BACKTRACKS {
            let stepped: Vec<f64> = y.iter().zip(&grad_y).map(|(a, g)| a - pg_step * g).collect();
            let cand = project_simplex(&stepped);
            let diff: Vec<f64> = cand.iter().zip(&y).map(|(c, a)| c - a).collect();
            let sq: f64 = diff.iter().map(|d| d * d).sum();
            if sq == 0.0 {
                pg_moved = true;
                break;
            }
            let linear: f64 = grad_y.iter().zip(&diff).map(|(g, d)| (g - mean_grad) * d).sum();
            let cand_value = evaluate(b, &cand, tau).value;
            if cand_value <= value + linear + sq / (2.0 * pg_step) + 4.0 * f64::EPSILON * value.abs() {
                y = cand;
                pg_step *= 2.0;
                pg_moved = true;
                break;
            }
            pg_step *= 0.5;
        }
        if !pg_moved {
            pg_step = 1.0 / (1.0 + max_var / tau);
        }

        log_tau = line_search_tau(b, &y, log_tau);

        let tau = log_tau.exp();
        let (grad_y, grad_tau, _, _) = evaluate_with_gradient(b, &y, tau);
        let current = stationarity(&y, &grad_y, tau, grad_tau);
        if let Some((cand, cand_tau)) = newton_step(b, &y, tau, current) {
            y = cand;
            log_tau = cand_tau.ln();
        }
    }
}

/// One damped Newton step on `(y, τ)` over the current support of `y`.
///
/// With `v = y/τ` and `G(v) = lse_j K_j(v)`, the Hessian of `F = τ G(y/τ)`
/// is `Jᵀ ∇²G J / τ` with `J = [I, −v]`. Its scale grows like `1/τ`, which
/// is what stalls first-order steps on near-certain beliefs. Coordinates that
/// the step would drive negative are clipped to zero. Returns the new point,
/// or `None` if no decrease was found.
fn newton_step(b: &BeliefState, y: &[f64], tau: f64, current: f64) -> Option<(Vec<f64>, f64)> {
    let (m, k) = (b.rows(), b.cols());
    let free: Vec<usize> = (0..m).filter(|&i| y[i] > 0.0).collect();
    let n = free.len();
    let mut cgfs = vec![0.0; k];
    let mut slopes = vec![0.0; n * k];
    let mut curv = vec![0.0; n * k];
    for (a, &i) in free.iter().enumerate() {
        let v = y[i] / tau;
        for j in 0..k {
            let (c, d) = b.entry_cgf(i * k + j, v);
            cgfs[j] += c;
            slopes[a * k + j] = d;
            curv[a * k + j] = b.entry_cgf_curvature(i * k + j, v);
        }
    }
    let lse = log_sum_exp(&cgfs);
    let x = softmax_from(&cgfs, lse);
    let g: Vec<f64> = (0..n)
        .map(|a| (0..k).map(|j| x[j] * slopes[a * k + j]).sum())
        .collect();
    // ∇²G restricted to the support.
    let mut hess_g = vec![0.0; n * n];
    for a in 0..n {
        for c in 0..n {
            let mut h: f64 = (0..k).map(|j| x[j] * slopes[a * k + j] * slopes[c * k + j]).sum();
            if a == c {
                h += (0..k).map(|j| x[j] * curv[a * k + j]).sum::<f64>();
            }
            hess_g[a * n + c] = h - g[a] * g[c];
        }
    }
    let v: Vec<f64> = free.iter().map(|&i| y[i] / tau).collect();
    let grad_tau = lse - v.iter().zip(&g).map(|(vi, gi)| vi * gi).sum::<f64>();
    // τ stays put when it sits on a bound and the slope pushes outward.
    // τ comes back from `exp(ln τ)`, so the bounds are matched loosely.
    let at_min = tau <= TAU_MIN * (1.0 + 1e-9);
    let at_max = tau >= TAU_MAX * (1.0 - 1e-9);
    let tau_free = !((at_min && grad_tau > 0.0) || (at_max && grad_tau < 0.0));

    // KKT system: variables (dy on the support, [dτ], multiplier of Σ dy = 0).
    let dim = n + usize::from(tau_free);
    let size = dim + 1;
    let mut sys = vec![0.0; size * size];
    let mut rhs = vec![0.0; size];
    let hv: Vec<f64> = (0..n)
        .map(|a| (0..n).map(|c| hess_g[a * n + c] * v[c]).sum())
        .collect();
    for a in 0..n {
        for c in 0..n {
            sys[a * size + c] = hess_g[a * n + c] / tau;
        }
        rhs[a] = -g[a];
        sys[a * size + dim] = 1.0;
        sys[dim * size + a] = 1.0;
    }
    if tau_free {
        for a in 0..n {
            sys[a * size + n] = -hv[a] / tau;
            sys[n * size + a] = -hv[a] / tau;
        }
        sys[n * size + n] = v.iter().zip(&hv).map(|(vi, h)| vi * h).sum::<f64>() / tau;
        rhs[n] = -grad_tau;
    }
    let scale = (0..dim).map(|a| sys[a * size + a].abs()).fold(0.0, f64::max);
    if !(scale > 0.0 && scale.is_finite()) {
        return None;
    }
    for a in 0..dim {
        sys[a * size + a] += 1e-12 * scale;
    }
    let step = solve_linear(sys, rhs, 1e-14 * scale.max(1.0))?;
    let dy = &step[..n];
    let dtau = if tau_free { step[n] } else { 0.0 };
    let slope: f64 = g.iter().zip(dy).map(|(gi, d)| gi * d).sum::<f64>() + grad_tau * dtau;
    if !(slope < 0.0) {
        return None;
    }

    // Largest feasible step, remembering which coordinate blocks it.
    let mut alpha_max = f64::INFINITY;
    let mut blocking = None;
    for (a, d) in dy.iter().enumerate() {
        if *d < 0.0 {
            let r = y[free[a]] / -d;
            if r < alpha_max {
                alpha_max = r;
                blocking = Some(a);
            }
        }
    }
    let tau_room = if dtau < 0.0 {
        (tau - TAU_MIN).max(0.0) / -dtau
    } else if dtau > 0.0 {
        (TAU_MAX - tau).max(0.0) / dtau
    } else {
        f64::INFINITY
    };
    if tau_room < alpha_max {
        alpha_max = tau_room;
        blocking = None;
    }
    if !(alpha_max > 0.0) {
        return None;
    }
    let value = tau * lse;
    let mut alpha = alpha_max.min(1.0);
    let mut first = true;
    for _ in 0..MAX_BACKTRACKS {
        let mut cand = y.to_vec();
        for (a, &i) in free.iter().enumerate() {
            cand[i] = (y[i] + alpha * dy[a]).max(0.0);
        }
        if alpha == alpha_max {
            if let Some(a) = blocking {
                cand[free[a]] = 0.0;
            }
        }
        let total: f64 = cand.iter().sum();
        cand.iter_mut().for_each(|c| *c /= total);
        let cand_tau = (tau + alpha * dtau).clamp(TAU_MIN, TAU_MAX);
        let cand_value = evaluate(b, &cand, cand_tau).value;
        if cand_value <= value + 1e-4 * alpha * slope + 4.0 * f64::EPSILON * value.abs() {
            return (cand_value < value || cand != y).then_some((cand, cand_tau));
        }
        // Close to the optimum the predicted decrease drops below the rounding
        // of F and values stop ranking points; fall back on stationarity.
        if first && (cand_value - value).abs() <= 64.0 * f64::EPSILON * value.abs().max(1.0) {
            let (cg, ct, _, _) = evaluate_with_gradient(b, &cand, cand_tau);
            if stationarity(&cand, &cg, cand_tau, ct) < current {
                return Some((cand, cand_tau));
            }
        }
        first = false;
        alpha *= 0.5;
    }
    None
}

/// Minimizes `s ↦ F(y, e^s)` over `[ln τ_min, ln τ_max]` by bisection on the
/// sign of `∂F/∂τ`, which is monotone because `F` is convex in `τ`. Bisecting
/// the derivative resolves the minimizer to full precision, where comparing
/// function values would stall at the square root of machine epsilon.
fn line_search_tau(b: &BeliefState, y: &[f64], start: f64) -> f64 {
    let (smin, smax) = (TAU_MIN.ln(), TAU_MAX.ln());
    let slope = |s: f64| evaluate_with_gradient(b, y, s.exp()).1;
    let s0 = start.clamp(smin, smax);
    let g0 = slope(s0);
    if g0 == 0.0 {
        return s0;
    }
    // Walk downhill with doubling steps until the slope changes sign.
    let dir = if g0 > 0.0 { -1.0 } else { 1.0 };
    let (mut near, mut far);
    near = s0;
    let mut width = 0.5;
    loop {
        far = (near + dir * width).clamp(smin, smax);
        let g = slope(far);
        if g == 0.0 {
            return far;
        }
        if (g > 0.0) != (g0 > 0.0) {
            break;
        }
        if far == smin || far == smax {
            return far;
        }
        near = far;
        width *= 2.0;
    }
    // Invariant: slope(lo) < 0 < slope(hi).
    let (mut lo, mut hi) = if dir < 0.0 { (far, near) } else { (near, far) };
    while hi - lo > TAU_BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = slope(mid);
        if g > 0.0 {
            hi = mid;
        } else if g < 0.0 {
            lo = mid;
        } else {
            return mid;
        }
    }
    0.5 * (lo + hi)
}

/// `KL(c ‖ a)` for strictly positive `a`, written as
/// `Σ a ((1 + δ) ln(1 + δ) − δ)` with `δ = c/a − 1` so that nearby points do
/// not lose the result to cancellation.
fn kl_divergence_near(c: &[f64], a: &[f64]) -> f64 {
    c.iter()
        .zip(a)
        .map(|(&c, &a)| {
            let d = (c - a) / a;
            if d <= -1.0 {
                a
            } else {
                a * ((1.0 + d) * d.ln_1p() - d)
            }
        })
        .sum()
}

/// `max(‖y − P_Δ(y − ∇_y F)‖_∞, |τ − clamp(τ − ∂_τ F)|)`.
fn stationarity(y: &[f64], grad_y: &[f64], tau: f64, grad_tau: f64) -> f64 {
    let stepped: Vec<f64> = y.iter().zip(grad_y).map(|(a, g)| a - g).collect();
    let proj = project_simplex(&stepped);
    let y_part = y
        .iter()
        .zip(&proj)
        .fold(0.0, |acc, (a, p)| f64::max(acc, (a - p).abs()));
    let tau_part = (tau - (tau - grad_tau).clamp(TAU_MIN, TAU_MAX)).abs();
    y_part.max(tau_part)
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (idx, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - 1.0) / (idx + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}
