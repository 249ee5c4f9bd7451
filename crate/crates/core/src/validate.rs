//! Oracle and invariant checks that are cheap enough to run on demand.
//! Each check reports how many instances passed and its worst-case margin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::Serialize;

use crate::belief::{BeliefState, EntryPrior};
use crate::error::Result;
use crate::game::{brute_force_solution, solve_zero_sum, MixedStrategy, PayoffMatrix};
use crate::harness::{selection_bound, tight_selection_bound, SelectionCounter};
use crate::klearn;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    /// Worst observed value of the checked quantity, for the log.
    pub worst: f64,
    pub note: String,
}

impl Check {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: {}/{} (worst {:.3e}){}",
            if self.ok() { "PASS" } else { "FAIL" },
            self.name,
            self.passed,
            self.total,
            self.worst,
            if self.note.is_empty() { String::new() } else { format!("; {}", self.note) }
        )
    }
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, low: f64, high: f64) -> PayoffMatrix {
    let entries = (0..rows * cols).map(|_| rng.random_range(low..high)).collect();
    PayoffMatrix::new(rows, cols, entries).expect("finite entries")
}

pub fn random_simplex(rng: &mut impl Rng, n: usize) -> MixedStrategy {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    MixedStrategy::from_weights(w).expect("positive weights")
}

/// Mixed Gaussian/discrete priors with a few noisy observations folded in.
pub fn random_belief(rng: &mut impl Rng, max_dim: usize) -> BeliefState {
    let m = rng.random_range(1..=max_dim);
    let k = rng.random_range(1..=max_dim);
    let priors = (0..m * k)
        .map(|_| match rng.random_range(0..3) {
            0 => EntryPrior::gaussian(rng.random_range(-1.0..1.0), rng.random_range(0.05..2.0)),
            1 => {
                let n = rng.random_range(1..=3);
                let values = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
                let probs = random_simplex(rng, n).probs().to_vec();
                EntryPrior::Discrete { values, probs }
            }
            _ => EntryPrior::gaussian(rng.random_range(-1.0..1.0), 1.0),
        })
        .collect();
    let mut b = BeliefState::with_priors(m, k, priors, rng.random_range(0.5..2.0)).expect("valid priors");
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    for _ in 0..rng.random_range(0..20) {
        let (i, j) = (rng.random_range(0..m), rng.random_range(0..k));
        let r = rng.random_range(-1.0..1.0) + noise.sample(rng);
        b.update(i, j, r).expect("finite reward");
    }
    b
}

/// Simplex solver against support enumeration, with both saddle certificates.
pub fn solver_vs_brute_force(instances: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut passed, mut worst) = (0, 0.0f64);
    for _ in 0..instances {
        let (m, k) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let a = random_matrix(&mut rng, m, k, -1.0, 1.0);
        let lp = solve_zero_sum(&a, 1e-9)?;
        let oracle = brute_force_solution(&a)?;
        let value_err = (lp.value - oracle.value).abs();
        let cert = [
            oracle.value - lp.column_guarantee(&a),
            lp.row_guarantee(&a) - oracle.value,
            oracle.value - oracle.column_guarantee(&a),
            oracle.row_guarantee(&a) - oracle.value,
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        worst = worst.max(value_err).max(cert);
        if value_err <= 1e-6 && cert <= 2e-6 {
            passed += 1;
        }
    }
    Ok(Check {
        name: "game solver vs support enumeration",
        passed,
        total: instances,
        worst,
        note: "value within 1e-6, certificates within 2e-6".into(),
    })
}

fn random_point(rng: &mut impl Rng, m: usize) -> (Vec<f64>, f64) {
    let y = random_simplex(rng, m).probs().to_vec();
    let tau = 10f64.powf(rng.random_range(-1.3..0.7));
    (y, tau)
}

/// Central differences against the analytic gradient, coordinate by coordinate.
pub fn gradient_check(beliefs: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut passed, mut worst) = (0, 0.0f64);
    for _ in 0..beliefs {
        let b = random_belief(&mut rng, 4);
        let (y, tau) = random_point(&mut rng, b.rows());
        let (gy, gt) = klearn::gradient(&b, &y, tau)?;
        let mut rel = 0.0f64;
        let compare = |analytic: f64, numeric: f64| {
            (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
        };
        for i in 0..y.len() {
            let h = 1e-5;
            let (mut up, mut down) = (y.clone(), y.clone());
            up[i] += h;
            down[i] -= h;
            let fd = (klearn::objective_at(&b, &up, tau)? - klearn::objective_at(&b, &down, tau)?) / (2.0 * h);
            rel = rel.max(compare(gy[i], fd));
        }
        let h = 1e-5 * tau;
        let fd = (klearn::objective_at(&b, &y, tau + h)? - klearn::objective_at(&b, &y, tau - h)?) / (2.0 * h);
        rel = rel.max(compare(gt, fd));
        worst = worst.max(rel);
        if rel <= 1e-4 {
            passed += 1;
        }
    }
    Ok(Check {
        name: "objective gradient vs finite differences",
        passed,
        total: beliefs,
        worst,
        note: "relative error within 1e-4".into(),
    })
}

/// Midpoint convexity of `(y, τ) ↦ F` on random pairs sharing a belief.
pub fn convexity_check(pairs: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut passed, mut worst) = (0, f64::NEG_INFINITY);
    for _ in 0..pairs {
        let b = random_belief(&mut rng, 4);
        let (y1, t1) = random_point(&mut rng, b.rows());
        let (y2, t2) = random_point(&mut rng, b.rows());
        let ym: Vec<f64> = y1.iter().zip(&y2).map(|(a, c)| 0.5 * (a + c)).collect();
        let f1 = klearn::objective_at(&b, &y1, t1)?;
        let f2 = klearn::objective_at(&b, &y2, t2)?;
        let fm = klearn::objective_at(&b, &ym, 0.5 * (t1 + t2))?;
        let excess = fm - 0.5 * (f1 + f2);
        worst = worst.max(excess);
        if excess <= 1e-10 * (1.0 + f1.abs() + f2.abs()) {
            passed += 1;
        }
    }
    Ok(Check {
        name: "objective midpoint convexity",
        passed,
        total: pairs,
        worst,
        note: "F(mid) − mean(F) ≤ 0 up to rounding".into(),
    })
}

/// `F(y, τ) ≥ max_j μ_jᵀ y`: the objective never undercuts the posterior-mean game.
pub fn optimism_check(points: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut passed, mut worst) = (0, f64::NEG_INFINITY);
    for _ in 0..points {
        let b = random_belief(&mut rng, 4);
        let (y, tau) = random_point(&mut rng, b.rows());
        let means = b.mean_matrix().apply_transpose(&y);
        let best = means.into_iter().fold(f64::NEG_INFINITY, f64::max);
        let shortfall = best - klearn::objective_at(&b, &y, tau)?;
        worst = worst.max(shortfall);
        if shortfall <= 1e-12 * (1.0 + best.abs()) {
            passed += 1;
        }
    }
    Ok(Check {
        name: "objective dominates the posterior-mean game",
        passed,
        total: points,
        worst,
        note: String::new(),
    })
}

/// Outcome of the selection-count experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingReport {
    pub check: Check,
    /// Largest mean weighted sum over `q(1 + ln T)`, across processes.
    pub max_ratio_tight: f64,
    /// Single paths whose weighted sum exceeded `q(2 + ln T)`, out of all paths.
    pub path_exceedances: (usize, usize),
    /// `(total, q(1 + ln T))` for one index and two rounds.
    pub two_round_case: (f64, f64),
}

/// Independent paths per random process.
pub const COUNTING_REPLICATES: usize = 16;

/// Random selection processes. Each process fixes `q`, `T` and a rule for the
/// per-round distribution: a fresh random point of the simplex, a point mass
/// on the least-selected index, or one fixed distribution. A process passes
/// when every path keeps its selected-index sum within `q(2 + ln T)` and the
/// weighted sum, averaged over paths, stays within it too. Single paths of the
/// weighted sum are not bounded (an index that keeps positive probability but
/// is never drawn adds to it every round); they are only counted.
pub fn counting_check(processes: usize, seed: u64) -> Result<CountingReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut passed, mut worst, mut max_tight) = (0, 0.0f64, 0.0f64);
    let (mut path_over, mut paths) = (0, 0);
    for _ in 0..processes {
        let q = rng.random_range(1..=10);
        let horizon = rng.random_range(1..=1000);
        let style = rng.random_range(0..3);
        let fixed = random_simplex(&mut rng, q);
        let bound = selection_bound(q, horizon);
        let mut ok = true;
        let mut weighted = 0.0;
        for _ in 0..COUNTING_REPLICATES {
            let mut counter = SelectionCounter::new(q);
            for _ in 0..horizon {
                let p = match style {
                    0 => random_simplex(&mut rng, q),
                    1 => {
                        let least = (0..q).min_by_key(|&i| counter.counts()[i]).expect("q ≥ 1");
                        MixedStrategy::pure(q, least)
                    }
                    _ => fixed.clone(),
                };
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = q - 1;
                for (i, pi) in p.probs().iter().enumerate() {
                    acc += pi;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                counter.step(p.probs(), pick);
            }
            ok &= counter.selected_total() <= bound;
            worst = worst.max(counter.selected_total() / bound);
            path_over += usize::from(counter.total() > bound);
            paths += 1;
            weighted += counter.total() / COUNTING_REPLICATES as f64;
        }
        ok &= weighted <= bound;
        worst = worst.max(weighted / bound);
        max_tight = max_tight.max(weighted / tight_selection_bound(q, horizon));
        if ok {
            passed += 1;
        }
    }
    let mut two = SelectionCounter::new(1);
    two.step(&[1.0], 0);
    two.step(&[1.0], 0);
    Ok(CountingReport {
        check: Check {
            name: "selection counting bound q(2 + ln T)",
            passed,
            total: processes,
            worst,
            note: format!(
                "max mean ratio against q(1 + ln T): {max_tight:.4}; single weighted paths above q(2 + ln T): {path_over}/{paths}"
            ),
        },
        max_ratio_tight: max_tight,
        path_exceedances: (path_over, paths),
        two_round_case: (two.total(), tight_selection_bound(1, 2)),
    })
}

/// Every check at its standard size.
pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    let counting = counting_check(1000, seed.wrapping_add(4))?;
    let (total, tight) = counting.two_round_case;
    let two_round = Check {
        name: "q(1 + ln T) is exceeded at q = 1, T = 2",
        passed: usize::from(total > tight),
        total: 1,
        worst: total - tight,
        note: format!("{total} vs {tight:.4}"),
    };
    Ok(vec![
        solver_vs_brute_force(200, seed)?,
        gradient_check(100, seed.wrapping_add(1))?,
        convexity_check(1000, seed.wrapping_add(2))?,
        optimism_check(1000, seed.wrapping_add(3))?,
        counting.check,
        two_round,
    ])
}
