//! What an agent knows about the unknown payoff matrix.
//!
//! Every entry carries its observation count and empirical mean (the
//! frequentist statistics UCB uses) together with a posterior under an
//! independent prior and Gaussian observation noise of known variance. Priors
//! are Gaussian (conjugate) or finitely supported; a single-atom prior encodes
//! an entry that is known exactly.
//!
//! Matrices are laid out in the owning agent's frame: rows are the opponent's
//! actions, columns are the agent's own actions.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::PayoffMatrix;

/// Posterior variances never drop below this.
pub const VAR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntryPrior {
    Gaussian { mean: f64, var: f64 },
    /// Finite support `values` with prior masses `probs`.
    Discrete { values: Vec<f64>, probs: Vec<f64> },
}

impl EntryPrior {
    pub fn gaussian(mean: f64, var: f64) -> Self {
        EntryPrior::Gaussian { mean, var }
    }

    /// Point mass: the entry is known to equal `value`.
    pub fn known(value: f64) -> Self {
        EntryPrior::Discrete {
            values: vec![value],
            probs: vec![1.0],
        }
    }

    /// `value` and `-value` with probability one half each.
    pub fn symmetric_pair(value: f64) -> Self {
        EntryPrior::Discrete {
            values: vec![value, -value],
            probs: vec![0.5, 0.5],
        }
    }

    /// The same prior on the negated entry, for the opposite seat.
    pub fn negated(&self) -> Self {
        match self {
            EntryPrior::Gaussian { mean, var } => EntryPrior::Gaussian {
                mean: -mean,
                var: *var,
            },
            EntryPrior::Discrete { values, probs } => EntryPrior::Discrete {
                values: values.iter().map(|v| -v).collect(),
                probs: probs.clone(),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EntryPrior::Gaussian { mean, var } => {
                if !mean.is_finite() || !(var.is_finite() && *var > 0.0) {
                    return Err(Error::invalid(format!(
                        "Gaussian prior needs finite mean and positive variance, got N({mean}, {var})"
                    )));
                }
            }
            EntryPrior::Discrete { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::invalid("discrete prior needs matching non-empty values and probs"));
                }
                if values.iter().any(|v| !v.is_finite())
                    || probs.iter().any(|p| !(p.is_finite() && *p > 0.0))
                {
                    return Err(Error::invalid("discrete prior needs finite values and positive masses"));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(format!("discrete prior masses sum to {total}")));
                }
            }
        }
        Ok(())
    }
}

/// Per-entry knowledge state about the payoff matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    rows: usize,
    cols: usize,
    noise_var: f64,
    priors: Vec<EntryPrior>,
    counts: Vec<u64>,
    emp_mean: Vec<f64>,
    post_mean: Vec<f64>,
    post_var: Vec<f64>,
    /// Posterior atom masses for entries with a discrete prior.
    atom_probs: Vec<Option<Vec<f64>>>,
}

impl BeliefState {
    /// Same Gaussian prior `N(prior_mean, prior_var)` on every entry.
    pub fn gaussian(
        rows: usize,
        cols: usize,
        prior_mean: f64,
        prior_var: f64,
        noise_var: f64,
    ) -> Result<Self> {
        let prior = EntryPrior::gaussian(prior_mean, prior_var);
        BeliefState::with_priors(rows, cols, vec![prior; rows * cols], noise_var)
    }

    /// One prior per entry, row-major.
    pub fn with_priors(
        rows: usize,
        cols: usize,
        priors: Vec<EntryPrior>,
        noise_var: f64,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("belief over an empty matrix"));
        }
        if priors.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} priors for a {rows}x{cols} belief",
                priors.len()
            )));
        }
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(Error::invalid(format!("noise variance must be positive, got {noise_var}")));
        }
        for p in &priors {
            p.validate()?;
        }
        let n = rows * cols;
        let mut belief = BeliefState {
            rows,
            cols,
            noise_var,
            priors,
            counts: vec![0; n],
            emp_mean: vec![0.0; n],
            post_mean: vec![0.0; n],
            post_var: vec![0.0; n],
            atom_probs: vec![None; n],
        };
        for idx in 0..n {
            belief.refresh(idx);
        }
        Ok(belief)
    }

    /// A belief whose every entry has been observed `count` times with
    /// empirical mean equal to `a`, under an `N(0, 1)` prior and unit noise.
    pub fn pinned(a: &PayoffMatrix, count: u64) -> Self {
        let mut belief =
            BeliefState::gaussian(a.rows(), a.cols(), 0.0, 1.0, 1.0).expect("valid defaults");
        for idx in 0..a.entries().len() {
            belief.counts[idx] = count;
            belief.emp_mean[idx] = if count == 0 { 0.0 } else { a.entries()[idx] };
            belief.refresh(idx);
        }
        belief
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    pub fn emp_mean(&self, i: usize, j: usize) -> f64 {
        self.emp_mean[i * self.cols + j]
    }

    pub fn post_mean(&self, i: usize, j: usize) -> f64 {
        self.post_mean[i * self.cols + j]
    }

    pub fn post_var(&self, i: usize, j: usize) -> f64 {
        self.post_var[i * self.cols + j]
    }

    pub fn prior(&self, i: usize, j: usize) -> &EntryPrior {
        &self.priors[i * self.cols + j]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn post_means(&self) -> &[f64] {
        &self.post_mean
    }

    pub fn post_vars(&self) -> &[f64] {
        &self.post_var
    }

    /// Posterior mean as a matrix.
    pub fn mean_matrix(&self) -> PayoffMatrix {
        PayoffMatrix::new(self.rows, self.cols, self.post_mean.clone()).expect("finite means")
    }

    /// Records reward `r` for opponent action `i` and own action `j`.
    pub fn update(&mut self, i: usize, j: usize, r: f64) -> Result<()> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::invalid(format!(
                "observation ({i}, {j}) outside a {}x{} belief",
                self.rows, self.cols
            )));
        }
        if !r.is_finite() {
            return Err(Error::invalid(format!("non-finite reward {r}")));
        }
        let idx = i * self.cols + j;
        self.counts[idx] += 1;
        let n = self.counts[idx] as f64;
        self.emp_mean[idx] += (r - self.emp_mean[idx]) / n;
        self.refresh(idx);
        Ok(())
    }

    /// Value-style update: returns the updated belief.
    pub fn updated(&self, i: usize, j: usize, r: f64) -> Result<Self> {
        let mut next = self.clone();
        next.update(i, j, r)?;
        Ok(next)
    }

    fn refresh(&mut self, idx: usize) {
        let n = self.counts[idx] as f64;
        let mean_obs = self.emp_mean[idx];
        match &self.priors[idx] {
            EntryPrior::Gaussian { mean, var } => {
                let precision = 1.0 / var + n / self.noise_var;
                let post_var = (1.0 / precision).max(VAR_FLOOR);
                self.post_var[idx] = post_var;
                self.post_mean[idx] = post_var * (mean / var + n * mean_obs / self.noise_var);
            }
            EntryPrior::Discrete { values, probs } => {
                // Σ_s (r_s − a)² = const + n (r̄ − a)², so (n, r̄) is sufficient.
                let logw: Vec<f64> = values
                    .iter()
                    .zip(probs)
                    .map(|(a, p)| p.ln() - n * (mean_obs - a).powi(2) / (2.0 * self.noise_var))
                    .collect();
                let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
                let total: f64 = w.iter().sum();
                let w: Vec<f64> = w.into_iter().map(|x| x / total).collect();
                let mean: f64 = w.iter().zip(values).map(|(p, a)| p * a).sum();
                let var: f64 = w.iter().zip(values).map(|(p, a)| p * (a - mean).powi(2)).sum();
                self.post_mean[idx] = mean;
                self.post_var[idx] = var.max(VAR_FLOOR);
                self.atom_probs[idx] = Some(w);
            }
        }
    }

    /// Optimistic matrix `Ā_ij + sqrt(2 ln(1/δ) / (1 ∨ n_ij))`.
    pub fn ucb_matrix(&self, params: &UcbParams) -> PayoffMatrix {
        let entries = self
            .emp_mean
            .iter()
            .zip(&self.counts)
            .map(|(mean, &n)| mean + params.bonus(n))
            .collect();
        PayoffMatrix::new(self.rows, self.cols, entries).expect("finite UCB entries")
    }

    /// Draws one matrix from the posterior, entries independent, row-major.
    pub fn sample_matrix<R: Rng + ?Sized>(&self, rng: &mut R) -> PayoffMatrix {
        let entries = (0..self.rows * self.cols)
            .map(|idx| match (&self.priors[idx], &self.atom_probs[idx]) {
                (EntryPrior::Discrete { values, .. }, Some(w)) => {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    for (a, p) in values.iter().zip(w) {
                        acc += p;
                        if u < acc {
                            return *a;
                        }
                    }
                    *values.last().expect("non-empty support")
                }
                _ => {
                    let z: f64 = rng.sample(StandardNormal);
                    self.post_mean[idx] + self.post_var[idx].sqrt() * z
                }
            })
            .collect();
        PayoffMatrix::new(self.rows, self.cols, entries).expect("finite samples")
    }

    /// Second derivative of [`Self::entry_cgf`]: the variance of the entry
    /// under the posterior tilted by `exp(a v)`.
    pub(crate) fn entry_cgf_curvature(&self, idx: usize, v: f64) -> f64 {
        match &self.atom_probs[idx] {
            None => self.post_var[idx],
            Some(w) => {
                let EntryPrior::Discrete { values, .. } = &self.priors[idx] else {
                    unreachable!("atom masses only exist for discrete priors")
                };
                let logw: Vec<f64> = values.iter().zip(w).map(|(a, p)| p.ln() + a * v).collect();
                let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
                let z: f64 = e.iter().sum();
                let mean = values.iter().zip(&e).map(|(a, e)| a * e).sum::<f64>() / z;
                values.iter().zip(&e).map(|(a, e)| (a - mean).powi(2) * e).sum::<f64>() / z
            }
        }
    }

    /// Posterior cumulant generating function of one entry and its derivative.
    #[inline]
    pub(crate) fn entry_cgf(&self, idx: usize, v: f64) -> (f64, f64) {
        match &self.atom_probs[idx] {
            None => {
                let mean = self.post_mean[idx];
                let var = self.post_var[idx];
                (mean * v + 0.5 * var * v * v, mean + var * v)
            }
            Some(w) => {
                let EntryPrior::Discrete { values, .. } = &self.priors[idx] else {
                    unreachable!("atom masses only exist for discrete priors")
                };
                let top = values
                    .iter()
                    .zip(w)
                    .map(|(a, p)| p.ln() + a * v)
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut z = 0.0;
                let mut first = 0.0;
                for (a, p) in values.iter().zip(w) {
                    let e = (p.ln() + a * v - top).exp();
                    z += e;
                    first += a * e;
                }
                (top + z.ln(), first / z)
            }
        }
    }

    /// `K_j(v) = ln E exp(a_jᵀ v)` under the posterior, for column `j`.
    ///
    /// For Gaussian entries this is `Σ_i μ_ij v_i + ½ Σ_i σ²_ij v_i²`.
    pub fn cgf(&self, j: usize, v: &[f64]) -> Result<f64> {
        if j >= self.cols {
            return Err(Error::invalid(format!("column {j} outside {} columns", self.cols)));
        }
        if v.len() != self.rows {
            return Err(Error::invalid(format!(
                "CGF argument has length {}, expected {}",
                v.len(),
                self.rows
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite CGF argument"));
        }
        Ok((0..self.rows)
            .map(|i| self.entry_cgf(i * self.cols + j, v[i]).0)
            .sum())
    }
}

/// Confidence schedule for the optimistic matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcbParams {
    pub horizon: usize,
    pub delta: f64,
}

impl UcbParams {
    pub fn new(horizon: usize, delta: f64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::invalid("UCB horizon must be at least 1"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("UCB delta must lie in (0, 1), got {delta}")));
        }
        // The bonus at n = 0 has to cover entries in [0, 1].
        if 2.0 * (1.0 / delta).ln() < 1.0 {
            return Err(Error::invalid(format!(
                "UCB delta {delta} too large: need sqrt(2 ln(1/delta)) >= 1"
            )));
        }
        Ok(UcbParams { horizon, delta })
    }

    /// `δ = 1 / (2 T² m k)`.
    pub fn for_game(horizon: usize, rows: usize, cols: usize) -> Result<Self> {
        let t = horizon as f64;
        UcbParams::new(horizon, 1.0 / (2.0 * t * t * (rows * cols) as f64))
    }

    pub fn bonus(&self, count: u64) -> f64 {
        (2.0 * (1.0 / self.delta).ln() / count.max(1) as f64).sqrt()
    }
}

/// Per-arm statistics for learners that ignore the opponent's action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmStats {
    counts: Vec<u64>,
    means: Vec<f64>,
    prior_mean: f64,
    prior_var: f64,
    noise_var: f64,
}

impl ArmStats {
    pub fn new(arms: usize, prior_mean: f64, prior_var: f64, noise_var: f64) -> Result<Self> {
        if arms == 0 {
            return Err(Error::invalid("bandit with no arms"));
        }
        EntryPrior::gaussian(prior_mean, prior_var).validate()?;
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(Error::invalid(format!("noise variance must be positive, got {noise_var}")));
        }
        Ok(ArmStats {
            counts: vec![0; arms],
            means: vec![0.0; arms],
            prior_mean,
            prior_var,
            noise_var,
        })
    }

    /// Same prior, no observations.
    pub fn cleared(&self) -> Self {
        ArmStats {
            counts: vec![0; self.counts.len()],
            means: vec![0.0; self.means.len()],
            ..self.clone()
        }
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.means[arm]
    }

    pub fn update(&mut self, arm: usize, r: f64) -> Result<()> {
        if arm >= self.counts.len() {
            return Err(Error::invalid(format!("arm {arm} out of range")));
        }
        if !r.is_finite() {
            return Err(Error::invalid(format!("non-finite reward {r}")));
        }
        self.counts[arm] += 1;
        self.means[arm] += (r - self.means[arm]) / self.counts[arm] as f64;
        Ok(())
    }

    /// Conjugate Gaussian posterior `(mean, var)` of one arm.
    pub fn posterior(&self, arm: usize) -> (f64, f64) {
        let n = self.counts[arm] as f64;
        let var = (1.0 / (1.0 / self.prior_var + n / self.noise_var)).max(VAR_FLOOR);
        let mean = var * (self.prior_mean / self.prior_var + n * self.means[arm] / self.noise_var);
        (mean, var)
    }
}
