//! Bandit baselines that ignore the opponent's action entirely.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{argmax, check_action, Agent};
use crate::belief::ArmStats;
use crate::error::Result;
use crate::game::MixedStrategy;

/// Point mass on `argmax_j mean_j + sqrt(2 ln t / (1 ∨ n_j))`.
pub fn naive_ucb_act(stats: &ArmStats, round: usize) -> MixedStrategy {
    let log_t = (round.max(1) as f64).ln();
    let index: Vec<f64> = (0..stats.arms())
        .map(|j| stats.mean(j) + (2.0 * log_t / stats.count(j).max(1) as f64).sqrt())
        .collect();
    MixedStrategy::pure(stats.arms(), argmax(&index))
}

/// Point mass on the best arm of one posterior draw.
pub fn naive_ts_act(stats: &ArmStats, rng: &mut ChaCha8Rng) -> MixedStrategy {
    let draws: Vec<f64> = (0..stats.arms())
        .map(|j| {
            let (mean, var) = stats.posterior(j);
            let z: f64 = StandardNormal.sample(rng);
            mean + var.sqrt() * z
        })
        .collect();
    MixedStrategy::pure(stats.arms(), argmax(&draws))
}

#[derive(Debug, Clone)]
pub struct NaiveUcbAgent {
    stats: ArmStats,
}

impl NaiveUcbAgent {
    /// The prior only matters through the arm count; UCB uses empirical means.
    pub fn new(stats: ArmStats) -> Self {
        NaiveUcbAgent { stats }
    }
}

impl Agent for NaiveUcbAgent {
    fn name(&self) -> &'static str {
        "naive_ucb"
    }

    fn act(&mut self, round: usize) -> Result<MixedStrategy> {
        Ok(naive_ucb_act(&self.stats, round))
    }

    fn observe(&mut self, _opp: usize, own: usize, reward: f64, _played: &MixedStrategy) -> Result<()> {
        check_action(own, self.stats.arms(), "own")?;
        self.stats.update(own, reward)
    }

    fn reset(&mut self, _seed: u64) {
        self.stats = self.stats.cleared();
    }
}

#[derive(Debug, Clone)]
pub struct NaiveTsAgent {
    stats: ArmStats,
    rng: ChaCha8Rng,
}

impl NaiveTsAgent {
    pub fn new(stats: ArmStats, seed: u64) -> Self {
        NaiveTsAgent {
            stats,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Agent for NaiveTsAgent {
    fn name(&self) -> &'static str {
        "naive_ts"
    }

    fn act(&mut self, _round: usize) -> Result<MixedStrategy> {
        Ok(naive_ts_act(&self.stats, &mut self.rng))
    }

    fn observe(&mut self, _opp: usize, own: usize, reward: f64, _played: &MixedStrategy) -> Result<()> {
        check_action(own, self.stats.arms(), "own")?;
        self.stats.update(own, reward)
    }

    fn reset(&mut self, seed: u64) {
        self.stats = self.stats.cleared();
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }
}
