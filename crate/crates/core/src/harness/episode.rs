use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{rng_for, stream, RunConfig};
use crate::agents::{Seat, GAME_SOLVE_TOL};
use crate::error::{Error, Result};
use crate::game::{expected_payoff, kl_divergence, solve_zero_sum, GameSolution, MixedStrategy, PayoffMatrix};

/// One round of play, accounted against the true matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub seed: u64,
    pub t: usize,
    pub i: usize,
    pub j: usize,
    pub r: f64,
    pub x: MixedStrategy,
    pub y: MixedStrategy,
    pub expected_payoff: f64,
    pub v_star: f64,
    pub abs_regret_cum: f64,
    pub signed_regret_cum: f64,
    /// `KL(x ‖ x*)`; infinite when `x` leaves the Nash support.
    pub kl_x: f64,
    pub kl_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub seed: u64,
    pub matrix: PayoffMatrix,
    pub solution: GameSolution,
    pub column: String,
    pub row: String,
    pub records: Vec<StepRecord>,
}

impl EpisodeResult {
    pub fn final_record(&self) -> &StepRecord {
        self.records.last().expect("episodes have at least one round")
    }
}

/// Inverse-CDF draw that can only return actions with positive probability.
pub(crate) fn sample_action(s: &MixedStrategy, rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (idx, &p) in s.probs().iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = idx;
        if u < acc {
            return idx;
        }
    }
    last
}

fn reference_solution(a: &PayoffMatrix) -> Result<GameSolution> {
    solve_zero_sum(a, GAME_SOLVE_TOL * a.max_abs().max(1.0))
}

pub fn run_episode(cfg: &RunConfig, seed: u64) -> Result<EpisodeResult> {
    cfg.validate()?;
    let a = cfg.game.realize(&mut rng_for(seed, stream::GAME))?;
    let solution = reference_solution(&a)?;
    let mut column = cfg.player(Seat::Column, &a, seed)?;
    let mut row = cfg.player(Seat::Row, &a, seed)?;
    let mut actions = rng_for(seed, stream::ACTIONS);
    let mut noise = rng_for(seed, stream::NOISE);
    let sd = cfg.noise_var.sqrt();
    let v_star = solution.value;

    let mut records = Vec::with_capacity(cfg.horizon);
    let (mut abs_cum, mut signed_cum) = (0.0, 0.0);
    for t in 1..=cfg.horizon {
        let x = column.act(t, None).map_err(|e| e.at_round(t))?;
        let y = row.act(t, Some(&x)).map_err(|e| e.at_round(t))?;
        if x.len() != a.cols() || y.len() != a.rows() {
            return Err(Error::invalid(format!("strategy dimensions do not match the game at round {t}")));
        }
        let j = sample_action(&x, &mut actions);
        let i = sample_action(&y, &mut actions);
        let z: f64 = StandardNormal.sample(&mut noise);
        let r = a.get(i, j) + sd * z;
        column.observe(i, j, r, &x, &y).map_err(|e| e.at_round(t))?;
        row.observe(i, j, r, &x, &y).map_err(|e| e.at_round(t))?;

        let payoff = expected_payoff(&a, &x, &y)?;
        abs_cum += (v_star - payoff).abs();
        signed_cum += v_star - payoff;
        records.push(StepRecord {
            seed,
            t,
            i,
            j,
            r,
            kl_x: kl_divergence(&x, &solution.x_star)?,
            kl_y: kl_divergence(&y, &solution.y_star)?,
            x,
            y,
            expected_payoff: payoff,
            v_star,
            abs_regret_cum: abs_cum,
            signed_regret_cum: signed_cum,
        });
    }
    Ok(EpisodeResult {
        seed,
        matrix: a,
        solution,
        column: column.label(),
        row: row.label(),
        records,
    })
}

/// All seeds in parallel; results come back in seed order.
pub fn run_experiment(cfg: &RunConfig) -> Result<Vec<EpisodeResult>> {
    cfg.validate()?;
    cfg.seeds.par_iter().map(|&seed| run_episode(cfg, seed)).collect()
}
