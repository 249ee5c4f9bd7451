use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_action, Agent};
use crate::belief::{BeliefState, UcbParams};
use crate::error::{Error, Result};
use crate::game::{solve_zero_sum, MixedStrategy};
use crate::klearn::{self, KLearnSolution, SolverOptions};

/// Duality-gap tolerance for the per-round game solves.
pub const GAME_SOLVE_TOL: f64 = 1e-7;

/// Column strategy of the game `Ã = Ā + bonus`.
pub fn ucb_agent_act(b: &BeliefState, p: &UcbParams) -> Result<MixedStrategy> {
    let optimistic = b.ucb_matrix(p);
    let tol = GAME_SOLVE_TOL * optimistic.max_abs().max(1.0);
    Ok(solve_zero_sum(&optimistic, tol)?.x_star)
}

/// Column strategy of one posterior sample.
pub fn ts_agent_act(b: &BeliefState, rng: &mut ChaCha8Rng) -> Result<MixedStrategy> {
    let sample = b.sample_matrix(rng);
    let tol = GAME_SOLVE_TOL * sample.max_abs().max(1.0);
    Ok(solve_zero_sum(&sample, tol)?.x_star)
}

pub fn klearn_agent_act(b: &BeliefState, tol: f64) -> Result<MixedStrategy> {
    Ok(klearn::solve(b, tol)?.x_star)
}

fn check_observation(b: &BeliefState, opp: usize, own: usize) -> Result<()> {
    check_action(opp, b.rows(), "opponent")?;
    check_action(own, b.cols(), "own")
}

#[derive(Debug, Clone)]
pub struct UcbAgent {
    prior: BeliefState,
    belief: BeliefState,
    params: UcbParams,
}

impl UcbAgent {
    pub fn new(belief: BeliefState, params: UcbParams) -> Self {
        UcbAgent {
            prior: belief.clone(),
            belief,
            params,
        }
    }

    pub fn belief(&self) -> &BeliefState {
        &self.belief
    }
}

impl Agent for UcbAgent {
    fn name(&self) -> &'static str {
        "ucb"
    }

    fn act(&mut self, _round: usize) -> Result<MixedStrategy> {
        ucb_agent_act(&self.belief, &self.params)
    }

    fn observe(&mut self, opp: usize, own: usize, reward: f64, _played: &MixedStrategy) -> Result<()> {
        check_observation(&self.belief, opp, own)?;
        self.belief.update(opp, own, reward)
    }

    fn reset(&mut self, _seed: u64) {
        self.belief = self.prior.clone();
    }
}

#[derive(Debug, Clone)]
pub struct TsAgent {
    prior: BeliefState,
    belief: BeliefState,
    rng: ChaCha8Rng,
}

impl TsAgent {
    pub fn new(belief: BeliefState, seed: u64) -> Self {
        TsAgent {
            prior: belief.clone(),
            belief,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn belief(&self) -> &BeliefState {
        &self.belief
    }
}

impl Agent for TsAgent {
    fn name(&self) -> &'static str {
        "ts"
    }

    fn act(&mut self, _round: usize) -> Result<MixedStrategy> {
        ts_agent_act(&self.belief, &mut self.rng)
    }

    fn observe(&mut self, opp: usize, own: usize, reward: f64, _played: &MixedStrategy) -> Result<()> {
        check_observation(&self.belief, opp, own)?;
        self.belief.update(opp, own, reward)
    }

    fn reset(&mut self, seed: u64) {
        self.belief = self.prior.clone();
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }
}

/// K-learning; each round's solve is warm-started from the previous optimum.
#[derive(Debug, Clone)]
pub struct KLearnAgent {
    prior: BeliefState,
    belief: BeliefState,
    opts: SolverOptions,
    last: Option<KLearnSolution>,
}

impl KLearnAgent {
    pub fn new(belief: BeliefState, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::invalid(format!("K-learning tolerance must be positive, got {tol}")));
        }
        Ok(KLearnAgent {
            prior: belief.clone(),
            belief,
            opts: SolverOptions::new(tol),
            last: None,
        })
    }

    pub fn belief(&self) -> &BeliefState {
        &self.belief
    }

    /// The most recent solve, if any.
    pub fn last_solution(&self) -> Option<&KLearnSolution> {
        self.last.as_ref()
    }
}

impl Agent for KLearnAgent {
    fn name(&self) -> &'static str {
        "klearn"
    }

    fn act(&mut self, _round: usize) -> Result<MixedStrategy> {
        let warm = self.last.as_ref().map(|s| (&s.y_star, s.tau_star));
        let sol = klearn::solve_with(&self.belief, self.opts, warm)?;
        let x = sol.x_star.clone();
        self.last = Some(sol);
        Ok(x)
    }

    fn observe(&mut self, opp: usize, own: usize, reward: f64, _played: &MixedStrategy) -> Result<()> {
        check_observation(&self.belief, opp, own)?;
        self.belief.update(opp, own, reward)
    }

    fn reset(&mut self, _seed: u64) {
        self.belief = self.prior.clone();
        self.last = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::EntryPrior;
    use crate::game::PayoffMatrix;

    #[test]
    fn ucb_on_fresh_belief_is_deterministic() {
        let b = BeliefState::gaussian(2, 2, 0.0, 1.0, 1.0).unwrap();
        let p = UcbParams::for_game(1000, 2, 2).unwrap();
        let bonus = (2.0 * (2.0 * 1e6 * 4.0f64).ln()).sqrt();
        let tilde = b.ucb_matrix(&p);
        assert!(tilde.entries().iter().all(|v| (v - bonus).abs() < 1e-12));
        let x1 = ucb_agent_act(&b, &p).unwrap();
        let x2 = ucb_agent_act(&b, &p).unwrap();
        assert_eq!(x1, x2);
    }

    #[test]
    fn ucb_pinned_rps_is_near_uniform() {
        let b = BeliefState::pinned(&PayoffMatrix::rock_paper_scissors(), 1_000_000_000_000);
        let p = UcbParams::for_game(1000, 3, 3).unwrap();
        let x = ucb_agent_act(&b, &p).unwrap();
        assert!(x.max_abs_diff(&MixedStrategy::uniform(3)) <= 0.02);
    }

    /// Column 1 is unexplored, column 0 is pinned at non-positive values: the
    /// optimistic matrix makes column 1 strictly dominant.
    #[test]
    fn ucb_explores_the_unobserved_column() {
        let mut b = BeliefState::gaussian(2, 2, 0.0, 1.0, 1.0).unwrap();
        for _ in 0..10_000 {
            b.update(0, 0, -0.5).unwrap();
            b.update(1, 0, 0.0).unwrap();
        }
        let p = UcbParams::for_game(1000, 2, 2).unwrap();
        assert!(p.bonus(0) >= 1.0);
        let tilde = b.ucb_matrix(&p);
        // Enumerate: column 1 beats column 0 in every row of Ã.
        for i in 0..2 {
            assert!(tilde.get(i, 1) > tilde.get(i, 0));
        }
        let x = ucb_agent_act(&b, &p).unwrap();
        assert_eq!(x.probs(), &[0.0, 1.0]);
    }

    fn counterexample_belief() -> BeliefState {
        BeliefState::with_priors(
            2,
            2,
            vec![
                EntryPrior::symmetric_pair(1.0),
                EntryPrior::known(0.0),
                EntryPrior::known(0.0),
                EntryPrior::known(-1.0),
            ],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn ts_on_the_counterexample_mixes_two_policies() {
        let b = counterexample_belief();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pure = 0;
        let n = 4000;
        for _ in 0..n {
            let x = ts_agent_act(&b, &mut rng).unwrap();
            if x.max_abs_diff(&MixedStrategy::pure(2, 0)) < 1e-9 {
                pure += 1;
            } else {
                assert!(x.max_abs_diff(&MixedStrategy::uniform(2)) < 1e-9, "{x:?}");
            }
        }
        let frac = pure as f64 / n as f64;
        // Binomial(4000, 1/2): four standard deviations is about 0.032.
        assert!((frac - 0.5).abs() < 0.032, "{frac}");
    }

    #[test]
    fn ts_with_zero_variance_solves_the_true_game() {
        let a = PayoffMatrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let priors = a.entries().iter().map(|&v| EntryPrior::known(v)).collect();
        let b = BeliefState::with_priors(2, 2, priors, 1.0).unwrap();
        let x = ts_agent_act(&b, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let truth = solve_zero_sum(&a, 1e-9).unwrap();
        assert!(x.max_abs_diff(&truth.x_star) < 1e-9);
    }

    #[test]
    fn ts_is_deterministic_for_a_fixed_stream() {
        let b = BeliefState::gaussian(3, 3, 0.0, 1.0, 1.0).unwrap();
        let mut a1 = TsAgent::new(b.clone(), 42);
        let mut a2 = TsAgent::new(b, 42);
        for t in 1..5 {
            assert_eq!(a1.act(t).unwrap(), a2.act(t).unwrap());
        }
    }

    #[test]
    fn klearn_plays_the_safe_column_on_the_counterexample() {
        let b = counterexample_belief();
        let x = klearn_agent_act(&b, 1e-7).unwrap();
        assert!(x.probs()[0] >= 0.99, "{x:?}");
    }

    #[test]
    fn klearn_single_column() {
        let b = BeliefState::gaussian(4, 1, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(klearn_agent_act(&b, 1e-7).unwrap().probs(), &[1.0]);
    }

    #[test]
    fn reset_restores_the_prior() {
        let b = BeliefState::gaussian(2, 2, 0.0, 1.0, 1.0).unwrap();
        let mut agent = KLearnAgent::new(b.clone(), 1e-7).unwrap();
        agent.act(1).unwrap();
        agent.observe(0, 1, 2.0, &MixedStrategy::uniform(2)).unwrap();
        assert_ne!(agent.belief(), &b);
        agent.reset(0);
        assert_eq!(agent.belief(), &b);
        assert!(agent.last_solution().is_none());
        assert!(agent.observe(2, 0, 0.0, &MixedStrategy::uniform(2)).is_err());
    }
}
