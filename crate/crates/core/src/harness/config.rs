use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::agents::{
    Agent, BestResponseOpponent, Exp3Agent, FixedOpponent, KLearnAgent, NaiveTsAgent, NaiveUcbAgent,
    NashOpponent, NatureOpponent, Player, Seat, Seated, TsAgent, UcbAgent, GAME_SOLVE_TOL,
};
use crate::belief::{ArmStats, BeliefState, EntryPrior, UcbParams};
use crate::error::{Error, Result};
use crate::game::PayoffMatrix;

/// How the true matrix of each seed is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameSpec {
    Matrix { matrix: PayoffMatrix },
    /// Entries i.i.d. `N(mean, var)`, fresh per seed.
    Gaussian { mean: f64, var: f64, rows: usize, cols: usize },
    /// Entries i.i.d. uniform on `[low, high)`, fresh per seed.
    Uniform { low: f64, high: f64, rows: usize, cols: usize },
    Rps,
    /// `[[r, 0], [0, −1]]` with `r = ±1` equiprobably per seed.
    Counterexample,
    /// Gaussian entries, redrawn until every column has a negative entry, so
    /// that each pure strategy is exploitable.
    RobustBandit { mean: f64, var: f64, rows: usize, cols: usize },
}

const MAX_REJECTIONS: usize = 100_000;

fn gaussian_matrix(rng: &mut ChaCha8Rng, mean: f64, var: f64, rows: usize, cols: usize) -> Result<PayoffMatrix> {
    if !(var.is_finite() && var >= 0.0) {
        return Err(Error::invalid(format!("game variance must be non-negative, got {var}")));
    }
    let normal = Normal::new(mean, var.sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
    PayoffMatrix::new(rows, cols, (0..rows * cols).map(|_| normal.sample(rng)).collect())
}

impl GameSpec {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            GameSpec::Matrix { matrix } => (matrix.rows(), matrix.cols()),
            GameSpec::Gaussian { rows, cols, .. }
            | GameSpec::Uniform { rows, cols, .. }
            | GameSpec::RobustBandit { rows, cols, .. } => (*rows, *cols),
            GameSpec::Rps => (3, 3),
            GameSpec::Counterexample => (2, 2),
        }
    }

    /// The true matrix for one seed, drawn from the game stream.
    pub fn realize(&self, rng: &mut ChaCha8Rng) -> Result<PayoffMatrix> {
        match self {
            GameSpec::Matrix { matrix } => Ok(matrix.clone()),
            GameSpec::Gaussian { mean, var, rows, cols } => gaussian_matrix(rng, *mean, *var, *rows, *cols),
            GameSpec::Uniform { low, high, rows, cols } => {
                if !(low < high) {
                    return Err(Error::invalid(format!("empty range [{low}, {high})")));
                }
                let entries = (0..rows * cols).map(|_| rng.random_range(*low..*high)).collect();
                PayoffMatrix::new(*rows, *cols, entries)
            }
            GameSpec::Rps => Ok(PayoffMatrix::rock_paper_scissors()),
            GameSpec::Counterexample => {
                let r = if rng.random::<bool>() { 1.0 } else { -1.0 };
                PayoffMatrix::from_rows(&[vec![r, 0.0], vec![0.0, -1.0]])
            }
            GameSpec::RobustBandit { mean, var, rows, cols } => {
                for _ in 0..MAX_REJECTIONS {
                    let a = gaussian_matrix(rng, *mean, *var, *rows, *cols)?;
                    if (0..a.cols()).all(|j| (0..a.rows()).any(|i| a.get(i, j) < 0.0)) {
                        return Ok(a);
                    }
                }
                Err(Error::invalid("no robust-bandit game with an exploitable column in every draw"))
            }
        }
    }
}

/// What the learners believe before the first round, in game coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorSpec {
    /// Every entry `N(mean, var)`.
    Gaussian { mean: f64, var: f64 },
    /// `r` is ±1 equiprobably; the other three entries are known.
    Counterexample,
    /// One prior per entry, row-major.
    Entries { priors: Vec<EntryPrior> },
}

impl PriorSpec {
    fn entry_priors(&self, rows: usize, cols: usize) -> Result<Vec<EntryPrior>> {
        match self {
            PriorSpec::Gaussian { mean, var } => Ok(vec![EntryPrior::gaussian(*mean, *var); rows * cols]),
            PriorSpec::Counterexample => {
                if (rows, cols) != (2, 2) {
                    return Err(Error::invalid("the counter-example prior needs a 2×2 game"));
                }
                Ok(vec![
                    EntryPrior::symmetric_pair(1.0),
                    EntryPrior::known(0.0),
                    EntryPrior::known(0.0),
                    EntryPrior::known(-1.0),
                ])
            }
            PriorSpec::Entries { priors } => {
                if priors.len() != rows * cols {
                    return Err(Error::invalid(format!(
                        "{} entry priors for a {rows}×{cols} game",
                        priors.len()
                    )));
                }
                Ok(priors.clone())
            }
        }
    }

    /// Belief in the seat's own frame: the row seat sees `−Aᵀ`.
    pub fn belief(&self, rows: usize, cols: usize, noise_var: f64, seat: Seat) -> Result<BeliefState> {
        let priors = self.entry_priors(rows, cols)?;
        match seat {
            Seat::Column => BeliefState::with_priors(rows, cols, priors, noise_var),
            Seat::Row => {
                let mut mirrored = Vec::with_capacity(rows * cols);
                for j in 0..cols {
                    for i in 0..rows {
                        mirrored.push(priors[i * cols + j].negated());
                    }
                }
                BeliefState::with_priors(cols, rows, mirrored, noise_var)
            }
        }
    }

    /// Scalar Gaussian prior for the bandit baselines, which ignore the opponent.
    fn arm_prior(&self) -> (f64, f64) {
        match self {
            PriorSpec::Gaussian { mean, var } => (*mean, *var),
            _ => (0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentSpec {
    Ucb,
    Ts,
    Klearn { tol: f64 },
    Exp3,
    NaiveUcb,
    NaiveTs,
    Nash,
    Fixed { probs: Vec<f64> },
    Nature { period: usize },
    BestResponse,
}

pub const DEFAULT_KLEARN_TOL: f64 = 1e-6;
pub const NATURE_PERIOD: usize = 50;

pub const LEARNER_NAMES: [&str; 6] = ["ucb", "ts", "klearn", "exp3", "naive_ucb", "naive_ts"];
pub const OPPONENT_NAMES: [&str; 4] = ["nash", "nature", "best_response", "fixed"];

impl AgentSpec {
    /// Parses a learner or opponent name. `fixed` is uniform until its
    /// probabilities are set explicitly.
    pub fn from_name(name: &str) -> Result<Self> {
        let spec = match name.replace('-', "_").as_str() {
            "ucb" => AgentSpec::Ucb,
            "ts" => AgentSpec::Ts,
            "klearn" | "k_learning" => AgentSpec::Klearn { tol: DEFAULT_KLEARN_TOL },
            "exp3" => AgentSpec::Exp3,
            "naive_ucb" => AgentSpec::NaiveUcb,
            "naive_ts" => AgentSpec::NaiveTs,
            "nash" => AgentSpec::Nash,
            "nature" => AgentSpec::Nature { period: NATURE_PERIOD },
            "best_response" | "br" => AgentSpec::BestResponse,
            "fixed" => AgentSpec::Fixed { probs: Vec::new() },
            _ => {
                return Err(Error::invalid(format!(
                    "unknown agent '{name}'; valid learners: {}; valid opponents: {}",
                    LEARNER_NAMES.join(", "),
                    OPPONENT_NAMES.join(", ")
                )))
            }
        };
        Ok(spec)
    }

    /// Parses a learner name only.
    pub fn learner(name: &str) -> Result<Self> {
        let spec = Self::from_name(name)?;
        if !spec.is_learner() {
            return Err(Error::invalid(format!(
                "'{name}' is not a learner; valid learners: {}",
                LEARNER_NAMES.join(", ")
            )));
        }
        Ok(spec)
    }

    pub fn is_learner(&self) -> bool {
        !matches!(
            self,
            AgentSpec::Nash | AgentSpec::Fixed { .. } | AgentSpec::Nature { .. } | AgentSpec::BestResponse
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            AgentSpec::Ucb => "ucb",
            AgentSpec::Ts => "ts",
            AgentSpec::Klearn { .. } => "klearn",
            AgentSpec::Exp3 => "exp3",
            AgentSpec::NaiveUcb => "naive_ucb",
            AgentSpec::NaiveTs => "naive_ts",
            AgentSpec::Nash => "nash",
            AgentSpec::Fixed { .. } => "fixed",
            AgentSpec::Nature { .. } => "nature",
            AgentSpec::BestResponse => "best_response",
        }
    }

    fn validate(&self, seat: Seat) -> Result<()> {
        match self {
            AgentSpec::Klearn { tol } if !(*tol > 0.0) => {
                Err(Error::invalid(format!("K-learning tolerance must be positive, got {tol}")))
            }
            AgentSpec::Nature { period: 0 } => Err(Error::invalid("nature period must be positive")),
            AgentSpec::BestResponse if seat == Seat::Column => {
                Err(Error::invalid("best_response can only sit in the row seat"))
            }
            _ => Ok(()),
        }
    }
}

/// Everything needed to reproduce an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub name: String,
    pub game: GameSpec,
    pub column: AgentSpec,
    pub row: AgentSpec,
    pub prior: PriorSpec,
    pub horizon: usize,
    pub noise_var: f64,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
}

/// Independent random streams of one seed.
pub(crate) mod stream {
    pub const COLUMN: u64 = 1;
    pub const ROW: u64 = 2;
    pub const ACTIONS: u64 = 3;
    pub const NOISE: u64 = 4;
    pub const GAME: u64 = 5;
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("at least one seed is required"));
        }
        if !(self.noise_var.is_finite() && self.noise_var >= 0.0) {
            return Err(Error::invalid(format!("noise variance must be non-negative, got {}", self.noise_var)));
        }
        let (m, k) = self.game.dims();
        if m == 0 || k == 0 {
            return Err(Error::invalid("game needs at least one row and one column"));
        }
        self.column.validate(Seat::Column)?;
        self.row.validate(Seat::Row)?;
        for (spec, n) in [(&self.column, k), (&self.row, m)] {
            if let AgentSpec::Fixed { probs } = spec {
                if !probs.is_empty() && probs.len() != n {
                    return Err(Error::invalid(format!("fixed strategy has {} entries, seat has {n}", probs.len())));
                }
            }
        }
        Ok(())
    }

    /// Builds the player for one seat; `a` is the realized true matrix.
    pub(crate) fn player(&self, seat: Seat, a: &PayoffMatrix, seed: u64) -> Result<Box<dyn Player>> {
        let spec = match seat {
            Seat::Column => &self.column,
            Seat::Row => &self.row,
        };
        let (m, k) = (a.rows(), a.cols());
        // Own and opponent action counts in the seat's own frame.
        let (own, opp) = match seat {
            Seat::Column => (k, m),
            Seat::Row => (m, k),
        };
        let mut private = rng_for(seed, if seat == Seat::Column { stream::COLUMN } else { stream::ROW });
        let agent_seed: u64 = private.random();
        // Learners solve games with noise variance at least this large; a
        // noiseless run still needs a positive likelihood variance.
        let belief_noise = self.noise_var.max(1e-12);
        let agent: Box<dyn Agent> = match spec {
            AgentSpec::Ucb => Box::new(UcbAgent::new(
                self.prior.belief(m, k, belief_noise, seat)?,
                UcbParams::for_game(self.horizon, opp, own)?,
            )),
            AgentSpec::Ts => Box::new(TsAgent::new(self.prior.belief(m, k, belief_noise, seat)?, agent_seed)),
            AgentSpec::Klearn { tol } => {
                Box::new(KLearnAgent::new(self.prior.belief(m, k, belief_noise, seat)?, *tol)?)
            }
            AgentSpec::Exp3 => Box::new(Exp3Agent::new(own)?),
            AgentSpec::NaiveUcb | AgentSpec::NaiveTs => {
                let (mean, var) = self.prior.arm_prior();
                let (mean, var) = if seat == Seat::Row { (-mean, var) } else { (mean, var) };
                let stats = ArmStats::new(own, mean, var, belief_noise)?;
                if matches!(spec, AgentSpec::NaiveUcb) {
                    Box::new(NaiveUcbAgent::new(stats))
                } else {
                    Box::new(NaiveTsAgent::new(stats, agent_seed))
                }
            }
            AgentSpec::Nash => return Ok(Box::new(NashOpponent::new(a, GAME_SOLVE_TOL, seat)?)),
            AgentSpec::Fixed { probs } => {
                let probs = if probs.is_empty() { vec![1.0 / own as f64; own] } else { probs.clone() };
                return Ok(Box::new(FixedOpponent::new(probs)?));
            }
            AgentSpec::Nature { period } => return Ok(Box::new(NatureOpponent::new(own, *period, private)?)),
            AgentSpec::BestResponse => return Ok(Box::new(BestResponseOpponent::new(a.clone()))),
        };
        Ok(Box::new(Seated::new(agent, seat)))
    }
}
