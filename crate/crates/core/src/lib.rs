//! Learning in repeated two-player zero-sum matrix games whose payoff matrix
//! is unknown and observed only through noisy bandit feedback.
//!
//! - [`game`]: exact solving of known games and strategy utilities.
//! - [`belief`]: per-entry statistics, posteriors and optimistic matrices.
//! - [`klearn`]: the convex program behind the K-learning policy.
//! - [`agents`]: UCB, Thompson sampling, K-learning, Exp3, naive bandit
//!   baselines and scripted opponents.
//! - [`harness`]: repeated play, regret accounting, experiment presets and
//!   CSV/JSON artifacts.
//! - [`validate`]: oracle and invariant checks shared by the CLI and tests.

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod belief;
pub mod error;
pub mod game;
pub mod harness;
pub mod klearn;
pub mod validate;

pub use error::{Error, Result};
pub use game::{GameSolution, MixedStrategy, PayoffMatrix};
