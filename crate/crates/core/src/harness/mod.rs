//! Repeated play between two seats, with regret and divergence accounting.
//!
//! Every seed owns independent random streams for the game draw, sampled
//! actions, reward noise and each seat, so episodes are reproducible from
//! `(config, seed)` alone and can run in parallel.

mod config;
mod episode;
mod io;
mod metrics;
pub mod presets;

pub use config::{
    AgentSpec, GameSpec, PriorSpec, RunConfig, DEFAULT_KLEARN_TOL, LEARNER_NAMES, NATURE_PERIOD, OPPONENT_NAMES,
};
pub use episode::{run_episode, run_experiment, EpisodeResult, StepRecord};
pub use io::{read_records, write_experiment, write_records, GroupSummary, SeedSummary, Summary, CSV_HEADER};
pub use metrics::{
    aggregate, hindsight_regret, negative_return_stats, selection_bound, tight_selection_bound, ucb_regret_bound,
    Aggregate, ReturnStats, SelectionCounter, Series,
};
