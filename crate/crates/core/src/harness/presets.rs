//! The standard experiments. Every preset uses T = 1000, N(0, 1) noise and
//! seeds 0..100; adjust the returned config to override.

use serde::{Deserialize, Serialize};

use super::config::{AgentSpec, GameSpec, PriorSpec, RunConfig, NATURE_PERIOD};
use crate::error::{Error, Result};

pub const HORIZON: usize = 1000;
pub const SEEDS: u64 = 100;
pub const ROBUST_MEAN: f64 = 0.5;
pub const ROBUST_VAR: f64 = 2.0;
pub const ROBUST_OUTCOMES: usize = 5;
pub const ROBUST_ARMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobustOpponent {
    Nature,
    BestResponse,
}

impl RobustOpponent {
    pub fn from_name(name: &str) -> Result<Self> {
        match name.replace('-', "_").as_str() {
            "nature" => Ok(RobustOpponent::Nature),
            "best_response" | "br" => Ok(RobustOpponent::BestResponse),
            _ => Err(Error::invalid(format!(
                "unknown robust-bandit opponent '{name}'; valid opponents: nature, best_response"
            ))),
        }
    }
}

fn base(name: &str, game: GameSpec, column: AgentSpec, row: AgentSpec, prior: PriorSpec) -> RunConfig {
    RunConfig {
        name: name.to_string(),
        game,
        column,
        row,
        prior,
        horizon: HORIZON,
        noise_var: 1.0,
        seeds: (0..SEEDS).collect(),
        output: None,
    }
}

const RPS_PRIOR: PriorSpec = PriorSpec::Gaussian { mean: 0.0, var: 1.0 };

pub fn rps_selfplay(alg: &str) -> Result<RunConfig> {
    let agent = AgentSpec::learner(alg)?;
    Ok(base("rps_selfplay", GameSpec::Rps, agent.clone(), agent, RPS_PRIOR))
}

pub fn rps_vs_best_response(alg: &str) -> Result<RunConfig> {
    let agent = AgentSpec::learner(alg)?;
    Ok(base("rps_br", GameSpec::Rps, agent, AgentSpec::BestResponse, RPS_PRIOR))
}

/// `maximizer` takes the column seat; regrets are reported from its side.
pub fn rps_head_to_head(maximizer: &str, minimizer: &str) -> Result<RunConfig> {
    Ok(base(
        "rps_h2h",
        GameSpec::Rps,
        AgentSpec::learner(maximizer)?,
        AgentSpec::learner(minimizer)?,
        RPS_PRIOR,
    ))
}

/// The learner faces a Nash opponent on `[[r, 0], [0, −1]]`, `r = ±1` per seed.
pub fn counterexample_2x2(alg: &str) -> Result<RunConfig> {
    Ok(base(
        "counterexample",
        GameSpec::Counterexample,
        AgentSpec::learner(alg)?,
        AgentSpec::Nash,
        PriorSpec::Counterexample,
    ))
}

pub fn robust_bandit(alg: &str, vs: RobustOpponent) -> Result<RunConfig> {
    let (name, row) = match vs {
        RobustOpponent::Nature => ("robust_nature", AgentSpec::Nature { period: NATURE_PERIOD }),
        RobustOpponent::BestResponse => ("robust_br", AgentSpec::BestResponse),
    };
    Ok(base(
        name,
        GameSpec::RobustBandit {
            mean: ROBUST_MEAN,
            var: ROBUST_VAR,
            rows: ROBUST_OUTCOMES,
            cols: ROBUST_ARMS,
        },
        AgentSpec::learner(alg)?,
        row,
        PriorSpec::Gaussian { mean: ROBUST_MEAN, var: ROBUST_VAR },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for alg in super::super::config::LEARNER_NAMES {
            rps_selfplay(alg).unwrap().validate().unwrap();
            rps_vs_best_response(alg).unwrap().validate().unwrap();
            counterexample_2x2(alg).unwrap().validate().unwrap();
            robust_bandit(alg, RobustOpponent::Nature).unwrap().validate().unwrap();
            robust_bandit(alg, RobustOpponent::BestResponse).unwrap().validate().unwrap();
        }
        rps_head_to_head("klearn", "exp3").unwrap().validate().unwrap();
    }

    #[test]
    fn unknown_algorithms_are_rejected() {
        assert!(matches!(rps_selfplay("q_learning"), Err(Error::InvalidInput(_))));
        assert!(rps_head_to_head("ucb", "best_response").is_err());
        assert!(RobustOpponent::from_name("adversary").is_err());
    }

    #[test]
    fn preset_shapes() {
        let c = robust_bandit("ts", RobustOpponent::Nature).unwrap();
        assert_eq!(c.game.dims(), (5, 10));
        assert_eq!(c.row, AgentSpec::Nature { period: 50 });
        assert_eq!((c.horizon, c.seeds.len()), (1000, 100));
        let h = rps_head_to_head("klearn", "exp3").unwrap();
        assert_eq!((h.column.label(), h.row.label()), ("klearn", "exp3"));
    }
}
