//! Exp3 with importance-weighted reward estimates and the schedules
//! `γ_t = min(sqrt(k ln k / t), 1)`, `ρ_t = sqrt(2 ln k / (t k))`.
//! Rewards are used raw, without rescaling.

use serde::{Deserialize, Serialize};

use super::{check_action, Agent};
use crate::error::{Error, Result};
use crate::game::MixedStrategy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp3State {
    /// `Σ_s r̂_si` per own action.
    pub cum_est: Vec<f64>,
    /// Current round, starting at 1.
    pub round: usize,
}

impl Exp3State {
    pub fn new(actions: usize) -> Result<Self> {
        if actions == 0 {
            return Err(Error::invalid("Exp3 needs at least one action"));
        }
        Ok(Exp3State {
            cum_est: vec![0.0; actions],
            round: 1,
        })
    }

    pub fn gamma(&self) -> f64 {
        let k = self.cum_est.len() as f64;
        (k * k.ln() / self.round as f64).sqrt().min(1.0)
    }

    pub fn rho(&self) -> f64 {
        let k = self.cum_est.len() as f64;
        (2.0 * k.ln() / (self.round as f64 * k)).sqrt()
    }
}

pub fn exp3_agent_act(s: &Exp3State) -> Result<MixedStrategy> {
    if s.round == 0 {
        return Err(Error::invalid("Exp3 rounds start at 1"));
    }
    let k = s.cum_est.len();
    let gamma = s.gamma();
    let rho = s.rho();
    let top = s.cum_est.iter().map(|c| rho * c).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = s.cum_est.iter().map(|c| (rho * c - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let probs = w
        .iter()
        .map(|wi| gamma / k as f64 + (1.0 - gamma) * wi / total)
        .collect();
    MixedStrategy::from_weights(probs)
}

pub fn exp3_agent_observe(
    s: &Exp3State,
    action: usize,
    reward: f64,
    played: &MixedStrategy,
) -> Result<Exp3State> {
    check_action(action, s.cum_est.len(), "Exp3")?;
    if played.len() != s.cum_est.len() {
        return Err(Error::invalid("played strategy has the wrong length"));
    }
    if !reward.is_finite() {
        return Err(Error::invalid(format!("non-finite reward {reward}")));
    }
    let p = played.probs()[action];
    if !(p > 0.0) {
        return Err(Error::invalid(format!(
            "action {action} was realized with recorded probability {p}"
        )));
    }
    let mut next = s.clone();
    next.cum_est[action] += reward / p;
    next.round += 1;
    Ok(next)
}

#[derive(Debug, Clone)]
pub struct Exp3Agent {
    state: Exp3State,
}

impl Exp3Agent {
    pub fn new(actions: usize) -> Result<Self> {
        Ok(Exp3Agent {
            state: Exp3State::new(actions)?,
        })
    }

    pub fn state(&self) -> &Exp3State {
        &self.state
    }
}

impl Agent for Exp3Agent {
    fn name(&self) -> &'static str {
        "exp3"
    }

    fn act(&mut self, _round: usize) -> Result<MixedStrategy> {
        exp3_agent_act(&self.state)
    }

    fn observe(&mut self, _opp: usize, own: usize, reward: f64, played: &MixedStrategy) -> Result<()> {
        self.state = exp3_agent_observe(&self.state, own, reward, played)?;
        Ok(())
    }

    fn reset(&mut self, _seed: u64) {
        self.state = Exp3State::new(self.state.cum_est.len()).expect("non-empty");
    }
}
