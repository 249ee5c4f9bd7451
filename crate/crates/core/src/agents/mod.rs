//! Round-by-round decision makers.
//!
//! Learners implement [`Agent`] in their own frame: they always maximize, their
//! actions are the columns of the matrix they believe in and the opponent's
//! actions are its rows. [`Seated`] places a learner in either seat of the
//! real game; in the row seat it sees `−Aᵀ` and negated rewards, so one code
//! path serves both players. Scripted opponents implement [`Player`] directly.

mod exp3;
mod learners;
mod naive;
mod opponents;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::MixedStrategy;

pub use exp3::{exp3_agent_act, exp3_agent_observe, Exp3Agent, Exp3State};
pub use learners::{
    klearn_agent_act, ts_agent_act, ucb_agent_act, KLearnAgent, TsAgent, UcbAgent, GAME_SOLVE_TOL,
};
pub use naive::{naive_ts_act, naive_ucb_act, NaiveTsAgent, NaiveUcbAgent};
pub use opponents::{
    best_response_opponent_act, BestResponseOpponent, FixedOpponent, NashOpponent, NatureOpponent,
};

/// A learner in its own (maximizing, column) frame.
pub trait Agent: Send {
    fn name(&self) -> &'static str;

    /// Mixed strategy over own actions for round `round` (1-based).
    fn act(&mut self, round: usize) -> Result<MixedStrategy>;

    /// Feedback after a round: the opponent played `opp`, we played `own`
    /// sampled from `played`, and we received `reward`.
    fn observe(&mut self, opp: usize, own: usize, reward: f64, played: &MixedStrategy) -> Result<()>;

    /// Back to the prior, with a fresh private random stream.
    fn reset(&mut self, seed: u64);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Seat {
    /// Maximizer; picks `j` and receives `A_ij`.
    Column,
    /// Minimizer; picks `i` and pays `A_ij`.
    Row,
}

/// Anything that can occupy a seat in the repeated game.
pub trait Player: Send {
    fn label(&self) -> String;

    /// `announced` is the column player's strategy for this round when this
    /// player sits in the row seat.
    fn act(&mut self, round: usize, announced: Option<&MixedStrategy>) -> Result<MixedStrategy>;

    /// Full round outcome in game coordinates.
    fn observe(
        &mut self,
        i: usize,
        j: usize,
        reward: f64,
        x: &MixedStrategy,
        y: &MixedStrategy,
    ) -> Result<()>;
}

/// A learner placed in one seat of the real game.
pub struct Seated {
    agent: Box<dyn Agent>,
    seat: Seat,
}

impl Seated {
    pub fn new(agent: Box<dyn Agent>, seat: Seat) -> Self {
        Seated { agent, seat }
    }

    pub fn seat(&self) -> Seat {
        self.seat
    }

    pub fn agent(&self) -> &dyn Agent {
        self.agent.as_ref()
    }
}

impl Player for Seated {
    fn label(&self) -> String {
        self.agent.name().to_string()
    }

    fn act(&mut self, round: usize, _announced: Option<&MixedStrategy>) -> Result<MixedStrategy> {
        self.agent.act(round)
    }

    fn observe(
        &mut self,
        i: usize,
        j: usize,
        reward: f64,
        x: &MixedStrategy,
        y: &MixedStrategy,
    ) -> Result<()> {
        match self.seat {
            Seat::Column => self.agent.observe(i, j, reward, x),
            Seat::Row => self.agent.observe(j, i, -reward, y),
        }
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (idx, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = idx;
        }
    }
    best
}

pub(crate) fn check_action(action: usize, n: usize, who: &str) -> Result<()> {
    if action >= n {
        return Err(Error::invalid(format!(
            "{who} action {action} out of range for {n} actions"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::BeliefState;
    use crate::game::PayoffMatrix;

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    /// Seated as row on `A` must behave exactly like seated as column on `−Aᵀ`.
    #[test]
    fn role_adapter_mirrors_the_transposed_game() {
        let a = PayoffMatrix::from_rows(&[vec![0.3, -1.2, 0.8], vec![1.1, 0.0, -0.4]]).unwrap();
        let mirror = a.negated_transpose();
        let (m, k) = (a.rows(), a.cols());

        let make = |rows, cols| -> Box<dyn Agent> {
            Box::new(TsAgent::new(BeliefState::gaussian(rows, cols, 0.0, 1.0, 1.0).unwrap(), 9))
        };
        // Row seat on A: own frame has k opponent actions and m own actions.
        let mut as_row = Seated::new(make(k, m), Seat::Row);
        let mut as_col = Seated::new(make(mirror.rows(), mirror.cols()), Seat::Column);

        let other_x = MixedStrategy::uniform(k);
        let other_y = MixedStrategy::uniform(mirror.rows());
        let schedule = [(0, 1, 0.4), (1, 2, -0.9), (1, 0, 2.0), (0, 0, 0.1)];
        for (round, &(i, j, noise)) in schedule.iter().enumerate() {
            let y_row = as_row.act(round + 1, None).unwrap();
            let x_col = as_col.act(round + 1, None).unwrap();
            assert_eq!(y_row, x_col);
            let r = a.get(i, j) + noise;
            as_row.observe(i, j, r, &other_x, &y_row).unwrap();
            // The same round on −Aᵀ: row j, column i, reward −r.
            as_col.observe(j, i, -r, &x_col, &other_y).unwrap();
        }
    }
}
