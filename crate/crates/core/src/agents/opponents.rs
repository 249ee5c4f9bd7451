//! Scripted players. They know the true matrix where needed and never learn.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use super::{Player, Seat};
use crate::error::{Error, Result};
use crate::game::{best_response_row, solve_zero_sum, MixedStrategy, PayoffMatrix};

/// Point mass on the row that minimizes `(A x)_i`.
pub fn best_response_opponent_act(a: &PayoffMatrix, x: &MixedStrategy) -> Result<MixedStrategy> {
    let (row, _) = best_response_row(a, x)?;
    Ok(MixedStrategy::pure(a.rows(), row))
}

/// Plays its seat's Nash strategy of the true game every round.
#[derive(Debug, Clone)]
pub struct NashOpponent {
    y: MixedStrategy,
}

impl NashOpponent {
    pub fn new(a: &PayoffMatrix, tol: f64, seat: Seat) -> Result<Self> {
        let sol = solve_zero_sum(a, tol)?;
        Ok(NashOpponent {
            y: match seat {
                Seat::Column => sol.x_star,
                Seat::Row => sol.y_star,
            },
        })
    }

    pub fn strategy(&self) -> &MixedStrategy {
        &self.y
    }
}

impl Player for NashOpponent {
    fn label(&self) -> String {
        "nash".into()
    }

    fn act(&mut self, _round: usize, _announced: Option<&MixedStrategy>) -> Result<MixedStrategy> {
        Ok(self.y.clone())
    }

    fn observe(&mut self, _: usize, _: usize, _: f64, _: &MixedStrategy, _: &MixedStrategy) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FixedOpponent {
    y: MixedStrategy,
}

impl FixedOpponent {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Ok(FixedOpponent {
            y: MixedStrategy::new(probs)?,
        })
    }
}

impl Player for FixedOpponent {
    fn label(&self) -> String {
        "fixed".into()
    }

    fn act(&mut self, _round: usize, _announced: Option<&MixedStrategy>) -> Result<MixedStrategy> {
        Ok(self.y.clone())
    }

    fn observe(&mut self, _: usize, _: usize, _: f64, _: &MixedStrategy, _: &MixedStrategy) -> Result<()> {
        Ok(())
    }
}

/// Uniform random simplex point over `actions`, redrawn at rounds 1, 1 + period, 1 + 2·period, …
#[derive(Debug, Clone)]
pub struct NatureOpponent {
    actions: usize,
    period: usize,
    rng: ChaCha8Rng,
    current: Option<MixedStrategy>,
}

impl NatureOpponent {
    pub fn new(actions: usize, period: usize, rng: ChaCha8Rng) -> Result<Self> {
        if actions == 0 || period == 0 {
            return Err(Error::invalid("nature needs at least one action and a positive period"));
        }
        Ok(NatureOpponent {
            actions,
            period,
            rng,
            current: None,
        })
    }

    /// Symmetric Dirichlet(1): normalized unit exponentials.
    fn draw(&mut self) -> Result<MixedStrategy> {
        let w: Vec<f64> = (0..self.actions).map(|_| Exp1.sample(&mut self.rng)).collect();
        MixedStrategy::from_weights(w)
    }
}

impl Player for NatureOpponent {
    fn label(&self) -> String {
        "nature".into()
    }

    fn act(&mut self, round: usize, _announced: Option<&MixedStrategy>) -> Result<MixedStrategy> {
        if round == 0 {
            return Err(Error::invalid("rounds start at 1"));
        }
        if self.current.is_none() || (round - 1).is_multiple_of(self.period) {
            self.current = Some(self.draw()?);
        }
        Ok(self.current.clone().expect("drawn above"))
    }

    fn observe(&mut self, _: usize, _: usize, _: f64, _: &MixedStrategy, _: &MixedStrategy) -> Result<()> {
        Ok(())
    }
}

/// Knows the true matrix and the column player's announced strategy.
#[derive(Debug, Clone)]
pub struct BestResponseOpponent {
    a: PayoffMatrix,
}

impl BestResponseOpponent {
    pub fn new(a: PayoffMatrix) -> Self {
        BestResponseOpponent { a }
    }
}

impl Player for BestResponseOpponent {
    fn label(&self) -> String {
        "best_response".into()
    }

    fn act(&mut self, _round: usize, announced: Option<&MixedStrategy>) -> Result<MixedStrategy> {
        let x = announced
            .ok_or_else(|| Error::invalid("best response needs the column player's strategy"))?;
        best_response_opponent_act(&self.a, x)
    }

    fn observe(&mut self, _: usize, _: usize, _: f64, _: &MixedStrategy, _: &MixedStrategy) -> Result<()> {
        Ok(())
    }
}
