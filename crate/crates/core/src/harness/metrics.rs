use serde::{Deserialize, Serialize};

use super::episode::StepRecord;
use crate::error::{Error, Result};
use crate::game::PayoffMatrix;

/// Per-round mean and population standard deviation over seeds.
/// Non-finite values are left out and counted in `excluded`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub excluded: Vec<usize>,
}

impl Series {
    fn from_columns(columns: &[Vec<f64>]) -> Self {
        let rounds = columns[0].len();
        let mut out = Series {
            mean: Vec::with_capacity(rounds),
            std: Vec::with_capacity(rounds),
            excluded: Vec::with_capacity(rounds),
        };
        for t in 0..rounds {
            let finite: Vec<f64> = columns.iter().map(|c| c[t]).filter(|v| v.is_finite()).collect();
            out.excluded.push(columns.len() - finite.len());
            if finite.is_empty() {
                out.mean.push(f64::NAN);
                out.std.push(f64::NAN);
                continue;
            }
            let n = finite.len() as f64;
            let mean = finite.iter().sum::<f64>() / n;
            let var = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            out.mean.push(mean);
            out.std.push(var.sqrt());
        }
        out
    }

    pub fn last_mean(&self) -> f64 {
        *self.mean.last().expect("non-empty series")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub seeds: usize,
    pub reward: Series,
    pub expected_payoff: Series,
    pub abs_regret_cum: Series,
    pub signed_regret_cum: Series,
    pub kl_x: Series,
    pub kl_y: Series,
}

pub fn aggregate<R: AsRef<[StepRecord]>>(runs: &[R]) -> Result<Aggregate> {
    let first = runs.first().ok_or_else(|| Error::invalid("nothing to aggregate"))?;
    let rounds = first.as_ref().len();
    if rounds == 0 || runs.iter().any(|r| r.as_ref().len() != rounds) {
        return Err(Error::invalid("runs must be non-empty and of equal length"));
    }
    let field = |f: fn(&StepRecord) -> f64| {
        let cols: Vec<Vec<f64>> = runs.iter().map(|r| r.as_ref().iter().map(f).collect()).collect();
        Series::from_columns(&cols)
    };
    Ok(Aggregate {
        seeds: runs.len(),
        reward: field(|s| s.r),
        expected_payoff: field(|s| s.expected_payoff),
        abs_regret_cum: field(|s| s.abs_regret_cum),
        signed_regret_cum: field(|s| s.signed_regret_cum),
        kl_x: field(|s| s.kl_x),
        kl_y: field(|s| s.kl_y),
    })
}

/// `max_j Σ_t A[i_t, j] − Σ_t r_t` for the column player.
pub fn hindsight_regret(records: &[StepRecord], a: &PayoffMatrix) -> f64 {
    let mut totals = vec![0.0; a.cols()];
    let mut earned = 0.0;
    for rec in records {
        for (j, total) in totals.iter_mut().enumerate() {
            *total += a.get(rec.i, j);
        }
        earned += rec.r;
    }
    totals.into_iter().fold(f64::NEG_INFINITY, f64::max) - earned
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnStats {
    /// Fraction of rounds whose expected payoff is negative.
    pub negative_fraction: f64,
    pub mean: f64,
}

/// Pooled over every record given, across seeds.
pub fn negative_return_stats<'a>(records: impl IntoIterator<Item = &'a StepRecord>) -> Result<ReturnStats> {
    let (mut n, mut neg, mut sum) = (0usize, 0usize, 0.0);
    for rec in records {
        n += 1;
        if rec.expected_payoff < 0.0 {
            neg += 1;
        }
        sum += rec.expected_payoff;
    }
    if n == 0 {
        return Err(Error::invalid("no records"));
    }
    Ok(ReturnStats {
        negative_fraction: neg as f64 / n as f64,
        mean: sum / n as f64,
    })
}

/// Running `Σ_t Σ_i p_i^t / (1 ∨ n_i^t)` for a selection process over `q`
/// indices, where `n_i^t` counts selections before round `t`, alongside the
/// realized `Σ_t 1 / (1 ∨ n_{a_t}^t)` over the selected indices. The two have
/// the same expectation; only the second is bounded on every path.
#[derive(Debug, Clone)]
pub struct SelectionCounter {
    counts: Vec<u64>,
    total: f64,
    selected_total: f64,
}

impl SelectionCounter {
    pub fn new(q: usize) -> Self {
        SelectionCounter {
            counts: vec![0; q],
            total: 0.0,
            selected_total: 0.0,
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Adds this round's term, then records the selection.
    pub fn step(&mut self, probs: &[f64], selected: usize) -> f64 {
        let term: f64 = probs
            .iter()
            .zip(&self.counts)
            .map(|(p, &n)| p / n.max(1) as f64)
            .sum();
        self.total += term;
        self.selected_total += 1.0 / self.counts[selected].max(1) as f64;
        self.counts[selected] += 1;
        term
    }

    /// The probability-weighted sum.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn selected_total(&self) -> f64 {
        self.selected_total
    }
}

/// `q (2 + ln T)`. Bounds the selected-index sum on every path, hence the
/// weighted sum in expectation: each index contributes `1 + 1 + 1/2 + … `.
pub fn selection_bound(q: usize, horizon: usize) -> f64 {
    q as f64 * (2.0 + (horizon as f64).ln())
}

/// `q (1 + ln T)`, which is exceeded already at `q = 1, T = 2`.
pub fn tight_selection_bound(q: usize, horizon: usize) -> f64 {
    q as f64 * (1.0 + (horizon as f64).ln())
}

/// Regret bound for optimistic play with entries in `[0, 1]` and 1-sub-Gaussian noise.
pub fn ucb_regret_bound(m: usize, k: usize, horizon: usize) -> f64 {
    let (mk, t) = ((m * k) as f64, horizon as f64);
    1.0 + 2.0 * (mk * t * (2.0 * mk * t * t).ln()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::MixedStrategy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn rec(t: usize, i: usize, j: usize, r: f64, payoff: f64) -> StepRecord {
        StepRecord {
            seed: 0,
            t,
            i,
            j,
            r,
            x: MixedStrategy::uniform(2),
            y: MixedStrategy::uniform(1),
            expected_payoff: payoff,
            v_star: 0.0,
            abs_regret_cum: 0.0,
            signed_regret_cum: 0.0,
            kl_x: 0.0,
            kl_y: 0.0,
        }
    }

    #[test]
    fn aggregate_examples() {
        let one = vec![rec(1, 0, 0, 0.3, 1.0), rec(2, 0, 0, -0.1, 2.0)];
        let agg = aggregate(std::slice::from_ref(&one)).unwrap();
        assert_eq!(agg.reward.mean, vec![0.3, -0.1]);
        assert_eq!(agg.reward.std, vec![0.0, 0.0]);

        let a = vec![rec(1, 0, 0, 1.0, 0.0)];
        let b = vec![rec(1, 0, 0, 4.0, 0.0)];
        let agg = aggregate(&[a, b]).unwrap();
        assert_eq!(agg.reward.mean, vec![2.5]);
        assert_eq!(agg.reward.std, vec![1.5]);

        assert!(aggregate::<Vec<StepRecord>>(&[]).is_err());
        assert!(aggregate(&[one, vec![rec(1, 0, 0, 0.0, 0.0)]]).is_err());
    }

    #[test]
    fn aggregate_excludes_sentinels() {
        let mut a = rec(1, 0, 0, 0.0, 0.0);
        a.kl_x = f64::INFINITY;
        let mut b = rec(1, 0, 0, 0.0, 0.0);
        b.kl_x = 0.5;
        let agg = aggregate(&[vec![a], vec![b]]).unwrap();
        assert_eq!(agg.kl_x.mean, vec![0.5]);
        assert_eq!(agg.kl_x.excluded, vec![1]);
        assert_eq!(agg.kl_y.excluded, vec![0]);
    }

    #[test]
    fn aggregate_of_standard_normals_is_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let runs: Vec<Vec<StepRecord>> = (0..100)
            .map(|_| (1..=200).map(|t| rec(t, 0, 0, StandardNormal.sample(&mut rng), 0.0)).collect())
            .collect();
        let agg = aggregate(&runs).unwrap();
        assert!(agg.reward.mean.iter().all(|m| m.abs() < 0.4));
    }

    #[test]
    fn hindsight_examples() {
        let a = PayoffMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap();
        assert_eq!(hindsight_regret(&[rec(1, 0, 0, 0.0, 0.0)], &a), 1.0);
        let best: Vec<_> = (1..=5).map(|t| rec(t, 0, 1, 1.0, 1.0)).collect();
        assert_eq!(hindsight_regret(&best, &a), 0.0);
    }

    #[test]
    fn negative_return_examples() {
        let pos = [rec(1, 0, 0, 0.0, 1.0), rec(2, 0, 0, 0.0, 3.0)];
        assert_eq!(
            negative_return_stats(&pos).unwrap(),
            ReturnStats { negative_fraction: 0.0, mean: 2.0 }
        );
        let mixed = [rec(1, 0, 0, 0.0, -1.0), rec(2, 0, 0, 0.0, 1.0)];
        assert_eq!(
            negative_return_stats(&mixed).unwrap(),
            ReturnStats { negative_fraction: 0.5, mean: 0.0 }
        );
        assert!(negative_return_stats(&[]).is_err());
    }

    #[test]
    fn only_the_selected_sum_is_bounded_on_every_path() {
        // An unlucky path: index 1 keeps half the mass but is never drawn.
        let mut c = SelectionCounter::new(2);
        for _ in 0..1000 {
            c.step(&[0.5, 0.5], 0);
        }
        assert!(c.selected_total() <= selection_bound(2, 1000));
        assert!(c.total() > selection_bound(2, 1000));
        assert!((c.selected_total() - (1.0 + (1..1000).map(|n| 1.0 / n as f64).sum::<f64>())).abs() < 1e-12);
    }

    #[test]
    fn selection_counter_exceeds_the_tight_bound_at_two_rounds() {
        let mut c = SelectionCounter::new(1);
        c.step(&[1.0], 0);
        c.step(&[1.0], 0);
        assert_eq!(c.total(), 2.0);
        assert!(c.total() > tight_selection_bound(1, 2));
        assert!(c.total() <= selection_bound(1, 2));
        assert!((tight_selection_bound(1, 2) - 1.693).abs() < 1e-3);
    }

    #[test]
    fn ucb_bound_value() {
        // 1 + 2 sqrt(9000 ln(1.8e7))
        assert!((ucb_regret_bound(3, 3, 1000) - 776.507).abs() < 0.001);
    }
}
