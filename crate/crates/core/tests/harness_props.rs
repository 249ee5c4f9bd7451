use proptest::prelude::*;
use zsgames::game::MixedStrategy;
use zsgames::harness::{
    read_records, run_episode, run_experiment, write_records, AgentSpec, GameSpec, PriorSpec, RunConfig, StepRecord,
};

fn agent(idx: usize) -> AgentSpec {
    match idx {
        0 => AgentSpec::Ucb,
        1 => AgentSpec::Ts,
        2 => AgentSpec::Klearn { tol: 1e-6 },
        3 => AgentSpec::Exp3,
        4 => AgentSpec::NaiveUcb,
        _ => AgentSpec::NaiveTs,
    }
}

fn opponent(idx: usize) -> AgentSpec {
    match idx {
        0..=5 => agent(idx),
        6 => AgentSpec::Nash,
        7 => AgentSpec::Nature { period: 7 },
        _ => AgentSpec::BestResponse,
    }
}

fn config() -> impl Strategy<Value = RunConfig> {
    (0usize..6, 0usize..9, 1usize..=4, 1usize..=4, 1usize..40, 0.0f64..2.0).prop_map(|(c, r, m, k, horizon, noise)| {
        RunConfig {
            name: "prop".into(),
            game: GameSpec::Gaussian { mean: 0.0, var: 1.0, rows: m, cols: k },
            column: agent(c),
            row: opponent(r),
            prior: PriorSpec::Gaussian { mean: 0.0, var: 1.0 },
            horizon,
            noise_var: noise,
            seeds: vec![0],
            output: None,
        }
    })
}

fn distribution(s: &MixedStrategy) -> bool {
    s.probs().iter().all(|p| *p >= 0.0) && (s.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-9
}

fn finite_or_sentinel(v: f64) -> f64 {
    if v.is_nan() { 0.0 } else { v }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn episode_records_are_consistent(cfg in config(), seed in any::<u64>()) {
        let e = run_episode(&cfg, seed).unwrap();
        let max_abs = e.matrix.max_abs();
        let mut payoff_sum = 0.0;
        let mut last_abs = 0.0;
        for (t, rec) in e.records.iter().enumerate() {
            prop_assert_eq!(rec.t, t + 1);
            prop_assert!(distribution(&rec.x) && distribution(&rec.y));
            prop_assert!(rec.expected_payoff.abs() <= max_abs + 1e-12);
            prop_assert!(rec.abs_regret_cum >= last_abs);
            last_abs = rec.abs_regret_cum;
            payoff_sum += rec.expected_payoff;
            prop_assert!(rec.kl_x >= 0.0 && rec.kl_y >= 0.0);
        }
        let last = e.final_record();
        let decomposed = cfg.horizon as f64 * last.v_star - payoff_sum;
        prop_assert!((last.signed_regret_cum - decomposed).abs() <= 1e-9);
    }

    #[test]
    fn episodes_are_deterministic(cfg in config(), seed in any::<u64>()) {
        prop_assert_eq!(run_episode(&cfg, seed).unwrap(), run_episode(&cfg, seed).unwrap());
    }

    #[test]
    fn csv_round_trip_reproduces_records(cfg in config(), seed in any::<u64>()) {
        let records: Vec<StepRecord> = run_episode(&cfg, seed).unwrap().records;
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let back = read_records(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (a, b) in records.iter().zip(&back) {
            prop_assert_eq!((a.seed, a.t, a.i, a.j), (b.seed, b.t, b.i, b.j));
            prop_assert_eq!(&a.x, &b.x);
            prop_assert_eq!(&a.y, &b.y);
            for (p, q) in [
                (a.r, b.r),
                (a.expected_payoff, b.expected_payoff),
                (a.v_star, b.v_star),
                (a.abs_regret_cum, b.abs_regret_cum),
                (a.signed_regret_cum, b.signed_regret_cum),
                (a.kl_x, b.kl_x),
                (a.kl_y, b.kl_y),
            ] {
                prop_assert_eq!(finite_or_sentinel(p).to_bits(), finite_or_sentinel(q).to_bits());
            }
        }
    }
}

/// Fixed strategies on both sides: noisy rewards average out to `yᵀAx`.
#[test]
fn fixed_play_rewards_average_to_the_expected_payoff() {
    let cfg = RunConfig {
        name: "fixed".into(),
        game: GameSpec::Matrix {
            matrix: zsgames::game::PayoffMatrix::from_rows(&[vec![1.0, -0.5], vec![0.25, 2.0]]).unwrap(),
        },
        column: AgentSpec::Fixed { probs: vec![0.3, 0.7] },
        row: AgentSpec::Fixed { probs: vec![0.6, 0.4] },
        prior: PriorSpec::Gaussian { mean: 0.0, var: 1.0 },
        horizon: 1000,
        noise_var: 1.0,
        seeds: (0..100).collect(),
        output: None,
    };
    let results = run_experiment(&cfg).unwrap();
    let n = (results.len() * cfg.horizon) as f64;
    let mean = results.iter().flat_map(|e| &e.records).map(|r| r.r).sum::<f64>() / n;
    let expected = results[0].records[0].expected_payoff;
    let action_var = 1.0; // payoff spread from the sampled actions, bounded by the entry range
    let slack = 3.0 * ((cfg.noise_var + action_var) / n).sqrt() * 3.0;
    assert!((mean - expected).abs() <= slack, "{mean} vs {expected} ± {slack}");
}
