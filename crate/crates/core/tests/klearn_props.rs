use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zsgames::belief::BeliefState;
use zsgames::game::MixedStrategy;
use zsgames::klearn::{lagrangian, solve, TAU_MAX, TAU_MIN};
use zsgames::validate::random_belief;

fn belief() -> impl Strategy<Value = BeliefState> {
    any::<u64>().prop_map(|seed| random_belief(&mut ChaCha8Rng::seed_from_u64(seed), 3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// `(y*, τ*)` minimizes the Lagrangian at `x*` over the feasible set.
    #[test]
    fn solution_is_a_saddle_point(
        b in belief(),
        probes in prop::collection::vec((prop::collection::vec(0.001f64..1.0, 3), -3.0f64..3.0), 20),
    ) {
        let s = solve(&b, 1e-9).unwrap();
        let at = lagrangian(&b, &s.x_star, &s.y_star, s.tau_star).unwrap();
        for (w, log_tau) in probes {
            let y = MixedStrategy::from_weights(w[..b.rows()].to_vec()).unwrap();
            let tau = 10f64.powf(log_tau).clamp(TAU_MIN, TAU_MAX);
            let other = lagrangian(&b, &s.x_star, &y, tau).unwrap();
            prop_assert!(at <= other + 1e-7, "{at} > {other}");
        }
    }

    #[test]
    fn solving_is_deterministic(b in belief()) {
        prop_assert_eq!(solve(&b, 1e-6).unwrap(), solve(&b, 1e-6).unwrap());
    }

    #[test]
    fn optimum_overestimates_the_mean_game(b in belief()) {
        let s = solve(&b, 1e-6).unwrap();
        let mean_value = zsgames::game::solve_zero_sum(&b.mean_matrix(), 1e-9).unwrap().value;
        prop_assert!(s.objective >= mean_value - 1e-6);
    }
}
