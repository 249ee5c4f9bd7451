use proptest::prelude::*;
use zsgames::game::{best_response_row, expected_payoff, solve_zero_sum, MixedStrategy, PayoffMatrix};

const TOL: f64 = 1e-9;

fn matrix() -> impl Strategy<Value = PayoffMatrix> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(m, k)| {
        prop::collection::vec(-3.0f64..3.0, m * k)
            .prop_map(move |e| PayoffMatrix::new(m, k, e).unwrap())
    })
}

fn simplex(n: usize) -> impl Strategy<Value = MixedStrategy> {
    prop::collection::vec(0.001f64..1.0, n).prop_map(|w| MixedStrategy::from_weights(w).unwrap())
}

proptest! {
    #[test]
    fn solutions_carry_a_saddle_certificate(a in matrix()) {
        let s = solve_zero_sum(&a, TOL).unwrap();
        prop_assert!(s.row_guarantee(&a) - s.column_guarantee(&a) <= 2.0 * TOL);
        prop_assert!(s.gap <= 2.0 * TOL);
    }

    #[test]
    fn transposing_negates_the_value(a in matrix()) {
        let s = solve_zero_sum(&a, TOL).unwrap();
        let b = a.negated_transpose();
        let t = solve_zero_sum(&b, TOL).unwrap();
        prop_assert!((t.value + s.value).abs() <= 1e-8);
        // The roles swap: the transposed game's column strategy is optimal for the row seat of A.
        let roles = zsgames::game::GameSolution {
            x_star: t.y_star.clone(),
            y_star: t.x_star.clone(),
            value: -t.value,
            gap: t.gap,
        };
        prop_assert!(roles.column_guarantee(&a) >= s.value - 1e-8);
        prop_assert!(roles.row_guarantee(&a) <= s.value + 1e-8);
    }

    #[test]
    fn shifting_entries_shifts_the_value(a in matrix(), c in -5.0f64..5.0) {
        let s = solve_zero_sum(&a, TOL).unwrap();
        let shifted = a.shifted(c);
        let t = solve_zero_sum(&shifted, TOL).unwrap();
        prop_assert!((t.value - s.value - c).abs() <= 1e-8);
        prop_assert!(s.column_guarantee(&shifted) >= t.value - 1e-8);
        prop_assert!(s.row_guarantee(&shifted) <= t.value + 1e-8);
    }

    #[test]
    fn best_response_is_never_worse_for_the_row_player(
        (a, x, ys) in matrix().prop_flat_map(|a| {
            let (m, k) = (a.rows(), a.cols());
            (Just(a), simplex(k), prop::collection::vec(simplex(m), 100))
        })
    ) {
        let (_, best) = best_response_row(&a, &x).unwrap();
        for y in &ys {
            prop_assert!(best <= expected_payoff(&a, &x, y).unwrap() + 1e-12);
        }
    }
}
