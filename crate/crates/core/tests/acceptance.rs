//! Full-size acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::time::Instant;

use zsgames::harness::presets::{
    counterexample_2x2, robust_bandit, rps_head_to_head, rps_selfplay, rps_vs_best_response, RobustOpponent,
};
use zsgames::harness::{
    run_experiment, ucb_regret_bound, AgentSpec, EpisodeResult, GameSpec, PriorSpec, RunConfig, Summary,
};
use zsgames::validate;

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn brief(c: &validate::Check) -> String {
    let note = if c.note.is_empty() { String::new() } else { format!(", {}", c.note) };
    format!("{} {}/{} (worst {:.3e}{note})", c.name, c.passed, c.total, c.worst)
}

fn run(cfg: &RunConfig) -> (Vec<EpisodeResult>, Summary) {
    let results = run_experiment(cfg).expect("experiment runs");
    let summary = Summary::new(cfg, &results).expect("summary");
    (results, summary)
}

fn game_solver() -> Outcome {
    let t0 = Instant::now();
    let check = validate::solver_vs_brute_force(200, 11).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    Outcome {
        name: "game solver matches support enumeration",
        passed: check.ok() && secs < 10.0,
        detail: format!("{}; {secs:.2}s", brief(&check)),
    }
}

fn counterexample() -> Outcome {
    let t0 = Instant::now();
    let plus_one = |results: &[EpisodeResult]| -> Vec<f64> {
        results
            .iter()
            .filter(|e| e.matrix.get(0, 0) > 0.0)
            .map(|e| e.final_record().signed_regret_cum)
            .collect()
    };
    let cfg = counterexample_2x2("ts").unwrap();
    let horizon = cfg.horizon as f64;
    let ts = plus_one(&run(&cfg).0);
    let ts_per_round = ts.iter().sum::<f64>() / ts.len() as f64 / horizon;
    let kl = plus_one(&run(&counterexample_2x2("klearn").unwrap()).0);
    let small = kl.iter().filter(|r| **r <= 10.0).count();
    let secs = t0.elapsed().as_secs_f64();
    Outcome {
        name: "counter-example separates TS from K-learning",
        passed: (0.20..=0.30).contains(&ts_per_round) && small as f64 >= 0.95 * kl.len() as f64 && secs < 300.0,
        detail: format!(
            "TS regret/round {ts_per_round:.4} on {} seeds with r = 1; K-learning ≤ 10 on {small}/{}; {secs:.1}s",
            ts.len(),
            kl.len()
        ),
    }
}

fn ucb_envelope() -> Outcome {
    let cfg = RunConfig {
        name: "ucb_envelope".into(),
        game: GameSpec::Uniform { low: 0.0, high: 1.0, rows: 3, cols: 3 },
        column: AgentSpec::Ucb,
        row: AgentSpec::BestResponse,
        prior: PriorSpec::Gaussian { mean: 0.0, var: 1.0 },
        horizon: 1000,
        noise_var: 1.0,
        seeds: (0..20).collect(),
        output: None,
    };
    let bound = ucb_regret_bound(3, 3, cfg.horizon);
    let (results, _) = run(&cfg);
    let worst = results
        .iter()
        .map(|e| e.final_record().abs_regret_cum)
        .fold(f64::NEG_INFINITY, f64::max);
    Outcome {
        name: "UCB regret within its high-probability envelope",
        passed: worst <= bound,
        detail: format!("worst of 20 games {worst:.2} vs bound {bound:.2}"),
    }
}

fn counting() -> Outcome {
    let report = validate::counting_check(1000, 12).unwrap();
    let (total, tight) = report.two_round_case;
    Outcome {
        name: "selection counting bound",
        passed: report.check.ok() && total > tight && (total - 2.0).abs() < 1e-12,
        detail: format!(
            "{}; q = 1, T = 2 gives {total} vs {tight:.4}",
            brief(&report.check)
        ),
    }
}

fn solver_numerics() -> Outcome {
    let checks = [
        validate::gradient_check(100, 13).unwrap(),
        validate::convexity_check(1000, 14).unwrap(),
        validate::optimism_check(1000, 15).unwrap(),
    ];
    Outcome {
        name: "K-learning objective numerics",
        passed: checks.iter().all(validate::Check::ok),
        detail: checks.iter().map(brief).collect::<Vec<_>>().join(" | "),
    }
}

fn rps_trends() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for alg in ["ucb", "klearn"] {
        let (_, s) = run(&rps_selfplay(alg).unwrap());
        let (early, last) = (s.series.kl_x.mean[49], s.series.kl_x.last_mean());
        ok &= last < early / 10.0;
        parts.push(format!("{alg} KL {early:.4} → {last:.4}"));
    }
    let (_, s) = run(&rps_selfplay("exp3").unwrap());
    let exp3 = s.series.kl_x.last_mean();
    ok &= exp3 > 0.01;
    parts.push(format!("exp3 KL at T {exp3:.4}"));
    let br = |alg| run(&rps_vs_best_response(alg).unwrap()).1.mean_final_abs_regret;
    let (ts, ucb, kl) = (br("ts"), br("ucb"), br("klearn"));
    ok &= ts >= 2.0 * ucb && ts >= 2.0 * kl;
    parts.push(format!("vs best response: ts {ts:.1}, ucb {ucb:.1}, klearn {kl:.1}"));
    Outcome { name: "rock-paper-scissors trends", passed: ok, detail: parts.join("; ") }
}

fn robust_orderings() -> Outcome {
    let fraction = |alg, vs| run(&robust_bandit(alg, vs).unwrap()).1.returns.negative_fraction;
    let mut ok = true;
    let nature: Vec<(&str, f64)> = ["klearn", "naive_ucb", "naive_ts"]
        .into_iter()
        .map(|a| (a, fraction(a, RobustOpponent::Nature)))
        .collect();
    let kl_nature = nature[0].1;
    ok &= nature[1..].iter().all(|(_, f)| *f >= 3.0 * kl_nature);
    let br: Vec<(&str, f64)> = ["klearn", "ts", "ucb", "exp3", "naive_ucb", "naive_ts"]
        .into_iter()
        .map(|a| (a, fraction(a, RobustOpponent::BestResponse)))
        .collect();
    ok &= br[4].1 == 1.0 && br[5].1 == 1.0;
    ok &= br[1..4].iter().all(|(_, f)| br[0].1 < *f);
    let fmt = |v: &[(&str, f64)]| v.iter().map(|(a, f)| format!("{a} {:.1}%", 100.0 * f)).collect::<Vec<_>>().join(", ");
    Outcome {
        name: "robust-bandit orderings",
        passed: ok,
        detail: format!("vs nature: {}; vs best response: {}", fmt(&nature), fmt(&br)),
    }
}

fn head_to_head() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for alg in ["klearn", "ucb"] {
        // Negative signed regret in the maximizer seat means the maximizer came out ahead.
        let as_max = run(&rps_head_to_head(alg, "exp3").unwrap()).1.mean_final_signed_regret;
        ok &= as_max < 0.0;
        parts.push(format!("{alg} vs exp3 {as_max:.2}"));
    }
    Outcome { name: "K-learning and UCB beat Exp3 head to head", passed: ok, detail: parts.join("; ") }
}

fn main() {
    let criteria: [fn() -> Outcome; 8] = [
        game_solver,
        counterexample,
        ucb_envelope,
        counting,
        solver_numerics,
        rps_trends,
        robust_orderings,
        head_to_head,
    ];
    let mut failed = 0;
    for criterion in criteria {
        let t0 = Instant::now();
        let o = criterion();
        failed += usize::from(!o.passed);
        println!(
            "{} {} ({:.1}s): {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            t0.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
