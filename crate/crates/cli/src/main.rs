//! Command-line front end for the repeated-game experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use zsgames::harness::presets::{
    counterexample_2x2, robust_bandit, rps_head_to_head, rps_selfplay, rps_vs_best_response, RobustOpponent,
};
use zsgames::harness::{run_experiment, write_experiment, AgentSpec, GameSpec, PriorSpec, RunConfig, Summary};
use zsgames::validate;

#[derive(Parser, Debug)]
#[command(name = "zsgames", version, about = "Learning in zero-sum matrix games with bandit feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rock-paper-scissors with the same learner in both seats.
    RpsSelfplay(Common),
    /// Rock-paper-scissors against a best-responding row player.
    RpsBr(Common),
    /// Rock-paper-scissors between two learners; regret is from --agent's side.
    RpsH2h(Common),
    /// The 2×2 game [[r, 0], [0, -1]] with r = ±1 against a Nash row player.
    Counterexample(Common),
    /// 5×10 Gaussian games against nature or a best responder.
    RobustBandit(Common),
    /// An m×k game drawn from the prior, any learner against any opponent.
    Custom(Common),
    /// Oracle and invariant checks.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Learner in the maximizing (column) seat.
    #[arg(long, default_value = "klearn")]
    agent: String,
    /// Row player for robust-bandit and custom runs.
    #[arg(long)]
    opponent: Option<String>,
    /// Minimizing learner for rps-h2h.
    #[arg(long, default_value = "exp3")]
    agent2: String,
    #[arg(long, default_value_t = 1000)]
    horizon: usize,
    #[arg(long, default_value_t = 100)]
    seeds: u64,
    #[arg(long, default_value_t = 1.0)]
    noise_var: f64,
    #[arg(long)]
    prior_mean: Option<f64>,
    #[arg(long)]
    prior_var: Option<f64>,
    /// Rows of a custom game.
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Columns of a custom game.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// K-learning solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

/// Bad flags exit with 2, failures while running with 1.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

fn build(command: &Command, c: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match command {
        Command::RpsSelfplay(_) => rps_selfplay(&c.agent)?,
        Command::RpsBr(_) => rps_vs_best_response(&c.agent)?,
        Command::RpsH2h(_) => rps_head_to_head(&c.agent, &c.agent2)?,
        Command::Counterexample(_) => counterexample_2x2(&c.agent)?,
        Command::RobustBandit(_) => {
            let vs = RobustOpponent::from_name(c.opponent.as_deref().unwrap_or("nature"))?;
            robust_bandit(&c.agent, vs)?
        }
        Command::Custom(_) => {
            let mean = c.prior_mean.unwrap_or(0.0);
            let var = c.prior_var.unwrap_or(1.0);
            let mut row = AgentSpec::from_name(c.opponent.as_deref().unwrap_or("best_response"))?;
            if let AgentSpec::Fixed { probs } = &mut row {
                *probs = vec![1.0 / c.m as f64; c.m];
            }
            RunConfig {
                name: "custom".into(),
                game: GameSpec::Gaussian { mean, var, rows: c.m, cols: c.k },
                column: AgentSpec::learner(&c.agent)?,
                row,
                prior: PriorSpec::Gaussian { mean, var },
                horizon: c.horizon,
                noise_var: c.noise_var,
                seeds: Vec::new(),
                output: None,
            }
        }
        Command::Validate { .. } => unreachable!("validate has no run config"),
    };
    if let (Some(mean), Some(var)) = (c.prior_mean, c.prior_var) {
        cfg.prior = PriorSpec::Gaussian { mean, var };
    } else if c.prior_mean.is_some() != c.prior_var.is_some() && !matches!(command, Command::Custom(_)) {
        anyhow::bail!("--prior-mean and --prior-var must be given together");
    }
    if let Some(tol) = c.tol {
        for seat in [&mut cfg.column, &mut cfg.row] {
            if let AgentSpec::Klearn { tol: t } = seat {
                *t = tol;
            }
        }
    }
    cfg.horizon = c.horizon;
    cfg.noise_var = c.noise_var;
    cfg.seeds = (c.seed_base..c.seed_base + c.seeds).collect();
    cfg.output = Some(c.out.clone());
    cfg.validate()?;
    Ok(cfg)
}

fn fmt(v: f64) -> String {
    if v.is_finite() { format!("{v:.4}") } else { "n/a".into() }
}

fn print_summary(s: &Summary) {
    println!("{:<28} {}", "experiment", s.config.name);
    println!("{:<28} {} vs {}", "players (max vs min)", s.column, s.row);
    println!("{:<28} {} seeds x {} rounds", "runs", s.per_seed.len(), s.config.horizon);
    println!("{:<28} {} ± {}", "final abs regret", fmt(s.mean_final_abs_regret), fmt(s.std_final_abs_regret));
    println!("{:<28} {} ± {}", "final signed regret", fmt(s.mean_final_signed_regret), fmt(s.std_final_signed_regret));
    println!("{:<28} {}", "mean expected payoff", fmt(s.returns.mean));
    println!("{:<28} {:.2}%", "negative-return rounds", 100.0 * s.returns.negative_fraction);
    println!("{:<28} {}", "final KL(x ‖ x*)", fmt(s.series.kl_x.last_mean()));
    println!("{:<28} {}", "final KL(y ‖ y*)", fmt(s.series.kl_y.last_mean()));
    for g in &s.groups {
        println!(
            "{:<28} {} seeds, signed regret {} ({} per round)",
            g.label,
            g.seeds,
            fmt(g.mean_final_signed_regret),
            fmt(g.mean_signed_regret_per_round)
        );
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = match &cli.command {
        Command::Validate { seed_base } => {
            let checks = validate::run_all(*seed_base).map_err(|e| Failure::Runtime(e.into()))?;
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.ok()).count();
            println!("{} of {} checks passed", checks.len() - failed, checks.len());
            if failed > 0 {
                return Err(Failure::Runtime(anyhow::anyhow!("{failed} checks failed")));
            }
            return Ok(());
        }
        Command::RpsSelfplay(c)
        | Command::RpsBr(c)
        | Command::RpsH2h(c)
        | Command::Counterexample(c)
        | Command::RobustBandit(c)
        | Command::Custom(c) => c,
    };
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            return Err(Failure::Usage(anyhow::anyhow!("--jobs must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Runtime(e.into()))?;
    }
    let cfg = build(&cli.command, common).map_err(Failure::Usage)?;
    log::info!("running {} for {} seeds", cfg.name, cfg.seeds.len());
    let results = run_experiment(&cfg).map_err(|e| Failure::Runtime(e.into()))?;
    let (csv, json, summary) = write_experiment(&common.out, &cfg, &results)
        .with_context(|| format!("writing results to {}", common.out.display()))
        .map_err(Failure::Runtime)?;
    print_summary(&summary);
    println!("{:<28} {}", "records", csv.display());
    println!("{:<28} {}", "summary", json.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
