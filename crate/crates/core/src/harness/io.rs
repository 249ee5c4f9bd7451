//! On-disk artifacts: one CSV of step records and one JSON summary per run.

use std::fs::{self, File};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{GameSpec, RunConfig};
use super::episode::{EpisodeResult, StepRecord};
use super::metrics::{aggregate, hindsight_regret, negative_return_stats, Aggregate, ReturnStats};
use crate::error::{Error, Result};
use crate::game::{MixedStrategy, PayoffMatrix};

pub const CSV_HEADER: [&str; 13] = [
    "seed",
    "t",
    "i",
    "j",
    "r",
    "x_probs",
    "y_probs",
    "expected_payoff",
    "v_star",
    "abs_regret_cum",
    "signed_regret_cum",
    "kl_x",
    "kl_y",
];

fn join_probs(s: &MixedStrategy) -> String {
    s.probs().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";")
}

fn parse_probs(field: &str) -> Result<MixedStrategy> {
    let probs = field
        .split(';')
        .map(|p| p.parse::<f64>().map_err(|e| Error::invalid(format!("bad probability '{p}': {e}"))))
        .collect::<Result<Vec<_>>>()?;
    MixedStrategy::new(probs)
}

/// Floats use the shortest representation that parses back exactly; the
/// KL sentinel is written as `inf`.
pub fn write_records<'a, W: Write>(out: W, records: impl IntoIterator<Item = &'a StepRecord>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for rec in records {
        w.write_record([
            rec.seed.to_string(),
            rec.t.to_string(),
            rec.i.to_string(),
            rec.j.to_string(),
            rec.r.to_string(),
            join_probs(&rec.x),
            join_probs(&rec.y),
            rec.expected_payoff.to_string(),
            rec.v_star.to_string(),
            rec.abs_regret_cum.to_string(),
            rec.signed_regret_cum.to_string(),
            rec.kl_x.to_string(),
            rec.kl_y.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<StepRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::invalid(format!("unexpected CSV header {header:?}")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::invalid(format!("bad number '{s}': {e}")));
    let int = |s: &str| s.parse::<u64>().map_err(|e| Error::invalid(format!("bad integer '{s}': {e}")));
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        out.push(StepRecord {
            seed: int(&row[0])?,
            t: int(&row[1])? as usize,
            i: int(&row[2])? as usize,
            j: int(&row[3])? as usize,
            r: num(&row[4])?,
            x: parse_probs(&row[5])?,
            y: parse_probs(&row[6])?,
            expected_payoff: num(&row[7])?,
            v_star: num(&row[8])?,
            abs_regret_cum: num(&row[9])?,
            signed_regret_cum: num(&row[10])?,
            kl_x: num(&row[11])?,
            kl_y: num(&row[12])?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub matrix: PayoffMatrix,
    pub value: f64,
    pub x_star: MixedStrategy,
    pub y_star: MixedStrategy,
    pub final_abs_regret: f64,
    pub final_signed_regret: f64,
    pub final_kl_x: f64,
    pub final_kl_y: f64,
    pub hindsight_regret: f64,
    pub returns: ReturnStats,
}

/// Final regrets over the seeds that drew one variant of a randomized game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub label: String,
    pub seeds: usize,
    pub mean_final_abs_regret: f64,
    pub mean_final_signed_regret: f64,
    pub mean_signed_regret_per_round: f64,
}

impl GroupSummary {
    fn collect(label: &str, horizon: usize, seeds: &[&SeedSummary]) -> Self {
        let n = seeds.len() as f64;
        let signed = seeds.iter().map(|s| s.final_signed_regret).sum::<f64>() / n;
        GroupSummary {
            label: label.to_string(),
            seeds: seeds.len(),
            mean_final_abs_regret: seeds.iter().map(|s| s.final_abs_regret).sum::<f64>() / n,
            mean_final_signed_regret: signed,
            mean_signed_regret_per_round: signed / horizon as f64,
        }
    }
}

/// Non-finite values (KL sentinels, empty means) serialize as JSON `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub code_version: String,
    pub config: RunConfig,
    pub column: String,
    pub row: String,
    pub mean_final_abs_regret: f64,
    pub std_final_abs_regret: f64,
    pub mean_final_signed_regret: f64,
    pub std_final_signed_regret: f64,
    pub returns: ReturnStats,
    /// Per-variant breakdown for games drawn from a finite family; for the
    /// 2×2 counter-example the groups are `r = 1` and `r = -1`.
    pub groups: Vec<GroupSummary>,
    pub per_seed: Vec<SeedSummary>,
    pub series: Aggregate,
}

impl Summary {
    pub fn new(cfg: &RunConfig, results: &[EpisodeResult]) -> Result<Self> {
        let first = results.first().ok_or_else(|| Error::invalid("no episodes to summarize"))?;
        let runs: Vec<&[StepRecord]> = results.iter().map(|e| e.records.as_slice()).collect();
        let series = aggregate(&runs)?;
        let per_seed = results
            .iter()
            .map(|e| {
                let last = e.final_record();
                Ok(SeedSummary {
                    seed: e.seed,
                    matrix: e.matrix.clone(),
                    value: e.solution.value,
                    x_star: e.solution.x_star.clone(),
                    y_star: e.solution.y_star.clone(),
                    final_abs_regret: last.abs_regret_cum,
                    final_signed_regret: last.signed_regret_cum,
                    final_kl_x: last.kl_x,
                    final_kl_y: last.kl_y,
                    hindsight_regret: hindsight_regret(&e.records, &e.matrix),
                    returns: negative_return_stats(&e.records)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut groups = Vec::new();
        if cfg.game == GameSpec::Counterexample {
            for (label, sign) in [("r = 1", 1.0), ("r = -1", -1.0)] {
                let members: Vec<&SeedSummary> =
                    per_seed.iter().filter(|s| s.matrix.get(0, 0) * sign > 0.0).collect();
                if !members.is_empty() {
                    groups.push(GroupSummary::collect(label, cfg.horizon, &members));
                }
            }
        }
        Ok(Summary {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            column: first.column.clone(),
            row: first.row.clone(),
            mean_final_abs_regret: series.abs_regret_cum.last_mean(),
            std_final_abs_regret: *series.abs_regret_cum.std.last().expect("non-empty"),
            mean_final_signed_regret: series.signed_regret_cum.last_mean(),
            std_final_signed_regret: *series.signed_regret_cum.std.last().expect("non-empty"),
            returns: negative_return_stats(results.iter().flat_map(|e| &e.records))?,
            groups,
            per_seed,
            series,
        })
    }
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`, returning both paths.
pub fn write_experiment(dir: &Path, cfg: &RunConfig, results: &[EpisodeResult]) -> Result<(PathBuf, PathBuf, Summary)> {
    fs::create_dir_all(dir)?;
    let summary = Summary::new(cfg, results)?;
    let stem = format!("{}_{}_vs_{}", cfg.name, summary.column, summary.row);
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_records(File::create(&csv_path)?, results.iter().flat_map(|e| &e.records))?;
    let text = serde_json::to_string_pretty(&summary)?;
    fs::write(&json_path, text)?;
    Ok((csv_path, json_path, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{AgentSpec, GameSpec, PriorSpec};
    use crate::harness::episode::run_experiment;

    fn cfg() -> RunConfig {
        RunConfig {
            name: "io".into(),
            game: GameSpec::Counterexample,
            column: AgentSpec::Exp3,
            row: AgentSpec::Nash,
            prior: PriorSpec::Counterexample,
            horizon: 30,
            noise_var: 1.0,
            seeds: vec![4, 5],
            output: None,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let results = run_experiment(&cfg()).unwrap();
        let mut records: Vec<StepRecord> = results.into_iter().flat_map(|e| e.records).collect();
        records[3].kl_x = f64::INFINITY;
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&CSV_HEADER.join(",")));
        assert!(text.contains(",inf,"));
        assert_eq!(read_records(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn rejects_foreign_headers() {
        assert!(read_records("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn summary_echoes_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg();
        let results = run_experiment(&c).unwrap();
        let (csv_path, json_path, summary) = write_experiment(dir.path(), &c, &results).unwrap();
        assert!(csv_path.ends_with("io_exp3_vs_nash.csv"));
        let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(json_path).unwrap()).unwrap();
        let echoed: RunConfig = serde_json::from_value(parsed["config"].clone()).unwrap();
        assert_eq!(echoed, c);
        assert_eq!(parsed["per_seed"].as_array().unwrap().len(), 2);
        assert_eq!(summary.per_seed[0].matrix, results[0].matrix);
        let back = read_records(File::open(csv_path).unwrap()).unwrap();
        assert_eq!(back.len(), 60);
    }
}
