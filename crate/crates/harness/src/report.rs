//! Batch reports: per-algorithm aggregates and a first-hit comparison.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ccmab_core::stats::{mann_whitney_u, summarize, wilcoxon_signed_rank, Aggregate, PValueMethod, RunSummary};
use serde::{Deserialize, Serialize};

use crate::config::{Algo, ProblemKind, Protocol};
use crate::error::{HarnessError, Result};
use crate::experiment::RunOutcome;

pub const DEFAULT_BIN_WIDTH: usize = 25;

/// What gets stored per run: enough to rebuild a report without the traces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algo: Algo,
    pub problem: ProblemKind,
    pub protocol: Protocol,
    pub scenario: Option<u8>,
    pub budget: usize,
    pub pair: Option<usize>,
    pub scenario_seed: u64,
    pub summary: RunSummary,
}

impl RunRecord {
    pub fn new(outcome: &RunOutcome, pair: Option<usize>) -> Self {
        let c = &outcome.config;
        Self {
            algo: c.algo,
            problem: c.problem,
            protocol: c.protocol,
            scenario: (c.problem == ProblemKind::StringCover).then_some(c.scenario),
            budget: c.budget(),
            pair,
            scenario_seed: c.scenario_seed,
            summary: outcome.summary,
        }
    }

    /// First-hit step, with failures ranked after every success.
    pub fn ranked_first_hit(&self) -> f64 {
        self.summary.first_hit_step.unwrap_or(self.budget + 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoStats {
    pub algo: Algo,
    #[serde(flatten)]
    pub aggregate: Aggregate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `wilcoxon-signed-rank`, `mann-whitney-u` or `not applicable`.
    pub test: String,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub method: Option<PValueMethod>,
    pub note: String,
}

impl Comparison {
    fn not_applicable(note: &str) -> Self {
        Self { test: "not applicable".into(), statistic: None, p_value: None, method: None, note: note.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub problem: ProblemKind,
    pub protocol: Protocol,
    pub scenario: Option<u8>,
    pub budget: usize,
    pub bin_width: usize,
    pub paired: bool,
    pub algorithms: Vec<AlgoStats>,
    pub first_hit_test: Comparison,
}

impl Report {
    pub fn algo(&self, algo: Algo) -> Option<&Aggregate> {
        self.algorithms.iter().find(|a| a.algo == algo).map(|a| &a.aggregate)
    }
}

const FAILURE_NOTE: &str = "first-hit steps; runs without a hit rank after every hit";

/// Builds a report. Runs of two algorithms that pair up one-to-one by pair
/// index get a Wilcoxon signed-rank test, otherwise a Mann-Whitney U test.
pub fn build_report(records: &[RunRecord], bin_width: usize) -> Result<Report> {
    let Some(first) = records.first() else {
        return Err(HarnessError::Invalid("no runs to report".into()));
    };
    if let Some(r) = records.iter().find(|r| {
        (r.problem, r.protocol, r.scenario, r.budget) != (first.problem, first.protocol, first.scenario, first.budget)
    }) {
        return Err(HarnessError::Invalid(format!(
            "runs mix experiments: {:?}/{:?}/{:?}/{} vs {:?}/{:?}/{:?}/{}",
            first.problem, first.protocol, first.scenario, first.budget, r.problem, r.protocol, r.scenario, r.budget
        )));
    }

    let mut by_algo: BTreeMap<Algo, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_algo.entry(r.algo).or_default().push(r);
    }
    let algorithms = by_algo
        .iter()
        .map(|(&algo, runs)| {
            let summaries: Vec<RunSummary> = runs.iter().map(|r| r.summary).collect();
            AlgoStats { algo, aggregate: summarize(&summaries, first.budget, bin_width) }
        })
        .collect();

    let groups: Vec<&Vec<&RunRecord>> = by_algo.values().collect();
    let (paired, first_hit_test) = match groups.as_slice() {
        [a, b] => match pair_up(a, b) {
            Some(pairs) => {
                let r = wilcoxon_signed_rank(&pairs);
                let comparison = Comparison {
                    test: "wilcoxon-signed-rank".into(),
                    statistic: Some(r.statistic),
                    p_value: Some(r.p_value),
                    method: Some(r.method),
                    note: FAILURE_NOTE.into(),
                };
                (true, comparison)
            }
            None => {
                let xs: Vec<f64> = a.iter().map(|r| r.ranked_first_hit()).collect();
                let ys: Vec<f64> = b.iter().map(|r| r.ranked_first_hit()).collect();
                let r = mann_whitney_u(&xs, &ys);
                let comparison = Comparison {
                    test: "mann-whitney-u".into(),
                    statistic: Some(r.u_a.min(r.u_b)),
                    p_value: Some(r.p_value),
                    method: Some(r.method),
                    note: FAILURE_NOTE.into(),
                };
                (false, comparison)
            }
        },
        [_] => (false, Comparison::not_applicable("a single algorithm")),
        _ => (false, Comparison::not_applicable("more than two algorithms")),
    };

    Ok(Report {
        problem: first.problem,
        protocol: first.protocol,
        scenario: first.scenario,
        budget: first.budget,
        bin_width,
        paired,
        algorithms,
        first_hit_test,
    })
}

/// Matches runs by pair index; `None` unless every index appears exactly
/// once on each side.
fn pair_up(a: &[&RunRecord], b: &[&RunRecord]) -> Option<Vec<(f64, f64)>> {
    let index = |runs: &[&RunRecord]| -> Option<BTreeMap<usize, f64>> {
        let mut m = BTreeMap::new();
        for r in runs {
            if m.insert(r.pair?, r.ranked_first_hit()).is_some() {
                return None;
            }
        }
        Some(m)
    };
    let (ma, mb) = (index(a)?, index(b)?);
    if ma.len() != mb.len() || !ma.keys().eq(mb.keys()) {
        return None;
    }
    Some(ma.values().copied().zip(mb.values().copied()).collect())
}

/// Where the histogram CSV goes for a report written to `json_path`.
pub fn histogram_path(json_path: &Path) -> PathBuf {
    let stem = json_path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    json_path.with_file_name(format!("{stem}-histogram.csv"))
}

/// Writes the report JSON to `json_path` and the first-hit histogram next
/// to it.
pub fn write_report(report: &Report, json_path: &Path) -> Result<PathBuf> {
    let text = serde_json::to_string_pretty(report).map_err(|e| HarnessError::json(json_path, e))?;
    std::fs::write(json_path, text + "\n").map_err(|e| HarnessError::io(json_path, e))?;

    let csv_path = histogram_path(json_path);
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| HarnessError::csv(&csv_path, e))?;
    let write = |w: &mut csv::Writer<std::fs::File>| -> std::result::Result<(), csv::Error> {
        w.write_record(["algo", "low", "high", "count"])?;
        for a in &report.algorithms {
            for bin in &a.aggregate.histogram {
                w.write_record([a.algo.name(), &bin.low.to_string(), &bin.high.to_string(), &bin.count.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w).map_err(|e| HarnessError::csv(&csv_path, e))?;
    Ok(csv_path)
}
