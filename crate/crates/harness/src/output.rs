//! Run directories: resolved config, instance, summary, step log and layout.
//!
//! ```text
//! <dir>/config.txt     resolved configuration, parseable
//! <dir>/instance.json  schemata and targets, or the environment
//! <dir>/summary.json   a RunRecord
//! <dir>/steps.csv      one row per step
//! <dir>/layout.csv     final sensors (sensor runs only)
//! ```

use std::fmt::Display;
use std::fs::File;
use std::path::{Path, PathBuf};

use ccmab_core::coevolution::{StepRecord, StructuralEvent};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiment::{RunOutcome, Trace};
use crate::report::RunRecord;

pub const SUMMARY_FILE: &str = "summary.json";
pub const STEPS_FILE: &str = "steps.csv";

const STEP_HEADER: [&str; 9] = [
    "step",
    "evaluations",
    "species",
    "chosen",
    "rewards",
    "collaboration_fitness",
    "contributions",
    "event",
    "representatives",
];

fn join<T: Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn event_text(event: &StructuralEvent) -> String {
    match event {
        StructuralEvent::None => "none".into(),
        StructuralEvent::Added(id) => format!("add:{id}"),
        StructuralEvent::Replaced { removed, added } => format!("remove:{} add:{added}", join(removed)),
    }
}

fn step_row<G: Display>(r: &StepRecord<G>) -> [String; 9] {
    [
        r.step.to_string(),
        r.evaluations.to_string(),
        join(&r.species),
        join(&r.chosen),
        join(&r.rewards),
        r.collaboration_fitness.to_string(),
        join(&r.contributions),
        event_text(&r.event),
        join(&r.representatives),
    ]
}

fn write_rows<G: Display>(path: &Path, records: &[StepRecord<G>]) -> Result<()> {
    let run = || -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(STEP_HEADER)?;
        for r in records {
            w.write_record(step_row(r))?;
        }
        w.flush()?;
        Ok(())
    };
    run().map_err(|e| HarnessError::csv(path, e))
}

/// Writes the per-step log of a trace as CSV.
pub fn write_steps(path: &Path, trace: &Trace) -> Result<()> {
    match trace {
        Trace::Bits(log) => write_rows(path, &log.records),
        Trace::Real(log) => write_rows(path, &log.records),
    }
}

/// One parsed row of a step log. Genomes stay in their printed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub step: usize,
    pub evaluations: u64,
    pub species: String,
    pub chosen: String,
    pub rewards: String,
    pub collaboration_fitness: f64,
    pub contributions: String,
    pub event: String,
    pub representatives: String,
}

impl StepRow {
    pub fn representatives(&self) -> Vec<&str> {
        self.representatives.split(';').collect()
    }
}

pub fn read_steps(path: &Path) -> Result<Vec<StepRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<StepRow>, _>>()
        .map_err(|e| HarnessError::csv(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::json(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
}

/// Writes `x,y,theta` rows for the final sensors of a run.
pub fn write_layout(path: &Path, outcome: &RunOutcome) -> Result<()> {
    let run = || -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::<File>::from_path(path)?;
        w.write_record(["x", "y", "theta"])?;
        for s in outcome.layout() {
            w.write_record([s.x.to_string(), s.y.to_string(), s.theta.to_string()])?;
        }
        w.flush()?;
        Ok(())
    };
    run().map_err(|e| HarnessError::csv(path, e))
}

/// Writes a complete run directory.
pub fn write_run(dir: &Path, outcome: &RunOutcome, pair: Option<usize>) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let config = dir.join("config.txt");
    std::fs::write(&config, outcome.config.to_text()).map_err(|e| HarnessError::io(&config, e))?;
    write_json(&dir.join("instance.json"), &outcome.instance)?;
    write_json(&dir.join(SUMMARY_FILE), &RunRecord::new(outcome, pair))?;
    write_steps(&dir.join(STEPS_FILE), &outcome.trace)?;
    if let Trace::Real(_) = outcome.trace {
        write_layout(&dir.join("layout.csv"), outcome)?;
    }
    Ok(())
}

/// Collects every run summary below `root`, in path order.
pub fn read_records(root: &Path) -> Result<Vec<RunRecord>> {
    let mut paths = Vec::new();
    find_summaries(root, &mut paths)?;
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| HarnessError::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| HarnessError::json(p, e))
        })
        .collect()
}

fn find_summaries(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| HarnessError::io(dir, e))?.path();
        if path.is_dir() {
            find_summaries(&path, out)?;
        } else if path.file_name().is_some_and(|n| n == SUMMARY_FILE) {
            out.push(path);
        }
    }
    Ok(())
}
