use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ccmab_harness::output::{read_records, write_run};
use ccmab_harness::report::{build_report, write_report, RunRecord, DEFAULT_BIN_WIDTH};
use ccmab_harness::{batch_paired, parse_config, run_experiment, ExperimentConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ccmab", version, about = "Cooperative coevolution with a bandit species scheduler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and print its summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Directory for the config echo, step log and summary.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run paired experiments; pair k shares its problem instance.
    Batch {
        #[arg(long)]
        config_a: PathBuf,
        #[arg(long)]
        config_b: PathBuf,
        #[arg(long)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
        bin_width: usize,
    },
    /// Rebuild a report from the run directories below a batch output.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
        bin_width: usize,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out } => {
            let config = load(&config)?;
            let outcome = run_experiment(&config)?;
            if let Some(dir) = out {
                write_run(&dir, &outcome, None)?;
            }
            println!("{}", serde_json::to_string_pretty(&RunRecord::new(&outcome, None))?);
        }
        Command::Batch { config_a, config_b, runs, seed, out, threads, bin_width } => {
            let a = load(&config_a)?;
            let b = load(&config_b)?;
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build()?;
            let pairs = pool.install(|| batch_paired(&a, &b, runs, seed))?;
            let mut records = Vec::with_capacity(2 * pairs.len());
            for pair in &pairs {
                for outcome in [&pair.a, &pair.b] {
                    let dir = out.join("runs").join(format!("pair-{:04}-{}", pair.index, outcome.config.algo.name()));
                    write_run(&dir, outcome, Some(pair.index))?;
                    records.push(RunRecord::new(outcome, Some(pair.index)));
                }
            }
            let report = build_report(&records, bin_width)?;
            let path = out.join("report.json");
            write_report(&report, &path)?;
            print_report(&report);
            println!("report written to {}", path.display());
        }
        Command::Report { input, out, bin_width } => {
            let records = read_records(&input)?;
            let report = build_report(&records, bin_width)?;
            write_report(&report, &out)?;
            print_report(&report);
        }
    }
    Ok(())
}

fn print_report(report: &ccmab_harness::Report) {
    for a in &report.algorithms {
        let g = &a.aggregate;
        println!(
            "{:<9} runs {:>4}  success {:>6.1}%  mean first hit {:>7}  median {:>7}  mean species {:>5}",
            a.algo.name(),
            g.runs,
            100.0 * g.success_rate,
            fmt_opt(g.mean_first_hit),
            fmt_opt(g.median_first_hit),
            fmt_opt(g.mean_final_species),
        );
    }
    let t = &report.first_hit_test;
    match t.p_value {
        Some(p) => println!("{}: p = {p:.4}", t.test),
        None => println!("statistical test: {} ({})", t.test, t.note),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.1}")).unwrap_or_else(|| "-".into())
}
