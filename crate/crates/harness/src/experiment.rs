//! Single runs: build the problem from a config and drive the coevolution.

use ccmab_core::coevolution::{run, RunLog, StepObserver, StepRecord};
use ccmab_core::genome::BitGenome;
use ccmab_core::operators::{BitVariation, RealVariation};
use ccmab_core::scheduler::{BanditScheduler, RoundRobin, Scheduler, Synchronous};
use ccmab_core::sensor::{SensorGenome, SensorPlacement};
use ccmab_core::stats::RunSummary;
use ccmab_core::string_cover::StringCover;
use ccmab_core::{RealGenome, RngStream};
use serde::{Deserialize, Serialize};

use crate::config::{Algo, CceaSchedule, ExperimentConfig, ProblemKind};
use crate::error::Result;

/// The problem instance a run was solved on, in printable form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum Instance {
    StringCover { schemata: Vec<String>, targets: Vec<String>, origin: Vec<usize> },
    Sensor { radius: f64, samples: usize, fov: f64, epsilon: f64 },
}

#[derive(Clone, Debug)]
pub enum Trace {
    Bits(RunLog<BitGenome>),
    Real(RunLog<RealGenome>),
}

impl Trace {
    pub fn first_hit_step(&self) -> Option<usize> {
        match self {
            Trace::Bits(log) => log.first_hit_step,
            Trace::Real(log) => log.first_hit_step,
        }
    }

    pub fn steps(&self) -> usize {
        match self {
            Trace::Bits(log) => log.records.len(),
            Trace::Real(log) => log.records.len(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub instance: Instance,
    pub trace: Trace,
    pub summary: RunSummary,
}

impl RunOutcome {
    /// Final sensor layout; empty for string covering.
    pub fn layout(&self) -> Vec<SensorGenome> {
        match &self.trace {
            Trace::Real(log) => log.final_representatives.iter().map(SensorGenome::from_real).collect(),
            Trace::Bits(_) => Vec::new(),
        }
    }
}

fn scheduler(config: &ExperimentConfig) -> Result<Box<dyn Scheduler + Send>> {
    Ok(match (config.algo, config.ccea_schedule) {
        (Algo::Ccea, CceaSchedule::RoundRobin) => Box::new(RoundRobin::default()),
        (Algo::Ccea, CceaSchedule::Synchronous) => Box::new(Synchronous),
        (Algo::CceaMab, _) => Box::new(BanditScheduler::new(config.bandit_params())?),
    })
}

/// Runs one experiment. The problem instance comes from `scenario_seed`,
/// every evolutionary draw from `run_seed`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    run_observed(config, &mut (), &mut ())
}

/// As [`run_experiment`], reporting each step to the observer matching the
/// problem's genome type.
pub fn run_observed<B, R>(config: &ExperimentConfig, bits: &mut B, real: &mut R) -> Result<RunOutcome>
where
    B: StepObserver<BitGenome> + ?Sized,
    R: StepObserver<RealGenome> + ?Sized,
{
    config.validate()?;
    let params = config.coev_params();
    let mut sched = scheduler(config)?;
    let mut rng = RngStream::new(config.run_seed);

    let (instance, trace) = match config.problem {
        ProblemKind::StringCover => {
            let mut scenario_rng = RngStream::new(config.scenario_seed);
            let problem = StringCover::scenario(config.scenario, &mut scenario_rng)?;
            let variation = BitVariation { flip_rate: config.flip_rate };
            let log = run(&problem, &variation, &params, sched.as_mut(), &mut rng, bits)?;
            let instance = Instance::StringCover {
                schemata: problem.schemata().iter().map(|s| s.to_string()).collect(),
                targets: problem.targets().strings().iter().map(|t| t.to_string()).collect(),
                origin: problem.targets().origin().to_vec(),
            };
            (instance, Trace::Bits(log))
        }
        ProblemKind::Sensor => {
            let env = config.environment()?;
            let instance = Instance::Sensor {
                radius: env.radius(),
                samples: env.samples(),
                fov: env.fov(),
                epsilon: env.epsilon(),
            };
            let problem = SensorPlacement::new(env);
            let variation = RealVariation {
                eta: config.sbx_eta,
                sigma: vec![config.sigma_position, config.sigma_position, config.sigma_heading],
                dim_rate: config.mutation_dim_rate,
            };
            let log = run(&problem, &variation, &params, sched.as_mut(), &mut rng, real)?;
            (instance, Trace::Real(log))
        }
    };

    let summary = match &trace {
        Trace::Bits(log) => summarize_log(log, config.run_seed),
        Trace::Real(log) => summarize_log(log, config.run_seed),
    };
    Ok(RunOutcome { config: config.clone(), instance, trace, summary })
}

fn summarize_log<G>(log: &RunLog<G>, seed: u64) -> RunSummary {
    RunSummary::new(log.first_hit_step, log.evaluations, log.final_species, seed)
}

/// Collaboration fitness history of a trace.
pub fn fitness_history(trace: &Trace) -> Vec<f64> {
    fn collect<G>(records: &[StepRecord<G>]) -> Vec<f64> {
        records.iter().map(|r| r.collaboration_fitness).collect()
    }
    match trace {
        Trace::Bits(log) => collect(&log.records),
        Trace::Real(log) => collect(&log.records),
    }
}
