//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ccmab_core::bandit::BanditParams;
use ccmab_core::coevolution::{CoevParams, Lifecycle};
use ccmab_core::sensor::EnvironmentModel;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algo {
    #[serde(rename = "ccea")]
    Ccea,
    #[serde(rename = "ccea-mab")]
    CceaMab,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Ccea => "ccea",
            Algo::CceaMab => "ccea-mab",
        }
    }

    /// Stable tag mixed into per-run seeds.
    pub fn tag(self) -> u64 {
        match self {
            Algo::Ccea => 0x6363_6561,
            Algo::CceaMab => 0x6d61_6221,
        }
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ccea" => Ok(Algo::Ccea),
            "ccea-mab" => Ok(Algo::CceaMab),
            _ => Err(format!("expected `ccea` or `ccea-mab`, got `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    #[serde(rename = "string-cover")]
    StringCover,
    #[serde(rename = "sensor")]
    Sensor,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::StringCover => "string-cover",
            ProblemKind::Sensor => "sensor",
        }
    }
}

impl FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "string-cover" => Ok(ProblemKind::StringCover),
            "sensor" => Ok(ProblemKind::Sensor),
            _ => Err(format!("expected `string-cover` or `sensor`, got `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    /// Species added on a fixed schedule, never removed.
    #[serde(rename = "adaptation")]
    Adaptation,
    /// Stagnation-driven extinction and addition.
    #[serde(rename = "open-ended")]
    OpenEnded,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Adaptation => "adaptation",
            Protocol::OpenEnded => "open-ended",
        }
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "adaptation" => Ok(Protocol::Adaptation),
            "open-ended" => Ok(Protocol::OpenEnded),
            _ => Err(format!("expected `adaptation` or `open-ended`, got `{s}`")),
        }
    }
}

/// How the plain CCEA visits its species.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CceaSchedule {
    /// One species per step, in turn.
    #[serde(rename = "round-robin")]
    RoundRobin,
    /// Every species at every step.
    #[serde(rename = "synchronous")]
    Synchronous,
}

impl CceaSchedule {
    pub fn name(self) -> &'static str {
        match self {
            CceaSchedule::RoundRobin => "round-robin",
            CceaSchedule::Synchronous => "synchronous",
        }
    }
}

impl FromStr for CceaSchedule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "round-robin" => Ok(CceaSchedule::RoundRobin),
            "synchronous" => Ok(CceaSchedule::Synchronous),
            _ => Err(format!("expected `round-robin` or `synchronous`, got `{s}`")),
        }
    }
}

/// A fully resolved experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algo: Algo,
    pub problem: ProblemKind,
    /// String covering scenario, 1 to 3.
    pub scenario: u8,
    pub protocol: Protocol,
    pub add_interval: usize,
    /// Step budget; `None` means the protocol default (see [`Self::budget`]).
    pub max_steps: Option<usize>,
    pub scenario_seed: u64,
    pub run_seed: u64,
    /// Ignored by `ccea-mab`.
    pub ccea_schedule: CceaSchedule,

    pub species_size: usize,
    pub initial_species: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub improvement_length: usize,
    pub improvement_threshold: f64,
    pub extinction_threshold: f64,

    pub flip_rate: f64,

    pub window_size: usize,
    pub decay: f64,
    pub exploration: f64,

    pub radius: f64,
    pub samples: usize,
    pub fov: f64,
    pub epsilon: f64,
    pub sbx_eta: f64,
    pub sigma_position: f64,
    pub sigma_heading: f64,
    pub mutation_dim_rate: f64,
}

/// Defaults for the sensor problem, whose error scale differs from the
/// string covering fitness.
pub mod sensor_defaults {
    pub const IMPROVEMENT_THRESHOLD: f64 = 0.05;
    pub const EXTINCTION_THRESHOLD: f64 = 0.1;
    pub const MAX_STEPS: usize = 1000;
    pub const SBX_ETA: f64 = 10.0;
    pub const SIGMA_POSITION: f64 = 0.5;
    pub const SIGMA_HEADING: f64 = 0.1;
    pub const MUTATION_DIM_RATE: f64 = 1.0 / 3.0;
}

pub const STRING_COVER_MAX_STEPS: usize = 500;

impl ExperimentConfig {
    /// Table 1 settings, with problem-specific values where the table does
    /// not apply.
    pub fn defaults(algo: Algo, problem: ProblemKind) -> Self {
        let coev = CoevParams::default();
        let bandit = BanditParams::default();
        let env = EnvironmentModel::default();
        let mut c = Self {
            algo,
            problem,
            scenario: 1,
            protocol: Protocol::OpenEnded,
            add_interval: 100,
            max_steps: None,
            scenario_seed: 0,
            run_seed: 0,
            ccea_schedule: CceaSchedule::RoundRobin,
            species_size: coev.species_size,
            initial_species: coev.initial_species,
            crossover_rate: coev.crossover_rate,
            mutation_rate: coev.mutation_rate,
            tournament_size: coev.tournament_size,
            improvement_length: coev.improvement_length,
            improvement_threshold: coev.improvement_threshold,
            extinction_threshold: coev.extinction_threshold,
            flip_rate: 1.0 / 64.0,
            window_size: bandit.window_size,
            decay: bandit.decay,
            exploration: bandit.exploration,
            radius: env.radius(),
            samples: env.samples(),
            fov: env.fov(),
            epsilon: env.epsilon(),
            sbx_eta: sensor_defaults::SBX_ETA,
            sigma_position: sensor_defaults::SIGMA_POSITION,
            sigma_heading: sensor_defaults::SIGMA_HEADING,
            mutation_dim_rate: sensor_defaults::MUTATION_DIM_RATE,
        };
        if problem == ProblemKind::Sensor {
            c.improvement_threshold = sensor_defaults::IMPROVEMENT_THRESHOLD;
            c.extinction_threshold = sensor_defaults::EXTINCTION_THRESHOLD;
        }
        c
    }

    /// Number of generating schemata for the configured scenario.
    pub fn schema_count(&self) -> usize {
        if self.scenario == 1 {
            3
        } else {
            5
        }
    }

    /// The step budget: explicit `max_steps`, else `add_interval` per schema
    /// for the adaptation protocol, else the problem default.
    pub fn budget(&self) -> usize {
        self.max_steps.unwrap_or(match (self.problem, self.protocol) {
            (ProblemKind::Sensor, _) => sensor_defaults::MAX_STEPS,
            (ProblemKind::StringCover, Protocol::Adaptation) => self.add_interval * self.schema_count(),
            (ProblemKind::StringCover, Protocol::OpenEnded) => STRING_COVER_MAX_STEPS,
        })
    }

    pub fn coev_params(&self) -> CoevParams {
        let lifecycle = match self.protocol {
            Protocol::OpenEnded => Lifecycle::OpenEnded,
            Protocol::Adaptation => Lifecycle::Scheduled {
                add_interval: self.add_interval,
                max_species: self.schema_count(),
            },
        };
        CoevParams {
            species_size: self.species_size,
            initial_species: self.initial_species,
            crossover_rate: self.crossover_rate,
            mutation_rate: self.mutation_rate,
            tournament_size: self.tournament_size,
            improvement_length: self.improvement_length,
            improvement_threshold: self.improvement_threshold,
            extinction_threshold: self.extinction_threshold,
            max_steps: self.budget(),
            lifecycle,
        }
    }

    pub fn bandit_params(&self) -> BanditParams {
        BanditParams {
            window_size: self.window_size,
            exploration: self.exploration,
            decay: self.decay,
        }
    }

    pub fn environment(&self) -> Result<EnvironmentModel> {
        Ok(EnvironmentModel::new(self.radius, self.samples, self.fov, self.epsilon)?)
    }

    /// Checks combinations that single-key range checks cannot see.
    pub fn validate(&self) -> Result<()> {
        if self.problem == ProblemKind::Sensor && self.protocol == Protocol::Adaptation {
            return Err(HarnessError::Invalid(
                "the adaptation protocol needs schemata; use open-ended for sensor".into(),
            ));
        }
        if !(1..=3).contains(&self.scenario) {
            return Err(HarnessError::Invalid(format!("scenario {} outside 1..=3", self.scenario)));
        }
        self.coev_params().validate()?;
        ccmab_core::bandit::BanditState::new(self.bandit_params())?;
        if self.problem == ProblemKind::Sensor {
            self.environment()?;
        }
        Ok(())
    }

    /// Same settings with another algorithm and seeds.
    pub fn with_run(&self, algo: Algo, scenario_seed: u64, run_seed: u64) -> Self {
        Self { algo, scenario_seed, run_seed, ..self.clone() }
    }

    /// Renders every setting, resolved, in the parseable format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            out.push_str(&format!("{} = {}\n", key.name, self.get(key.name)));
        }
        out
    }

    fn get(&self, key: &str) -> String {
        match key {
            "algo" => self.algo.name().into(),
            "problem" => self.problem.name().into(),
            "scenario" => self.scenario.to_string(),
            "protocol" => self.protocol.name().into(),
            "add_interval" => self.add_interval.to_string(),
            "max_steps" => self.budget().to_string(),
            "scenario_seed" => self.scenario_seed.to_string(),
            "run_seed" => self.run_seed.to_string(),
            "ccea_schedule" => self.ccea_schedule.name().into(),
            "species_size" => self.species_size.to_string(),
            "initial_species" => self.initial_species.to_string(),
            "crossover_rate" => self.crossover_rate.to_string(),
            "mutation_rate" => self.mutation_rate.to_string(),
            "tournament_size" => self.tournament_size.to_string(),
            "improvement_length" => self.improvement_length.to_string(),
            "improvement_threshold" => self.improvement_threshold.to_string(),
            "extinction_threshold" => self.extinction_threshold.to_string(),
            "flip_rate" => self.flip_rate.to_string(),
            "window_size" => self.window_size.to_string(),
            "decay" => self.decay.to_string(),
            "exploration" => self.exploration.to_string(),
            "radius" => self.radius.to_string(),
            "samples" => self.samples.to_string(),
            "fov" => self.fov.to_string(),
            "epsilon" => self.epsilon.to_string(),
            "sbx_eta" => self.sbx_eta.to_string(),
            "sigma_position" => self.sigma_position.to_string(),
            "sigma_heading" => self.sigma_heading.to_string(),
            "mutation_dim_rate" => self.mutation_dim_rate.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "algo" => self.algo = value.parse()?,
            "problem" => self.problem = value.parse()?,
            "scenario" => self.scenario = ranged(value, 1..=3)?,
            "protocol" => self.protocol = value.parse()?,
            "add_interval" => self.add_interval = ranged(value, 1..=usize::MAX)?,
            "max_steps" => self.max_steps = Some(ranged(value, 0..=usize::MAX)?),
            "scenario_seed" => self.scenario_seed = number(value)?,
            "run_seed" => self.run_seed = number(value)?,
            "ccea_schedule" => self.ccea_schedule = value.parse()?,
            "species_size" => self.species_size = ranged(value, 2..=usize::MAX)?,
            "initial_species" => self.initial_species = ranged(value, 1..=usize::MAX)?,
            "crossover_rate" => self.crossover_rate = probability(value)?,
            "mutation_rate" => self.mutation_rate = probability(value)?,
            "tournament_size" => self.tournament_size = ranged(value, 1..=usize::MAX)?,
            "improvement_length" => self.improvement_length = ranged(value, 1..=usize::MAX)?,
            "improvement_threshold" => self.improvement_threshold = non_negative(value)?,
            "extinction_threshold" => self.extinction_threshold = non_negative(value)?,
            "flip_rate" => self.flip_rate = probability(value)?,
            "window_size" => self.window_size = ranged(value, 1..=usize::MAX)?,
            "decay" => self.decay = probability(value)?,
            "exploration" => self.exploration = non_negative(value)?,
            "radius" => self.radius = positive(value)?,
            "samples" => self.samples = ranged(value, 8..=usize::MAX)?,
            "fov" => {
                let v = positive(value)?;
                if v > std::f64::consts::TAU {
                    return Err(format!("{v} exceeds 2*pi"));
                }
                self.fov = v;
            }
            "epsilon" => self.epsilon = positive(value)?,
            "sbx_eta" => self.sbx_eta = positive(value)?,
            "sigma_position" => self.sigma_position = non_negative(value)?,
            "sigma_heading" => self.sigma_heading = non_negative(value)?,
            "mutation_dim_rate" => self.mutation_dim_rate = probability(value)?,
            _ => unreachable!("unknown key {key}"),
        }
        Ok(())
    }
}

struct Key {
    name: &'static str,
    aliases: &'static [&'static str],
}

const fn key(name: &'static str) -> Key {
    Key { name, aliases: &[] }
}

const KEYS: &[Key] = &[
    key("algo"),
    key("problem"),
    key("scenario"),
    key("protocol"),
    key("add_interval"),
    key("max_steps"),
    key("scenario_seed"),
    key("run_seed"),
    key("ccea_schedule"),
    key("species_size"),
    key("initial_species"),
    key("crossover_rate"),
    key("mutation_rate"),
    key("tournament_size"),
    Key { name: "improvement_length", aliases: &["I"] },
    Key { name: "improvement_threshold", aliases: &["T_i"] },
    Key { name: "extinction_threshold", aliases: &["T_c"] },
    key("flip_rate"),
    Key { name: "window_size", aliases: &["W"] },
    Key { name: "decay", aliases: &["d"] },
    Key { name: "exploration", aliases: &["C"] },
    key("radius"),
    key("samples"),
    key("fov"),
    key("epsilon"),
    key("sbx_eta"),
    key("sigma_position"),
    key("sigma_heading"),
    key("mutation_dim_rate"),
];

fn canonical(name: &str) -> Option<&'static str> {
    KEYS.iter()
        .find(|k| k.name == name || k.aliases.contains(&name))
        .map(|k| k.name)
}

fn number<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("cannot parse `{value}`: {e}"))
}

fn ranged<T>(value: &str, range: std::ops::RangeInclusive<T>) -> std::result::Result<T, String>
where
    T: FromStr + PartialOrd + fmt::Display,
    T::Err: fmt::Display,
{
    // Negative input to an unsigned key should read as a range error.
    if value.starts_with('-') {
        return Err(format!("{value} is below the minimum {}", range.start()));
    }
    let v: T = number(value)?;
    if !range.contains(&v) {
        return Err(format!("{v} outside [{}, {}]", range.start(), range.end()));
    }
    Ok(v)
}

fn finite(value: &str) -> std::result::Result<f64, String> {
    let v: f64 = number(value)?;
    if !v.is_finite() {
        return Err(format!("{value} is not finite"));
    }
    Ok(v)
}

fn probability(value: &str) -> std::result::Result<f64, String> {
    let v = finite(value)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(format!("{v} outside [0, 1]"));
    }
    Ok(v)
}

fn non_negative(value: &str) -> std::result::Result<f64, String> {
    let v = finite(value)?;
    if v < 0.0 {
        return Err(format!("{v} is negative"));
    }
    Ok(v)
}

fn positive(value: &str) -> std::result::Result<f64, String> {
    let v = finite(value)?;
    if v <= 0.0 {
        return Err(format!("{v} must be positive"));
    }
    Ok(v)
}

/// Parses a configuration document.
///
/// Lines are `key = value`; `#` starts a comment. `algo` and `problem` are
/// required, every other key defaults. Keys may appear at most once.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut entries: BTreeMap<&'static str, (usize, String)> = BTreeMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(HarnessError::Malformed { line, text: raw.trim().into() });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(HarnessError::Malformed { line, text: raw.trim().into() });
        }
        let Some(name) = canonical(k) else {
            return Err(HarnessError::Config { line, key: k.into(), message: "unknown key".into() });
        };
        if let Some((first, _)) = entries.get(name) {
            return Err(HarnessError::Config {
                line,
                key: k.into(),
                message: format!("duplicate of line {first}"),
            });
        }
        entries.insert(name, (line, v.into()));
    }

    let missing: Vec<String> = ["algo", "problem"]
        .iter()
        .filter(|k| !entries.contains_key(*k))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(HarnessError::MissingKeys(missing));
    }

    let field = |name: &str| -> Result<(usize, &str)> {
        let (line, v) = &entries[name];
        Ok((*line, v.as_str()))
    };
    let (algo_line, algo) = field("algo")?;
    let algo: Algo = algo.parse().map_err(|message| HarnessError::Config {
        line: algo_line,
        key: "algo".into(),
        message,
    })?;
    let (problem_line, problem) = field("problem")?;
    let problem: ProblemKind = problem.parse().map_err(|message| HarnessError::Config {
        line: problem_line,
        key: "problem".into(),
        message,
    })?;

    let mut config = ExperimentConfig::defaults(algo, problem);
    for (name, (line, value)) in &entries {
        config
            .set(name, value)
            .map_err(|message| HarnessError::Config { line: *line, key: name.to_string(), message })?;
    }
    if problem == ProblemKind::Sensor {
        if let Some((line, _)) = entries.get("scenario") {
            return Err(HarnessError::Config {
                line: *line,
                key: "scenario".into(),
                message: "only applies to string-cover".into(),
            });
        }
    }
    config.validate()?;
    Ok(config)
}
