//! Paired batches: pair `k` shares a problem instance across algorithms.

use ccmab_core::rng::mix_seed;
use rayon::prelude::*;

use crate::config::{Algo, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::experiment::{run_experiment, RunOutcome};

/// Seeds of pair `k`: the shared instance seed, then one run seed per algorithm.
pub fn pair_seeds(seed0: u64, k: usize, algo: Algo) -> (u64, u64) {
    let scenario_seed = mix_seed(seed0, k as u64);
    (scenario_seed, mix_seed(scenario_seed, algo.tag()))
}

#[derive(Clone, Debug)]
pub struct Pair {
    pub index: usize,
    pub scenario_seed: u64,
    pub a: RunOutcome,
    pub b: RunOutcome,
}

/// Runs `n_runs` pairs of `a` and `b`, which must differ only in `algo`.
///
/// Runs execute on the current rayon pool; results come back in pair order
/// and do not depend on the pool size.
pub fn batch_paired(a: &ExperimentConfig, b: &ExperimentConfig, n_runs: usize, seed0: u64) -> Result<Vec<Pair>> {
    if a.with_run(Algo::Ccea, 0, 0) != b.with_run(Algo::Ccea, 0, 0) {
        return Err(HarnessError::Invalid("paired configs may differ only in algo".into()));
    }
    a.validate()?;

    let jobs: Vec<ExperimentConfig> = (0..n_runs)
        .flat_map(|k| {
            [a, b].map(|c| {
                let (scenario_seed, run_seed) = pair_seeds(seed0, k, c.algo);
                c.with_run(c.algo, scenario_seed, run_seed)
            })
        })
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(run_experiment)
        .collect::<Result<Vec<_>>>()?;

    let mut it = outcomes.into_iter();
    let mut pairs = Vec::with_capacity(n_runs);
    for index in 0..n_runs {
        let (Some(a), Some(b)) = (it.next(), it.next()) else {
            unreachable!("two outcomes per pair");
        };
        pairs.push(Pair { index, scenario_seed: a.config.scenario_seed, a, b });
    }
    Ok(pairs)
}
