//! The cooperative coevolution loop.
//!
//! An [`Ecosystem`] holds species (each a fixed-size population) and one
//! representative per species. Individuals of species `i` are evaluated
//! together with the representatives of every other species. At each step a
//! [`Scheduler`] decides which species evolve for one generation; the
//! stepped species then elect their best individual as new representative.
//! When the collaboration fitness stagnates, species contributing less than
//! the extinction threshold are removed (newest first, contributions
//! recomputed after each removal) and one fresh species is added.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::IndexedRandom;

use crate::bandit::binary_reward;
use crate::error::{illegal, invalid, Result};
use crate::genome::{Individual, Sense};
use crate::operators::{tournament_select, vary, Variation};
use crate::rng::RngStream;
use crate::scheduler::Scheduler;

pub type SpeciesId = u64;

/// An optimization problem split into cooperating components.
pub trait Problem {
    type Genome: Clone + PartialEq + fmt::Debug;

    fn sense(&self) -> Sense;

    fn random_genome(&self, rng: &mut RngStream) -> Self::Genome;

    /// Brings a genome produced by variation back into the feasible set.
    fn repair(&self, _genome: &mut Self::Genome) {}

    /// Fitness of `genome` completed by the other species' representatives.
    fn individual_fitness(&self, genome: &Self::Genome, partners: &[Self::Genome]) -> f64;

    /// Fitness of many genomes against the same partners.
    fn evaluate_batch(&self, genomes: &[Self::Genome], partners: &[Self::Genome]) -> Vec<f64> {
        genomes.iter().map(|g| self.individual_fitness(g, partners)).collect()
    }

    /// Objective value of the complete solution formed by the representatives.
    fn collaboration_fitness(&self, representatives: &[Self::Genome]) -> f64;

    /// Marginal value of representative `index` to the collaboration.
    fn contribution(&self, index: usize, representatives: &[Self::Genome]) -> f64;

    /// Whether the representatives solve the problem.
    fn perfect(&self, representatives: &[Self::Genome]) -> bool;
}

/// How species enter and leave the ecosystem.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Lifecycle {
    /// Stagnation triggers extinction of weak species and one addition.
    OpenEnded,
    /// One species is added every `add_interval` steps until `max_species`
    /// are present; nothing is ever removed.
    Scheduled { add_interval: usize, max_species: usize },
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoevParams {
    pub species_size: usize,
    pub initial_species: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub improvement_length: usize,
    pub improvement_threshold: f64,
    pub extinction_threshold: f64,
    pub max_steps: usize,
    pub lifecycle: Lifecycle,
}

impl Default for CoevParams {
    fn default() -> Self {
        Self {
            species_size: 50,
            initial_species: 1,
            crossover_rate: 0.6,
            mutation_rate: 1.0,
            tournament_size: 3,
            improvement_length: 5,
            improvement_threshold: 0.5,
            extinction_threshold: 5.0,
            max_steps: 500,
            lifecycle: Lifecycle::OpenEnded,
        }
    }
}

impl CoevParams {
    pub fn validate(&self) -> Result<()> {
        if self.species_size < 2 {
            return Err(invalid!("species size must be at least 2"));
        }
        if self.initial_species < 1 {
            return Err(invalid!("at least one initial species is required"));
        }
        if self.improvement_length < 1 {
            return Err(invalid!("improvement length must be at least 1"));
        }
        if self.tournament_size < 1 {
            return Err(invalid!("tournament size must be at least 1"));
        }
        for (name, rate) in [("crossover", self.crossover_rate), ("mutation", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(invalid!("{name} rate {rate} outside [0, 1]"));
            }
        }
        if let Lifecycle::Scheduled { add_interval, max_species } = self.lifecycle {
            if add_interval < 1 || max_species < 1 {
                return Err(invalid!("scheduled lifecycle needs positive interval and species cap"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Species<G> {
    pub id: SpeciesId,
    pub creation_step: usize,
    pub population: Vec<Individual<G>>,
}

/// The elected member of a species and the fitness it had when elected.
#[derive(Clone, Debug, PartialEq)]
pub struct Representative<G> {
    pub genome: G,
    pub fitness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ecosystem<G> {
    species: Vec<Species<G>>,
    representatives: Vec<Representative<G>>,
    history: Vec<f64>,
    last_structural_change: usize,
    next_id: SpeciesId,
}

impl<G: Clone + PartialEq + fmt::Debug> Ecosystem<G> {
    /// `n_species` random species, each with a random (unevaluated) member
    /// as representative.
    pub fn init<P: Problem<Genome = G>>(
        n_species: usize,
        params: &CoevParams,
        problem: &P,
        rng: &mut RngStream,
    ) -> Result<Self> {
        if n_species < 1 {
            return Err(invalid!("an ecosystem needs at least one species"));
        }
        let mut eco = Self {
            species: Vec::new(),
            representatives: Vec::new(),
            history: Vec::new(),
            last_structural_change: 0,
            next_id: 1,
        };
        for _ in 0..n_species {
            eco.add_species(problem, params.species_size, 0, rng);
        }
        Ok(eco)
    }

    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }

    pub fn species(&self) -> &[Species<G>] {
        &self.species
    }

    pub fn species_ids(&self) -> Vec<SpeciesId> {
        self.species.iter().map(|s| s.id).collect()
    }

    pub fn representatives(&self) -> &[Representative<G>] {
        &self.representatives
    }

    pub fn representative_genomes(&self) -> Vec<G> {
        self.representatives.iter().map(|r| r.genome.clone()).collect()
    }

    /// Representatives of every species except `i`.
    pub fn partners(&self, i: usize) -> Vec<G> {
        self.representatives
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, r)| r.genome.clone())
            .collect()
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    pub fn record_fitness(&mut self, value: f64) {
        self.history.push(value);
    }

    /// Index of the first history entry recorded after the last species
    /// addition or removal.
    pub fn last_structural_change(&self) -> usize {
        self.last_structural_change
    }

    /// Appends a random species; its representative is a random member.
    pub fn add_species<P: Problem<Genome = G>>(
        &mut self,
        problem: &P,
        species_size: usize,
        step: usize,
        rng: &mut RngStream,
    ) -> SpeciesId {
        let population: Vec<Individual<G>> = (0..species_size)
            .map(|_| {
                let mut g = problem.random_genome(rng);
                problem.repair(&mut g);
                Individual::new(g)
            })
            .collect();
        let genome = population
            .choose(rng)
            .map(|ind| ind.genome.clone())
            .expect("species size is at least 1");
        let id = self.next_id;
        self.next_id += 1;
        self.species.push(Species { id, creation_step: step, population });
        self.representatives.push(Representative { genome, fitness: None });
        self.last_structural_change = self.history.len();
        id
    }

    fn remove_species(&mut self, i: usize) -> SpeciesId {
        self.representatives.remove(i);
        self.last_structural_change = self.history.len();
        self.species.remove(i).id
    }

    /// One generation of species `i` against the current representatives:
    /// variation, evaluation of every offspring, tournament selection of the
    /// next population from the offspring. Returns the evaluation count.
    pub fn step_species<P, V>(
        &mut self,
        i: usize,
        problem: &P,
        variation: &V,
        params: &CoevParams,
        rng: &mut RngStream,
    ) -> Result<usize>
    where
        P: Problem<Genome = G>,
        V: Variation<G> + ?Sized,
    {
        if i >= self.species.len() {
            return Err(invalid!("species index {i} out of range ({} species)", self.len()));
        }
        let partners = self.partners(i);
        let mut offspring = vary(
            &self.species[i].population,
            variation,
            params.crossover_rate,
            params.mutation_rate,
            rng,
        )?;
        offspring.iter_mut().for_each(|g| problem.repair(g));
        let fitness = problem.evaluate_batch(&offspring, &partners);
        let evaluated: Vec<Individual<G>> = offspring
            .into_iter()
            .zip(fitness)
            .map(|(g, f)| Individual::evaluated(g, f))
            .collect();
        let n = evaluated.len();
        let size = self.species[i].population.len();
        self.species[i].population =
            tournament_select(&evaluated, params.tournament_size, size, problem.sense(), rng)?;
        Ok(n)
    }

    /// Elects the best member of species `i` (earliest on ties) as its
    /// representative. Returns whether the representative's fitness strictly
    /// improved on the previous representative's recorded fitness.
    pub fn update_representative(&mut self, i: usize, sense: Sense) -> Result<bool> {
        let species = self
            .species
            .get(i)
            .ok_or_else(|| invalid!("species index {i} out of range"))?;
        let mut best: Option<(&Individual<G>, f64)> = None;
        for (k, ind) in species.population.iter().enumerate() {
            let f = ind
                .fitness
                .ok_or_else(|| illegal!("species {} member {k} is not evaluated", species.id))?;
            if best.is_none_or(|(_, bf)| sense.better(f, bf)) {
                best = Some((ind, f));
            }
        }
        let (ind, f) = best.ok_or_else(|| illegal!("species {} is empty", species.id))?;
        let rep = &mut self.representatives[i];
        let changed = rep.fitness.is_none_or(|old| sense.better(f, old));
        rep.genome = ind.genome.clone();
        rep.fitness = Some(f);
        Ok(changed)
    }

    /// True iff at least `effective_length` steps have elapsed since the
    /// first entry recorded after the last structural change, and the
    /// collaboration fitness improved by less than `threshold` over the last
    /// `effective_length` steps.
    pub fn check_stagnation(&self, effective_length: usize, threshold: f64, sense: Sense) -> bool {
        let Some(now) = self.history.len().checked_sub(1) else {
            return false;
        };
        if effective_length == 0 || now < self.last_structural_change + effective_length {
            return false;
        }
        sense.improvement(self.history[now - effective_length], self.history[now]) < threshold
    }

    /// Removes under-contributing species newest first, recomputing
    /// contributions after each removal and never removing the last species,
    /// then adds one fresh species. Returns the removed ids and the new id.
    pub fn prune_and_replace<P, S>(
        &mut self,
        problem: &P,
        extinction_threshold: f64,
        species_size: usize,
        step: usize,
        scheduler: &mut S,
        rng: &mut RngStream,
    ) -> Result<(Vec<SpeciesId>, SpeciesId)>
    where
        P: Problem<Genome = G>,
        S: Scheduler + ?Sized,
    {
        let mut removed = Vec::new();
        while self.species.len() > 1 {
            let reps = self.representative_genomes();
            let victim = (0..reps.len())
                .rev()
                .find(|&i| problem.contribution(i, &reps) < extinction_threshold);
            let Some(i) = victim else { break };
            let id = self.remove_species(i);
            scheduler.on_remove(id)?;
            removed.push(id);
        }
        let added = self.add_species(problem, species_size, step, rng);
        scheduler.on_add(added)?;
        Ok((removed, added))
    }
}

/// Species added to or removed from the ecosystem at the end of a step.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StructuralEvent {
    None,
    Added(SpeciesId),
    Replaced { removed: Vec<SpeciesId>, added: SpeciesId },
}

/// What happened during one outer-loop step. Fitness, contributions and
/// representatives describe the ecosystem before any structural event.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord<G> {
    pub step: usize,
    /// Cumulative fitness evaluations.
    pub evaluations: u64,
    pub species: Vec<SpeciesId>,
    pub chosen: Vec<SpeciesId>,
    /// One per chosen species when the scheduler uses rewards.
    pub rewards: Vec<u8>,
    pub collaboration_fitness: f64,
    pub contributions: Vec<f64>,
    pub event: StructuralEvent,
    pub representatives: Vec<G>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog<G> {
    pub records: Vec<StepRecord<G>>,
    pub first_hit_step: Option<usize>,
    pub evaluations: u64,
    pub final_species: usize,
    pub final_representatives: Vec<G>,
}

impl<G> RunLog<G> {
    pub fn success(&self) -> bool {
        self.first_hit_step.is_some()
    }
}

/// Receives each step record as soon as it is produced.
pub trait StepObserver<G> {
    fn on_step(&mut self, record: &StepRecord<G>);
}

impl<G> StepObserver<G> for () {
    fn on_step(&mut self, _record: &StepRecord<G>) {}
}

impl<G, F: FnMut(&StepRecord<G>)> StepObserver<G> for F {
    fn on_step(&mut self, record: &StepRecord<G>) {
        self(record)
    }
}

/// Runs the outer loop until the representatives are perfect or
/// `params.max_steps` steps have been taken.
///
/// Each step evolves the species returned by the scheduler against the
/// representatives current at the start of the step, then updates their
/// representatives. Schedulers that use rewards receive, per evolved
/// species, 1 iff the collaboration fitness after the step is strictly
/// better than before it.
pub fn run<P, V, S, O>(
    problem: &P,
    variation: &V,
    params: &CoevParams,
    scheduler: &mut S,
    rng: &mut RngStream,
    observer: &mut O,
) -> Result<RunLog<P::Genome>>
where
    P: Problem,
    V: Variation<P::Genome> + ?Sized,
    S: Scheduler + ?Sized,
    O: StepObserver<P::Genome> + ?Sized,
{
    params.validate()?;
    let sense = problem.sense();
    let mut log = RunLog {
        records: Vec::new(),
        first_hit_step: None,
        evaluations: 0,
        final_species: 0,
        final_representatives: Vec::new(),
    };
    if params.max_steps == 0 {
        return Ok(log);
    }

    let mut eco = Ecosystem::init(params.initial_species, params, problem, rng)?;
    for id in eco.species_ids() {
        scheduler.on_add(id)?;
    }

    let mut evaluations = 0u64;
    for step in 1..=params.max_steps {
        let ids = eco.species_ids();
        let chosen = scheduler.select(&ids, rng)?;
        if chosen.is_empty() || chosen.iter().any(|&i| i >= ids.len()) {
            return Err(illegal!("scheduler returned invalid species indices {chosen:?}"));
        }

        let before = problem.collaboration_fitness(&eco.representative_genomes());
        for &i in &chosen {
            evaluations += eco.step_species(i, problem, variation, params, rng)? as u64;
        }
        for &i in &chosen {
            eco.update_representative(i, sense)?;
        }
        let reps = eco.representative_genomes();
        let after = problem.collaboration_fitness(&reps);
        eco.record_fitness(after);

        let mut rewards = Vec::new();
        if scheduler.uses_rewards() {
            // Every chosen species shares the step's outcome.
            let r = binary_reward(before, after, sense);
            for &i in &chosen {
                scheduler.feedback(ids[i], r)?;
                rewards.push(r);
            }
        }

        let contributions = (0..reps.len()).map(|i| problem.contribution(i, &reps)).collect();
        let perfect = problem.perfect(&reps);

        let mut event = StructuralEvent::None;
        if !perfect {
            match params.lifecycle {
                Lifecycle::OpenEnded => {
                    let effective = scheduler.improvement_length(params.improvement_length, eco.len());
                    if eco.check_stagnation(effective, params.improvement_threshold, sense) {
                        let (removed, added) = eco.prune_and_replace(
                            problem,
                            params.extinction_threshold,
                            params.species_size,
                            step,
                            scheduler,
                            rng,
                        )?;
                        event = StructuralEvent::Replaced { removed, added };
                    }
                }
                Lifecycle::Scheduled { add_interval, max_species } => {
                    if step % add_interval == 0 && eco.len() < max_species {
                        let id = eco.add_species(problem, params.species_size, step, rng);
                        scheduler.on_add(id)?;
                        event = StructuralEvent::Added(id);
                    }
                }
            }
        }

        let record = StepRecord {
            step,
            evaluations,
            species: ids.clone(),
            chosen: chosen.iter().map(|&i| ids[i]).collect(),
            rewards,
            collaboration_fitness: after,
            contributions,
            event,
            representatives: reps,
        };
        observer.on_step(&record);
        log.records.push(record);

        if perfect {
            log.first_hit_step = Some(step);
            break;
        }
    }

    log.evaluations = evaluations;
    log.final_species = eco.len();
    log.final_representatives = eco.representative_genomes();
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::Synchronous;
    use alloc::vec;

    /// Genome is a single integer; contributions are read from a table
    /// indexed by the genome value, so tests control them exactly.
    struct Toy {
        contribution_of: Vec<f64>,
    }

    impl Problem for Toy {
        type Genome = u32;

        fn sense(&self) -> Sense {
            Sense::Maximize
        }

        fn random_genome(&self, _rng: &mut RngStream) -> u32 {
            0
        }

        fn individual_fitness(&self, g: &u32, partners: &[u32]) -> f64 {
            (*g + partners.iter().sum::<u32>()) as f64
        }

        fn collaboration_fitness(&self, reps: &[u32]) -> f64 {
            reps.iter().sum::<u32>() as f64
        }

        fn contribution(&self, i: usize, reps: &[u32]) -> f64 {
            if reps.len() == 1 {
                return f64::INFINITY;
            }
            self.contribution_of[reps[i] as usize]
        }

        fn perfect(&self, _reps: &[u32]) -> bool {
            false
        }
    }

    fn eco_with_reps(reps: &[u32]) -> Ecosystem<u32> {
        let toy = Toy { contribution_of: vec![] };
        let params = CoevParams { species_size: 2, ..CoevParams::default() };
        let mut eco = Ecosystem::init(reps.len(), &params, &toy, &mut RngStream::new(0)).unwrap();
        for (r, &g) in eco.representatives.iter_mut().zip(reps) {
            r.genome = g;
        }
        eco
    }

    #[test]
    fn init_validates_and_elects_members() {
        let toy = Toy { contribution_of: vec![] };
        let params = CoevParams::default();
        assert!(Ecosystem::init(0, &params, &toy, &mut RngStream::new(0)).is_err());
        let eco = Ecosystem::init(3, &params, &toy, &mut RngStream::new(0)).unwrap();
        assert_eq!(eco.len(), 3);
        assert_eq!(eco.representatives().len(), 3);
        assert_eq!(eco.species_ids(), vec![1, 2, 3]);
        assert!(eco.species().iter().all(|s| s.population.len() == 50));
        assert!(eco.representatives().iter().all(|r| r.fitness.is_none()));
    }

    #[test]
    fn stagnation_examples() {
        let mut eco = eco_with_reps(&[0]);
        eco.history = vec![10.0, 10.6];
        assert!(!eco.check_stagnation(1, 0.5, Sense::Maximize));
        eco.history = vec![10.0, 10.2];
        assert!(eco.check_stagnation(1, 0.5, Sense::Maximize));
        eco.history = vec![10.0, 9.8];
        // 10.0 -> 9.8 is a 0.2 improvement when minimizing.
        assert!(eco.check_stagnation(1, 0.5, Sense::Minimize));
    }

    #[test]
    fn stagnation_suppressed_after_change() {
        let mut eco = eco_with_reps(&[0]);
        eco.history = vec![1.0; 10];
        eco.last_structural_change = 7; // entries 7, 8, 9 since the change
        assert!(!eco.check_stagnation(5, 0.5, Sense::Maximize));
        eco.history.extend([1.0; 3]);
        assert!(eco.check_stagnation(5, 0.5, Sense::Maximize));
        assert!(!eco_with_reps(&[0]).check_stagnation(1, 0.5, Sense::Maximize));
    }

    #[test]
    fn prune_newest_first_then_recheck() {
        // Species 1 rep=0 contributes 6, species 2 rep=1 contributes 4.
        let toy = Toy { contribution_of: vec![6.0, 4.0] };
        let mut eco = eco_with_reps(&[0, 1]);
        let mut sched = Synchronous;
        let (removed, added) = eco
            .prune_and_replace(&toy, 5.0, 2, 9, &mut sched, &mut RngStream::new(1))
            .unwrap();
        assert_eq!(removed, vec![2]);
        assert_eq!(added, 3);
        assert_eq!(eco.species_ids(), vec![1, 3]);
        assert_eq!(eco.representatives().len(), 2);
        assert_eq!(eco.species()[1].creation_step, 9);
    }

    #[test]
    fn prune_removes_nothing_when_all_contribute() {
        let toy = Toy { contribution_of: vec![6.0, 7.0] };
        let mut eco = eco_with_reps(&[0, 1]);
        let (removed, _) = eco
            .prune_and_replace(&toy, 5.0, 2, 0, &mut Synchronous, &mut RngStream::new(1))
            .unwrap();
        assert!(removed.is_empty());
        assert_eq!(eco.len(), 3);
    }

    #[test]
    fn prune_cascades_newest_first_and_keeps_one() {
        let toy = Toy { contribution_of: vec![0.0, 1.0, 2.0] };
        let mut eco = eco_with_reps(&[0, 1, 2]);
        let (removed, added) = eco
            .prune_and_replace(&toy, 5.0, 2, 0, &mut Synchronous, &mut RngStream::new(1))
            .unwrap();
        assert_eq!(removed, vec![3, 2]);
        assert_eq!(eco.species_ids(), vec![1, added]);
    }

    #[test]
    fn single_species_is_retained() {
        let toy = Toy { contribution_of: vec![0.0] };
        let mut eco = eco_with_reps(&[0]);
        let (removed, _) = eco
            .prune_and_replace(&toy, 5.0, 2, 0, &mut Synchronous, &mut RngStream::new(1))
            .unwrap();
        assert!(removed.is_empty());
        assert_eq!(eco.len(), 2);
    }

    #[test]
    fn update_representative_reports_strict_gain() {
        let mut eco = eco_with_reps(&[0]);
        assert!(matches!(
            eco.update_representative(0, Sense::Maximize),
            Err(crate::Error::IllegalState(_))
        ));
        eco.species[0].population =
            vec![Individual::evaluated(4, 4.0), Individual::evaluated(5, 5.0)];
        assert!(eco.update_representative(0, Sense::Maximize).unwrap());
        assert_eq!(eco.representatives()[0].genome, 5);
        assert!(!eco.update_representative(0, Sense::Maximize).unwrap());
        eco.species[0].population =
            vec![Individual::evaluated(6, 6.0), Individual::evaluated(3, 3.0)];
        assert!(eco.update_representative(0, Sense::Minimize).unwrap());
        assert_eq!(eco.representatives()[0].genome, 3);
        assert!(eco.update_representative(4, Sense::Minimize).is_err());
    }

    #[test]
    fn zero_budget_gives_empty_log() {
        let toy = Toy { contribution_of: vec![] };
        let params = CoevParams { max_steps: 0, ..CoevParams::default() };
        struct Noop;
        impl Variation<u32> for Noop {
            fn crossover(&self, a: &u32, b: &u32, _: &mut RngStream) -> Result<(u32, u32)> {
                Ok((*a, *b))
            }
            fn mutate(&self, g: &u32, _: &mut RngStream) -> Result<u32> {
                Ok(*g)
            }
        }
        let log = run(&toy, &Noop, &params, &mut Synchronous, &mut RngStream::new(0), &mut ()).unwrap();
        assert!(log.records.is_empty());
        assert!(!log.success());
    }
}
