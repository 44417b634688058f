//! Species schedulers: which species evolve at each step.

use alloc::vec::Vec;

use crate::bandit::{BanditParams, BanditState};
use crate::coevolution::SpeciesId;
use crate::error::{illegal, Result};
use crate::rng::RngStream;

pub trait Scheduler {
    fn name(&self) -> &'static str;

    /// Indices into `species` of the species to evolve this step.
    fn select(&mut self, species: &[SpeciesId], rng: &mut RngStream) -> Result<Vec<usize>>;

    /// Whether [`Scheduler::feedback`] should be called after each step.
    fn uses_rewards(&self) -> bool {
        false
    }

    fn feedback(&mut self, _species: SpeciesId, _reward: u8) -> Result<()> {
        Ok(())
    }

    fn on_add(&mut self, _species: SpeciesId) -> Result<()> {
        Ok(())
    }

    fn on_remove(&mut self, _species: SpeciesId) -> Result<()> {
        Ok(())
    }

    /// Stagnation window length given the configured one and the current
    /// number of species.
    fn improvement_length(&self, base: usize, _n_species: usize) -> usize {
        base
    }
}

/// Evolves one species per step, cycling through them in order.
///
/// Each species is stepped once every `n` steps, so the stagnation window is
/// the configured length times the number of species.
#[derive(Clone, Copy, Debug, Default)]
pub struct RoundRobin {
    next: usize,
}

impl Scheduler for RoundRobin {
    fn name(&self) -> &'static str {
        "ccea"
    }

    fn select(&mut self, species: &[SpeciesId], _rng: &mut RngStream) -> Result<Vec<usize>> {
        if species.is_empty() {
            return Err(illegal!("no species to schedule"));
        }
        let i = self.next % species.len();
        self.next = i + 1;
        Ok(alloc::vec![i])
    }

    fn improvement_length(&self, base: usize, n_species: usize) -> usize {
        base * n_species.max(1)
    }
}

/// Evolves every species at every step.
#[derive(Clone, Copy, Debug, Default)]
pub struct Synchronous;

impl Scheduler for Synchronous {
    fn name(&self) -> &'static str {
        "ccea-sync"
    }

    fn select(&mut self, species: &[SpeciesId], _rng: &mut RngStream) -> Result<Vec<usize>> {
        Ok((0..species.len()).collect())
    }
}

/// Evolves the single species chosen by a dynamic bandit whose arms are the
/// species ids.
///
/// Since only one species evolves per step, the stagnation window is the
/// configured length times the number of species.
#[derive(Clone, Debug)]
pub struct BanditScheduler {
    state: BanditState,
}

impl BanditScheduler {
    pub fn new(params: BanditParams) -> Result<Self> {
        Ok(Self { state: BanditState::new(params)? })
    }

    pub fn state(&self) -> &BanditState {
        &self.state
    }
}

impl Scheduler for BanditScheduler {
    fn name(&self) -> &'static str {
        "ccea-mab"
    }

    fn select(&mut self, species: &[SpeciesId], rng: &mut RngStream) -> Result<Vec<usize>> {
        let arm = self.state.select_arm(rng)?;
        let index = species
            .iter()
            .position(|&s| s == arm)
            .ok_or_else(|| illegal!("bandit arm {arm} has no matching species"))?;
        Ok(alloc::vec![index])
    }

    fn uses_rewards(&self) -> bool {
        true
    }

    fn feedback(&mut self, species: SpeciesId, reward: u8) -> Result<()> {
        self.state.record_reward(species, reward)
    }

    fn on_add(&mut self, species: SpeciesId) -> Result<()> {
        self.state.add_arm(species)
    }

    fn on_remove(&mut self, species: SpeciesId) -> Result<()> {
        self.state.remove_arm(species)
    }

    fn improvement_length(&self, base: usize, n_species: usize) -> usize {
        base * n_species.max(1)
    }
}
