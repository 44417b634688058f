//! Cooperative coevolution with a dynamic multi-armed bandit deciding which
//! species evolves at each step.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the algorithmic
//! pieces: genomes and variation operators, the ecosystem loop with species
//! addition and extinction, the sliding-window bandit with rank-based credit,
//! the two benchmark problems, and the nonparametric tests used to compare
//! runs. File formats, configuration and the command line live in the
//! `ccmab-harness` crate.
//!
//! ## Overview
//!
//! * [`coevolution::run`] drives an [`coevolution::Ecosystem`] with a
//!   [`scheduler::Scheduler`]. [`scheduler::RoundRobin`] evolves one species
//!   per step in turn (classic CCEA), [`scheduler::BanditScheduler`] evolves
//!   the species picked by a [`bandit::BanditState`] (CCEA-MAB), and
//!   [`scheduler::Synchronous`] evolves every species at every step.
//! * [`string_cover::StringCover`] and [`sensor::SensorPlacement`] implement
//!   [`coevolution::Problem`].
//! * [`stats`] holds the Wilcoxon signed-rank and Mann-Whitney U tests and run
//!   summaries.
#![no_std]

extern crate alloc;

pub mod bandit;
pub mod coevolution;
pub mod error;
pub mod genome;
pub mod operators;
pub mod rng;
pub mod scheduler;
pub mod sensor;
pub mod stats;
pub mod string_cover;

pub use crate::error::{Error, Result};
pub use crate::genome::{BitGenome, Individual, Interval, RealGenome, Sense};
pub use crate::rng::RngStream;
