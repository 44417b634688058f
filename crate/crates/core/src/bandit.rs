//! Dynamic multi-armed bandit with a sliding reward window.
//!
//! Counts and credits are never accumulated incrementally: after every change
//! to the window they are recomputed from it, so `n[i]` is always the number
//! of window entries for arm `i` and `q[i]` is always the area-under-curve
//! credit of arm `i` over the current window. Arms can be added (with zero
//! count, which forces their selection) and removed (purging their window
//! entries) without restarting the bandit.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::seq::IndexedRandom;

use crate::error::{illegal, invalid, Result};
use crate::genome::Sense;
use crate::rng::RngStream;

/// Arm identifier. The coevolution uses species ids, which never get reused.
pub type ArmId = u64;

/// One window entry: a binary reward and the arm that earned it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Outcome {
    pub reward: u8,
    pub arm: ArmId,
}

/// The last `capacity` outcomes, newest first.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardWindow {
    entries: VecDeque<Outcome>,
    capacity: usize,
}

impl RewardWindow {
    pub fn new(capacity: usize) -> Self {
        Self { entries: VecDeque::with_capacity(capacity + 1), capacity }
    }

    /// Builds a window from entries given newest first; extra entries beyond
    /// `capacity` are dropped from the old end.
    pub fn from_entries(entries: impl IntoIterator<Item = Outcome>, capacity: usize) -> Self {
        let mut entries: VecDeque<Outcome> = entries.into_iter().collect();
        entries.truncate(capacity);
        Self { entries, capacity }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries, newest first.
    pub fn entries(&self) -> impl ExactSizeIterator<Item = &Outcome> + '_ {
        self.entries.iter()
    }

    pub fn push(&mut self, outcome: Outcome) {
        self.entries.push_front(outcome);
        self.entries.truncate(self.capacity);
    }

    pub fn count(&self, arm: ArmId) -> usize {
        self.entries.iter().filter(|o| o.arm == arm).count()
    }

    fn purge(&mut self, arm: ArmId) {
        self.entries.retain(|o| o.arm != arm);
    }
}

/// Area-under-curve credit of `arm` over the window, with decay `d`.
///
/// The window is ranked by reward (best first) and, among equal rewards, by
/// recency (newest first). Walking the ranks with weight
/// `d^(r-1) * (|w| - (r-1))`, entries of `arm` raise the curve height and
/// entries of other arms add `height * weight` to the area.
pub fn auc_credit(arm: ArmId, window: &RewardWindow, d: f64) -> f64 {
    let n = window.len();
    let mut ranked: Vec<&Outcome> = window.entries.iter().collect();
    // Stable sort keeps window order (newest first) among equal rewards.
    ranked.sort_by_key(|o| core::cmp::Reverse(o.reward));

    let mut area = 0.0;
    let mut height = 0.0;
    let mut decay = 1.0;
    for (r, outcome) in ranked.iter().enumerate() {
        let weight = decay * (n - r) as f64;
        if outcome.arm == arm {
            height += weight;
        } else {
            area += height * weight;
        }
        decay *= d;
    }
    area
}

/// 1 iff `current` is strictly better than `previous` in the given sense.
pub fn binary_reward(previous: f64, current: f64, sense: Sense) -> u8 {
    u8::from(sense.better(current, previous))
}

/// Bandit parameters: window size `W`, exploration factor `C`, decay `d`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BanditParams {
    pub window_size: usize,
    pub exploration: f64,
    pub decay: f64,
}

impl Default for BanditParams {
    fn default() -> Self {
        Self { window_size: 50, exploration: 1.0, decay: 1.0 }
    }
}

/// Arms with their window counts `n` and credits `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct BanditState {
    arms: Vec<ArmId>,
    counts: Vec<usize>,
    credits: Vec<f64>,
    window: RewardWindow,
    exploration: f64,
    decay: f64,
}

impl BanditState {
    pub fn new(params: BanditParams) -> Result<Self> {
        if params.window_size == 0 {
            return Err(invalid!("window size must be at least 1"));
        }
        if !(0.0..=1.0).contains(&params.decay) {
            return Err(invalid!("decay {} outside [0, 1]", params.decay));
        }
        if !(params.exploration >= 0.0) {
            return Err(invalid!("exploration factor must be non-negative"));
        }
        Ok(Self {
            arms: Vec::new(),
            counts: Vec::new(),
            credits: Vec::new(),
            window: RewardWindow::new(params.window_size),
            exploration: params.exploration,
            decay: params.decay,
        })
    }

    pub fn with_arms(params: BanditParams, arms: &[ArmId]) -> Result<Self> {
        let mut state = Self::new(params)?;
        for &a in arms {
            state.add_arm(a)?;
        }
        Ok(state)
    }

    pub fn arms(&self) -> &[ArmId] {
        &self.arms
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn credits(&self) -> &[f64] {
        &self.credits
    }

    pub fn window(&self) -> &RewardWindow {
        &self.window
    }

    pub fn exploration(&self) -> f64 {
        self.exploration
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    fn position(&self, arm: ArmId) -> Option<usize> {
        self.arms.iter().position(|&a| a == arm)
    }

    /// UCB score of the arm at `index`; infinite for untried arms.
    pub fn score(&self, index: usize) -> f64 {
        let n = self.counts[index];
        if n == 0 {
            return f64::INFINITY;
        }
        let total: usize = self.counts.iter().sum();
        self.credits[index]
            + self.exploration * libm::sqrt(2.0 * libm::log(total as f64) / n as f64)
    }

    /// Picks an untried arm uniformly if any exists, otherwise the arm with
    /// the highest UCB score (lowest position on ties).
    pub fn select_arm(&self, rng: &mut RngStream) -> Result<ArmId> {
        if self.arms.is_empty() {
            return Err(illegal!("bandit has no arms"));
        }
        let untried: Vec<ArmId> = self
            .arms
            .iter()
            .zip(&self.counts)
            .filter(|(_, &n)| n == 0)
            .map(|(&a, _)| a)
            .collect();
        if let Some(&arm) = untried.choose(rng) {
            return Ok(arm);
        }
        let mut best = 0;
        let mut best_score = self.score(0);
        for i in 1..self.arms.len() {
            let s = self.score(i);
            if s > best_score {
                best = i;
                best_score = s;
            }
        }
        Ok(self.arms[best])
    }

    /// Prepends `(reward, arm)` to the window and refreshes `n` and `q`.
    pub fn record_reward(&mut self, arm: ArmId, reward: u8) -> Result<()> {
        if self.position(arm).is_none() {
            return Err(invalid!("unknown arm {arm}"));
        }
        if reward > 1 {
            return Err(invalid!("reward must be 0 or 1, got {reward}"));
        }
        self.window.push(Outcome { reward, arm });
        self.refresh();
        Ok(())
    }

    pub fn add_arm(&mut self, arm: ArmId) -> Result<()> {
        if self.position(arm).is_some() {
            return Err(invalid!("arm {arm} already present"));
        }
        self.arms.push(arm);
        self.counts.push(0);
        self.credits.push(0.0);
        Ok(())
    }

    /// Deletes the arm and every window entry it earned.
    pub fn remove_arm(&mut self, arm: ArmId) -> Result<()> {
        let pos = self.position(arm).ok_or_else(|| invalid!("unknown arm {arm}"))?;
        if self.arms.len() == 1 {
            return Err(illegal!("cannot remove the last arm"));
        }
        self.arms.remove(pos);
        self.counts.remove(pos);
        self.credits.remove(pos);
        self.window.purge(arm);
        self.refresh();
        Ok(())
    }

    fn refresh(&mut self) {
        for (i, &arm) in self.arms.iter().enumerate() {
            self.counts[i] = self.window.count(arm);
            self.credits[i] = auc_credit(arm, &self.window, self.decay);
        }
    }
}
