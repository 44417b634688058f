//! Genome representations and evaluated individuals.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::rng::RngStream;

/// Direction in which an objective improves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// True iff `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }

    /// Signed progress from `from` to `to`; positive means improvement.
    pub fn improvement(self, from: f64, to: f64) -> f64 {
        match self {
            Sense::Maximize => to - from,
            Sense::Minimize => from - to,
        }
    }

    /// The worst possible value in this sense.
    pub fn worst(self) -> f64 {
        match self {
            Sense::Maximize => f64::NEG_INFINITY,
            Sense::Minimize => f64::INFINITY,
        }
    }
}

/// Fixed-length bit string packed into 64-bit words.
///
/// Bit `i` lives in word `i / 64` at position `i % 64`. Unused high bits of
/// the last word are kept at zero so word-wise comparisons stay exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitGenome {
    len: usize,
    words: Vec<u64>,
}

impl BitGenome {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut g = Self::zeros(len);
        g.words.iter_mut().for_each(|w| *w = u64::MAX);
        g.mask_tail();
        g
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut g = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            g.set(i, b);
        }
        g
    }

    /// Parses a string of `0` and `1` characters.
    pub fn parse(text: &str) -> Result<Self> {
        let mut g = Self::zeros(text.chars().count());
        for (i, c) in text.chars().enumerate() {
            match c {
                '0' => {}
                '1' => g.set(i, true),
                other => return Err(invalid!("bit string contains {other:?} at position {i}")),
            }
        }
        Ok(g)
    }

    /// Uniformly random bits.
    pub fn random(len: usize, rng: &mut RngStream) -> Self {
        let mut g = Self::zeros(len);
        g.words.iter_mut().for_each(|w| *w = rng.random());
        g.mask_tail();
        g
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn complement(&self) -> Self {
        let mut g = self.clone();
        g.words.iter_mut().for_each(|w| *w = !*w);
        g.mask_tail();
        g
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of positions at which the two strings differ.
    pub fn hamming(&self, other: &Self) -> Result<usize> {
        if self.len != other.len {
            return Err(invalid!("length mismatch: {} vs {}", self.len, other.len));
        }
        Ok(self.hamming_unchecked(other))
    }

    #[inline]
    pub(crate) fn hamming_unchecked(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitGenome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitGenome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitGenome({self})")
    }
}

/// Closed interval for one real-valued dimension.
///
/// A periodic interval wraps values into `[low, high)` instead of clamping.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub low: f64,
    pub high: f64,
    pub periodic: bool,
}

impl Interval {
    pub fn new(low: f64, high: f64) -> Self {
        assert!(low <= high, "interval bounds out of order: [{low}, {high}]");
        Self { low, high, periodic: false }
    }

    pub fn periodic(low: f64, high: f64) -> Self {
        assert!(low < high, "periodic interval must be non-degenerate: [{low}, {high}]");
        Self { low, high, periodic: true }
    }

    pub fn unbounded() -> Self {
        Self { low: f64::NEG_INFINITY, high: f64::INFINITY, periodic: false }
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn contains(&self, v: f64) -> bool {
        if self.periodic {
            v >= self.low && v < self.high
        } else {
            v >= self.low && v <= self.high
        }
    }

    /// Brings `v` back inside the interval.
    pub fn repair(&self, v: f64) -> f64 {
        if self.periodic {
            let w = self.width();
            let mut r = (v - self.low) % w;
            if r < 0.0 {
                r += w;
            }
            // `r + w` can round up to exactly `w`.
            if r >= w {
                r = 0.0;
            }
            self.low + r
        } else {
            v.clamp(self.low, self.high)
        }
    }
}

/// Real-valued vector with per-dimension bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct RealGenome {
    values: Vec<f64>,
    bounds: Vec<Interval>,
}

impl RealGenome {
    /// Builds a genome, rejecting values outside their bounds.
    pub fn new(values: Vec<f64>, bounds: Vec<Interval>) -> Result<Self> {
        if values.len() != bounds.len() {
            return Err(invalid!(
                "{} values for {} bounds",
                values.len(),
                bounds.len()
            ));
        }
        if let Some((d, v)) = values
            .iter()
            .enumerate()
            .find(|(d, v)| !bounds[*d].contains(**v))
        {
            return Err(invalid!("value {v} outside bounds of dimension {d}"));
        }
        Ok(Self { values, bounds })
    }

    /// Builds a genome, repairing any out-of-bounds value.
    pub fn repaired(mut values: Vec<f64>, bounds: Vec<Interval>) -> Result<Self> {
        if values.len() != bounds.len() {
            return Err(invalid!(
                "{} values for {} bounds",
                values.len(),
                bounds.len()
            ));
        }
        for (v, b) in values.iter_mut().zip(&bounds) {
            *v = b.repair(*v);
        }
        Ok(Self { values, bounds })
    }

    /// Uniform sample inside finite bounds.
    pub fn random(bounds: &[Interval], rng: &mut RngStream) -> Self {
        let values = bounds
            .iter()
            .map(|b| b.repair(b.low + rng.random::<f64>() * b.width()))
            .collect();
        Self { values, bounds: bounds.to_vec() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Overwrites dimension `d`, repairing the value into bounds.
    pub fn set(&mut self, d: usize, v: f64) {
        self.values[d] = self.bounds[d].repair(v);
    }
}

impl fmt::Display for RealGenome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(":")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A genome together with its fitness, absent until evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct Individual<G> {
    pub genome: G,
    pub fitness: Option<f64>,
}

impl<G> Individual<G> {
    pub fn new(genome: G) -> Self {
        Self { genome, fitness: None }
    }

    pub fn evaluated(genome: G, fitness: f64) -> Self {
        Self { genome, fitness: Some(fitness) }
    }
}
