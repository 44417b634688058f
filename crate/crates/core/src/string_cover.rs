//! Binary string covering.
//!
//! A match set of strings is scored against a target set by averaging, over
//! the targets, the best match strength (number of agreeing positions) any
//! match string achieves. Targets are random instances of a few schemata;
//! each species evolves one match string.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::coevolution::Problem;
use crate::error::{invalid, Result};
use crate::genome::{BitGenome, Sense};
use crate::rng::RngStream;

/// Length of every string in the benchmark.
pub const STRING_LENGTH: usize = 64;

/// The three schemata of the first scenario; they share their `#` positions.
pub const SCENARIO_1_SCHEMATA: [&str; 3] = [
    "1##1###1###11111##1##1111#1##1###1#1111##111111##1#11#1#11######",
    "1##1###1###11111##1##1000#0##0###0#0000##000000##0#00#0#00######",
    "0##0###0###00000##0##0000#0##0###0#0000##001111##1#11#1#11######",
];

/// A 64-symbol template over `{0, 1, #}`; `#` marks a variable bit.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Schema {
    /// 1 where the position is fixed.
    fixed: BitGenome,
    /// Values at fixed positions; 0 elsewhere.
    values: BitGenome,
}

impl Schema {
    pub fn parse(text: &str) -> Result<Self> {
        let len = text.chars().count();
        if len != STRING_LENGTH {
            return Err(invalid!("schema has {len} symbols, expected {STRING_LENGTH}"));
        }
        let mut fixed = BitGenome::zeros(len);
        let mut values = BitGenome::zeros(len);
        for (i, c) in text.chars().enumerate() {
            match c {
                '#' => {}
                '0' => fixed.set(i, true),
                '1' => {
                    fixed.set(i, true);
                    values.set(i, true);
                }
                other => return Err(invalid!("schema symbol {other:?} at position {i}")),
            }
        }
        Ok(Self { fixed, values })
    }

    fn from_parts(fixed: BitGenome, values: BitGenome) -> Self {
        Self { fixed, values }
    }

    pub fn len(&self) -> usize {
        self.fixed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty()
    }

    /// Mask of fixed positions (1 = fixed).
    pub fn fixed_mask(&self) -> &BitGenome {
        &self.fixed
    }

    pub fn fixed_count(&self) -> usize {
        self.fixed.count_ones()
    }

    pub fn variable_count(&self) -> usize {
        self.len() - self.fixed_count()
    }

    /// The fixed values with every variable position set to 0.
    pub fn fixed_pattern(&self) -> &BitGenome {
        &self.values
    }

    /// Number of fixed positions at which `g` agrees with the schema.
    pub fn matched_fixed_bits(&self, g: &BitGenome) -> usize {
        self.fixed
            .words()
            .iter()
            .zip(self.values.words())
            .zip(g.words())
            .map(|((m, v), x)| (!(v ^ x) & m).count_ones() as usize)
            .sum()
    }

    /// True iff `g` agrees with every fixed position.
    pub fn covered_by(&self, g: &BitGenome) -> bool {
        g.len() == self.len() && self.matched_fixed_bits(g) == self.fixed_count()
    }

    /// Copies fixed symbols and replaces each `#` with a fair coin flip.
    pub fn instantiate(&self, rng: &mut RngStream) -> BitGenome {
        let mut g = self.values.clone();
        for i in 0..self.len() {
            if !self.fixed.get(i) && rng.random::<bool>() {
                g.set(i, true);
            }
        }
        g
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len())
            .map(|i| match (self.fixed.get(i), self.values.get(i)) {
                (false, _) => '#',
                (true, false) => '0',
                (true, true) => '1',
            })
            .collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Schema({self})")
    }
}

/// Target strings together with the index of the schema each came from.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetSet {
    strings: Vec<BitGenome>,
    origin: Vec<usize>,
}

impl TargetSet {
    pub fn new(strings: Vec<BitGenome>, origin: Vec<usize>) -> Result<Self> {
        if strings.is_empty() {
            return Err(invalid!("target set is empty"));
        }
        if strings.len() != origin.len() {
            return Err(invalid!("{} strings but {} origins", strings.len(), origin.len()));
        }
        let len = strings[0].len();
        if strings.iter().any(|s| s.len() != len) {
            return Err(invalid!("target strings differ in length"));
        }
        Ok(Self { strings, origin })
    }

    /// Targets with no recorded schema of origin.
    pub fn from_strings(strings: Vec<BitGenome>) -> Result<Self> {
        let origin = alloc::vec![0; strings.len()];
        Self::new(strings, origin)
    }

    pub fn strings(&self) -> &[BitGenome] {
        &self.strings
    }

    pub fn origin(&self) -> &[usize] {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }
}

/// Number of positions at which `x` and `y` hold the same bit.
pub fn match_strength(x: &BitGenome, y: &BitGenome) -> Result<usize> {
    Ok(x.len() - x.hamming(y)?)
}

#[inline]
fn strength(x: &BitGenome, y: &BitGenome) -> usize {
    x.len() - x.hamming_unchecked(y)
}

fn check_lengths(strings: &[BitGenome], targets: &TargetSet) -> Result<()> {
    let len = targets.strings[0].len();
    match strings.iter().find(|s| s.len() != len) {
        Some(s) => Err(invalid!("string of length {} against targets of length {len}", s.len())),
        None => Ok(()),
    }
}

/// Average over targets of the best match strength in `matches`.
pub fn set_strength(matches: &[BitGenome], targets: &TargetSet) -> Result<f64> {
    if matches.is_empty() {
        return Err(invalid!("match set is empty"));
    }
    check_lengths(matches, targets)?;
    Ok(set_strength_unchecked(matches, targets))
}

fn set_strength_unchecked(matches: &[BitGenome], targets: &TargetSet) -> f64 {
    let total: usize = targets
        .strings
        .iter()
        .map(|t| matches.iter().map(|m| strength(m, t)).max().unwrap_or(0))
        .sum();
    total as f64 / targets.len() as f64
}

/// Fitness of `genome` in the match set it forms with `partners`.
pub fn cc_fitness(genome: &BitGenome, partners: &[BitGenome], targets: &TargetSet) -> Result<f64> {
    check_lengths(core::slice::from_ref(genome), targets)?;
    check_lengths(partners, targets)?;
    Ok(fitness_unchecked(genome, partners, targets))
}

fn fitness_unchecked(genome: &BitGenome, partners: &[BitGenome], targets: &TargetSet) -> f64 {
    let total: usize = targets
        .strings
        .iter()
        .map(|t| {
            partners
                .iter()
                .map(|p| strength(p, t))
                .fold(strength(genome, t), usize::max)
        })
        .sum();
    total as f64 / targets.len() as f64
}

/// Number of targets for which `reps[i]` is the best cover; ties are
/// credited to the lowest position only.
pub fn contribution(i: usize, reps: &[BitGenome], targets: &TargetSet) -> Result<usize> {
    if i >= reps.len() {
        return Err(invalid!("representative index {i} out of range"));
    }
    check_lengths(reps, targets)?;
    Ok(contribution_unchecked(i, reps, targets))
}

fn contribution_unchecked(i: usize, reps: &[BitGenome], targets: &TargetSet) -> usize {
    targets
        .strings
        .iter()
        .filter(|t| {
            let mut best = 0;
            let mut best_strength = strength(&reps[0], t);
            for (j, r) in reps.iter().enumerate().skip(1) {
                let s = strength(r, t);
                if s > best_strength {
                    best = j;
                    best_strength = s;
                }
            }
            best == i
        })
        .count()
}

/// True iff every schema has its fixed bits fully matched by some
/// representative.
pub fn perfect(reps: &[BitGenome], schemata: &[Schema]) -> bool {
    schemata.iter().all(|s| reps.iter().any(|r| s.covered_by(r)))
}

/// Builds the target set and schemata of scenario 1, 2 or 3.
///
/// * 1: the three fixed schemata, 10 instances each (30 targets).
/// * 2: five schemata with scenario 1's variable positions; the 32 fixed
///   positions take the binary expansion of a uniform 32-bit integer, most
///   significant bit first. 6 instances each (30 targets).
/// * 3: five schemata; each draws `v` in `16..=48` variable bits, fills its
///   `64 - v` fixed bits from a uniform integer below `2^(64-v)`, then
///   shuffles all positions. 10 instances each (50 targets).
pub fn generate_target(scenario: u8, rng: &mut RngStream) -> Result<(TargetSet, Vec<Schema>)> {
    let (schemata, per_schema) = match scenario {
        1 => (scenario_1_schemata()?, 10),
        2 => {
            let base = scenario_1_schemata()?;
            let mask = base[0].fixed_mask().clone();
            if base.iter().any(|s| s.fixed_mask() != &mask) {
                return Err(invalid!("scenario 1 schemata do not share their variable positions"));
            }
            let fixed_positions: Vec<usize> = (0..STRING_LENGTH).filter(|&i| mask.get(i)).collect();
            let schemata = (0..5)
                .map(|_| {
                    let number: u32 = rng.random();
                    let mut values = BitGenome::zeros(STRING_LENGTH);
                    for (k, &pos) in fixed_positions.iter().enumerate() {
                        let bit = (number >> (fixed_positions.len() - 1 - k)) & 1 == 1;
                        values.set(pos, bit);
                    }
                    Schema::from_parts(mask.clone(), values)
                })
                .collect();
            (schemata, 6)
        }
        3 => {
            let schemata = (0..5)
                .map(|_| {
                    let variable: usize = rng.random_range(16..=48);
                    let fixed = STRING_LENGTH - variable;
                    let number: u64 = rng.random_range(0..(1u64 << fixed));
                    // Unshuffled layout: fixed bits (MSB first) then variables.
                    let mut symbols: Vec<Option<bool>> = (0..fixed)
                        .map(|k| Some((number >> (fixed - 1 - k)) & 1 == 1))
                        .chain(core::iter::repeat_n(None, variable))
                        .collect();
                    symbols.shuffle(rng);
                    let mut mask = BitGenome::zeros(STRING_LENGTH);
                    let mut values = BitGenome::zeros(STRING_LENGTH);
                    for (i, s) in symbols.into_iter().enumerate() {
                        if let Some(bit) = s {
                            mask.set(i, true);
                            values.set(i, bit);
                        }
                    }
                    Schema::from_parts(mask, values)
                })
                .collect();
            (schemata, 10)
        }
        other => return Err(invalid!("unknown scenario {other}, expected 1, 2 or 3")),
    };
    let mut strings = Vec::with_capacity(schemata.len() * per_schema);
    let mut origin = Vec::with_capacity(schemata.len() * per_schema);
    for (k, schema) in schemata.iter().enumerate() {
        for _ in 0..per_schema {
            strings.push(schema.instantiate(rng));
            origin.push(k);
        }
    }
    Ok((TargetSet::new(strings, origin)?, schemata))
}

pub fn scenario_1_schemata() -> Result<Vec<Schema>> {
    SCENARIO_1_SCHEMATA.iter().map(|s| Schema::parse(s)).collect()
}

/// String covering as a cooperative problem: maximize the match-set
/// strength; perfect when every generating schema is covered.
#[derive(Clone, Debug)]
pub struct StringCover {
    targets: TargetSet,
    schemata: Vec<Schema>,
}

impl StringCover {
    pub fn new(targets: TargetSet, schemata: Vec<Schema>) -> Result<Self> {
        if targets.strings[0].len() != STRING_LENGTH {
            return Err(invalid!("targets must be {STRING_LENGTH} bits long"));
        }
        Ok(Self { targets, schemata })
    }

    pub fn scenario(scenario: u8, rng: &mut RngStream) -> Result<Self> {
        let (targets, schemata) = generate_target(scenario, rng)?;
        Self::new(targets, schemata)
    }

    pub fn targets(&self) -> &TargetSet {
        &self.targets
    }

    pub fn schemata(&self) -> &[Schema] {
        &self.schemata
    }
}

impl Problem for StringCover {
    type Genome = BitGenome;

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn random_genome(&self, rng: &mut RngStream) -> BitGenome {
        BitGenome::random(STRING_LENGTH, rng)
    }

    fn individual_fitness(&self, genome: &BitGenome, partners: &[BitGenome]) -> f64 {
        fitness_unchecked(genome, partners, &self.targets)
    }

    fn evaluate_batch(&self, genomes: &[BitGenome], partners: &[BitGenome]) -> Vec<f64> {
        // Best partner strength per target does not depend on the genome.
        let floor: Vec<usize> = self
            .targets
            .strings
            .iter()
            .map(|t| partners.iter().map(|p| strength(p, t)).max().unwrap_or(0))
            .collect();
        let n = self.targets.len() as f64;
        genomes
            .iter()
            .map(|g| {
                let total: usize = self
                    .targets
                    .strings
                    .iter()
                    .zip(&floor)
                    .map(|(t, &f)| strength(g, t).max(f))
                    .sum();
                total as f64 / n
            })
            .collect()
    }

    fn collaboration_fitness(&self, reps: &[BitGenome]) -> f64 {
        set_strength_unchecked(reps, &self.targets)
    }

    fn contribution(&self, index: usize, reps: &[BitGenome]) -> f64 {
        contribution_unchecked(index, reps, &self.targets) as f64
    }

    fn perfect(&self, reps: &[BitGenome]) -> bool {
        perfect(reps, &self.schemata)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn bits(s: &str) -> BitGenome {
        BitGenome::parse(s).unwrap()
    }

    #[test]
    fn match_strength_examples() {
        let x = BitGenome::random(64, &mut RngStream::new(1));
        assert_eq!(match_strength(&x, &x).unwrap(), 64);
        assert_eq!(match_strength(&x, &x.complement()).unwrap(), 0);
        assert_eq!(match_strength(&bits("1010"), &bits("1001")).unwrap(), 2);
        assert!(match_strength(&bits("1010"), &bits("10")).is_err());
    }

    #[test]
    fn set_strength_examples() {
        let mut rng = RngStream::new(2);
        let strings: Vec<_> = (0..5).map(|_| BitGenome::random(64, &mut rng)).collect();
        let t = TargetSet::from_strings(strings.clone()).unwrap();
        assert_eq!(set_strength(&strings, &t).unwrap(), 64.0);
        let x = strings[0].clone();
        let t = TargetSet::from_strings(vec![x.clone(), x.complement()]).unwrap();
        assert_eq!(set_strength(&[x], &t).unwrap(), 32.0);
        assert!(set_strength(&[], &t).is_err());
        assert!(TargetSet::from_strings(vec![]).is_err());
    }

    #[test]
    fn schema_round_trip_and_counts() {
        for (text, schema) in SCENARIO_1_SCHEMATA.iter().zip(scenario_1_schemata().unwrap()) {
            assert_eq!(&schema.to_string(), text);
            assert_eq!(schema.fixed_count(), 32);
            assert_eq!(schema.variable_count(), 32);
        }
        assert!(Schema::parse("01#").is_err());
        let mut bad = String::from(SCENARIO_1_SCHEMATA[0]);
        bad.replace_range(0..1, "x");
        assert!(Schema::parse(&bad).is_err());
    }

    #[test]
    fn instantiate_copies_fixed_bits() {
        let fixed: String = "10".repeat(32);
        let schema = Schema::parse(&fixed).unwrap();
        let mut rng = RngStream::new(3);
        assert_eq!(schema.instantiate(&mut rng), bits(&fixed));
        let s = &scenario_1_schemata().unwrap()[1];
        for _ in 0..200 {
            assert!(s.covered_by(&s.instantiate(&mut rng)));
        }
    }

    #[test]
    fn cc_fitness_cases() {
        let mut rng = RngStream::new(4);
        let (t, _) = generate_target(1, &mut rng).unwrap();
        let g = BitGenome::random(64, &mut rng);
        let p = BitGenome::random(64, &mut rng);
        assert_eq!(cc_fitness(&g, &[], &t).unwrap(), set_strength(core::slice::from_ref(&g), &t).unwrap());
        assert_eq!(
            cc_fitness(&p, &[p.clone(), g.clone()], &t).unwrap(),
            set_strength(&[p, g], &t).unwrap()
        );
    }

    #[test]
    fn contribution_tie_rule() {
        let mut rng = RngStream::new(5);
        let (t, _) = generate_target(2, &mut rng).unwrap();
        let r = BitGenome::random(64, &mut rng);
        assert_eq!(contribution(0, core::slice::from_ref(&r), &t).unwrap(), t.len());
        assert_eq!(contribution(0, &[r.clone(), r.clone()], &t).unwrap(), t.len());
        assert_eq!(contribution(1, &[r.clone(), r], &t).unwrap(), 0);
    }

    #[test]
    fn contribution_disjoint_halves() {
        let mut rng = RngStream::new(6);
        let a = BitGenome::random(64, &mut rng);
        let b = a.complement();
        let t = TargetSet::from_strings(vec![a.clone(), b.clone(), a.clone(), b.clone()]).unwrap();
        let reps = [a, b];
        assert_eq!(contribution(0, &reps, &t).unwrap(), 2);
        assert_eq!(contribution(1, &reps, &t).unwrap(), 2);
        assert!(contribution(2, &reps, &t).is_err());
    }

    #[test]
    fn perfect_needs_every_schema() {
        let schemata = scenario_1_schemata().unwrap();
        let reps: Vec<_> = schemata.iter().map(|s| s.fixed_pattern().clone()).collect();
        assert!(perfect(&reps, &schemata));
        let mut broken = reps.clone();
        // Position 0 is fixed in every schema.
        broken[2].flip(0);
        assert!(!perfect(&broken, &schemata));
        // Arbitrary values at variable positions do not matter.
        let mut noisy = reps;
        for g in noisy.iter_mut() {
            g.flip(63);
        }
        assert!(perfect(&noisy, &schemata));
    }

    #[test]
    fn scenario_shapes() {
        let mut rng = RngStream::new(7);
        let (t, s) = generate_target(1, &mut rng).unwrap();
        assert_eq!((t.len(), s.len()), (30, 3));
        let (t, s) = generate_target(2, &mut rng).unwrap();
        assert_eq!((t.len(), s.len()), (30, 5));
        let mask = scenario_1_schemata().unwrap()[0].fixed_mask().clone();
        assert!(s.iter().all(|x| x.fixed_mask() == &mask && x.variable_count() == 32));
        let (t, s) = generate_target(3, &mut rng).unwrap();
        assert_eq!((t.len(), s.len()), (50, 5));
        assert!(s.iter().all(|x| (16..=48).contains(&x.variable_count())));
        for (string, &o) in t.strings().iter().zip(t.origin()) {
            assert!(s[o].covered_by(string));
        }
        assert!(generate_target(4, &mut rng).is_err());
        assert!(generate_target(0, &mut rng).is_err());
    }

    #[test]
    fn batch_matches_single_evaluation() {
        let mut rng = RngStream::new(8);
        let problem = StringCover::scenario(3, &mut rng).unwrap();
        let partners: Vec<_> = (0..3).map(|_| BitGenome::random(64, &mut rng)).collect();
        let genomes: Vec<_> = (0..20).map(|_| BitGenome::random(64, &mut rng)).collect();
        let batch = problem.evaluate_batch(&genomes, &partners);
        for (g, f) in genomes.iter().zip(batch) {
            assert_eq!(f, problem.individual_fitness(g, &partners));
        }
    }
}
