//! Variation and selection operators shared by both benchmarks.
//!
//! Every operator takes the caller's [`RngStream`]; replaying with the same
//! stream state gives bit-identical output.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{illegal, invalid, Result};
use crate::genome::{BitGenome, Individual, RealGenome, Sense};
use crate::rng::RngStream;

/// Swaps the segment `[c1, c2)` between two bit strings.
pub fn two_point_crossover_at(
    a: &BitGenome,
    b: &BitGenome,
    c1: usize,
    c2: usize,
) -> Result<(BitGenome, BitGenome)> {
    if a.len() != b.len() {
        return Err(invalid!("crossover length mismatch: {} vs {}", a.len(), b.len()));
    }
    if c1 > c2 || c2 > a.len() {
        return Err(invalid!("cut points ({c1}, {c2}) invalid for length {}", a.len()));
    }
    let mut x = a.clone();
    let mut y = b.clone();
    for i in c1..c2 {
        x.set(i, b.get(i));
        y.set(i, a.get(i));
    }
    Ok((x, y))
}

/// Two-point crossover with both cuts drawn uniformly from `[0, L]`.
pub fn two_point_crossover(
    a: &BitGenome,
    b: &BitGenome,
    rng: &mut RngStream,
) -> Result<(BitGenome, BitGenome)> {
    if a.len() != b.len() {
        return Err(invalid!("crossover length mismatch: {} vs {}", a.len(), b.len()));
    }
    let p: usize = rng.random_range(0..=a.len());
    let q: usize = rng.random_range(0..=a.len());
    two_point_crossover_at(a, b, p.min(q), p.max(q))
}

/// Inverts each bit independently with probability `rate`.
///
/// Positions to flip are reached by geometric skips, which has the same law
/// as one Bernoulli draw per bit but costs one draw per flipped bit.
pub fn flip_bit_mutation(g: &BitGenome, rate: f64, rng: &mut RngStream) -> Result<BitGenome> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(invalid!("flip rate {rate} outside [0, 1]"));
    }
    if rate == 0.0 {
        return Ok(g.clone());
    }
    if rate == 1.0 {
        return Ok(g.complement());
    }
    let mut out = g.clone();
    let log_keep = libm::log1p(-rate);
    let mut pos = 0usize;
    loop {
        // u in (0, 1]
        let u = 1.0 - rng.random::<f64>();
        let gap = libm::floor(libm::log(u) / log_keep);
        if gap >= (out.len() - pos) as f64 {
            break;
        }
        pos += gap as usize;
        out.flip(pos);
        pos += 1;
        if pos >= out.len() {
            break;
        }
    }
    Ok(out)
}

fn sbx_spread(u: f64, eta: f64) -> f64 {
    let exponent = 1.0 / (eta + 1.0);
    if u <= 0.5 {
        libm::pow(2.0 * u, exponent)
    } else {
        libm::pow(1.0 / (2.0 * (1.0 - u)), exponent)
    }
}

/// Simulated binary crossover with explicit uniform draws, one per dimension.
pub fn sbx_crossover_with_draws(
    a: &RealGenome,
    b: &RealGenome,
    eta: f64,
    draws: &[f64],
) -> Result<(RealGenome, RealGenome)> {
    if a.dim() != b.dim() || a.bounds() != b.bounds() {
        return Err(invalid!("SBX parents differ in dimension or bounds"));
    }
    if !(eta > 0.0) {
        return Err(invalid!("SBX distribution index must be positive, got {eta}"));
    }
    if draws.len() != a.dim() {
        return Err(invalid!("{} draws for {} dimensions", draws.len(), a.dim()));
    }
    let mut c1 = Vec::with_capacity(a.dim());
    let mut c2 = Vec::with_capacity(a.dim());
    for ((&x, &y), &u) in a.values().iter().zip(b.values()).zip(draws) {
        if x == y {
            c1.push(x);
            c2.push(y);
            continue;
        }
        let beta = sbx_spread(u, eta);
        c1.push(0.5 * ((1.0 + beta) * x + (1.0 - beta) * y));
        c2.push(0.5 * ((1.0 - beta) * x + (1.0 + beta) * y));
    }
    Ok((
        RealGenome::repaired(c1, a.bounds().to_vec())?,
        RealGenome::repaired(c2, a.bounds().to_vec())?,
    ))
}

/// Simulated binary crossover; children are repaired into bounds.
pub fn sbx_crossover(
    a: &RealGenome,
    b: &RealGenome,
    eta: f64,
    rng: &mut RngStream,
) -> Result<(RealGenome, RealGenome)> {
    let draws: Vec<f64> = (0..a.dim()).map(|_| rng.random::<f64>()).collect();
    sbx_crossover_with_draws(a, b, eta, &draws)
}

/// Adds `N(0, sigma[d]^2)` noise to each dimension with probability `rate`.
pub fn gaussian_mutation(
    g: &RealGenome,
    sigma: &[f64],
    rate: f64,
    rng: &mut RngStream,
) -> Result<RealGenome> {
    if sigma.len() != g.dim() {
        return Err(invalid!("{} sigmas for {} dimensions", sigma.len(), g.dim()));
    }
    if let Some(s) = sigma.iter().find(|s| !(**s >= 0.0)) {
        return Err(invalid!("negative standard deviation {s}"));
    }
    if !(0.0..=1.0).contains(&rate) {
        return Err(invalid!("mutation rate {rate} outside [0, 1]"));
    }
    let mut out = g.clone();
    for (d, &s) in sigma.iter().enumerate() {
        if rng.random::<f64>() < rate {
            let z: f64 = rng.sample(StandardNormal);
            let v = out.values()[d] + s * z;
            out.set(d, v);
        }
    }
    Ok(out)
}

/// Indices of `count` tournament winners; each tournament draws `k`
/// contestants uniformly with replacement, ties go to the earliest index.
pub fn tournament_indices<G>(
    pop: &[Individual<G>],
    k: usize,
    count: usize,
    sense: Sense,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    if pop.is_empty() {
        return Err(invalid!("tournament over an empty population"));
    }
    if k == 0 {
        return Err(invalid!("tournament size must be at least 1"));
    }
    let fitness: Vec<f64> = pop
        .iter()
        .enumerate()
        .map(|(i, ind)| ind.fitness.ok_or_else(|| illegal!("individual {i} is not evaluated")))
        .collect::<Result<_>>()?;
    let mut winners = Vec::with_capacity(count);
    for _ in 0..count {
        let mut best = rng.random_range(0..pop.len());
        for _ in 1..k {
            let c = rng.random_range(0..pop.len());
            if sense.better(fitness[c], fitness[best])
                || (fitness[c] == fitness[best] && c < best)
            {
                best = c;
            }
        }
        winners.push(best);
    }
    Ok(winners)
}

/// Tournament selection returning copies of the winners.
pub fn tournament_select<G: Clone>(
    pop: &[Individual<G>],
    k: usize,
    count: usize,
    sense: Sense,
    rng: &mut RngStream,
) -> Result<Vec<Individual<G>>> {
    Ok(tournament_indices(pop, k, count, sense, rng)?
        .into_iter()
        .map(|i| pop[i].clone())
        .collect())
}

/// Genome-specific crossover and mutation.
pub trait Variation<G> {
    fn crossover(&self, a: &G, b: &G, rng: &mut RngStream) -> Result<(G, G)>;
    fn mutate(&self, g: &G, rng: &mut RngStream) -> Result<G>;
}

/// Two-point crossover and flip-bit mutation.
#[derive(Clone, Debug, PartialEq)]
pub struct BitVariation {
    pub flip_rate: f64,
}

impl Variation<BitGenome> for BitVariation {
    fn crossover(
        &self,
        a: &BitGenome,
        b: &BitGenome,
        rng: &mut RngStream,
    ) -> Result<(BitGenome, BitGenome)> {
        two_point_crossover(a, b, rng)
    }

    fn mutate(&self, g: &BitGenome, rng: &mut RngStream) -> Result<BitGenome> {
        flip_bit_mutation(g, self.flip_rate, rng)
    }
}

/// Simulated binary crossover and Gaussian mutation.
#[derive(Clone, Debug, PartialEq)]
pub struct RealVariation {
    pub eta: f64,
    pub sigma: Vec<f64>,
    pub dim_rate: f64,
}

impl Variation<RealGenome> for RealVariation {
    fn crossover(
        &self,
        a: &RealGenome,
        b: &RealGenome,
        rng: &mut RngStream,
    ) -> Result<(RealGenome, RealGenome)> {
        sbx_crossover(a, b, self.eta, rng)
    }

    fn mutate(&self, g: &RealGenome, rng: &mut RngStream) -> Result<RealGenome> {
        gaussian_mutation(g, &self.sigma, self.dim_rate, rng)
    }
}

/// Produces offspring from a population: consecutive pairs are crossed with
/// probability `crossover_rate` (otherwise cloned), then each child is
/// mutated with probability `mutation_rate`.
pub fn vary<G: Clone, V: Variation<G> + ?Sized>(
    parents: &[Individual<G>],
    variation: &V,
    crossover_rate: f64,
    mutation_rate: f64,
    rng: &mut RngStream,
) -> Result<Vec<G>> {
    let mut offspring: Vec<G> = parents.iter().map(|p| p.genome.clone()).collect();
    for i in (1..offspring.len()).step_by(2) {
        if rng.random::<f64>() < crossover_rate {
            let (x, y) = variation.crossover(&offspring[i - 1], &offspring[i], rng)?;
            offspring[i - 1] = x;
            offspring[i] = y;
        }
    }
    for child in offspring.iter_mut() {
        if rng.random::<f64>() < mutation_rate {
            *child = variation.mutate(child, rng)?;
        }
    }
    Ok(offspring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::Interval;
    use alloc::vec;

    fn bits(s: &str) -> BitGenome {
        BitGenome::parse(s).unwrap()
    }

    #[test]
    fn full_segment_swaps_parents() {
        let a = BitGenome::random(64, &mut RngStream::new(1));
        let b = BitGenome::random(64, &mut RngStream::new(2));
        let (x, y) = two_point_crossover_at(&a, &b, 0, 64).unwrap();
        assert_eq!((x, y), (b.clone(), a.clone()));
        let (x, y) = two_point_crossover_at(&a, &b, 17, 17).unwrap();
        assert_eq!((x, y), (a, b));
    }

    #[test]
    fn crossover_segment_is_half_open() {
        let (x, y) = two_point_crossover_at(&bits("0000"), &bits("1111"), 1, 3).unwrap();
        assert_eq!(x, bits("0110"));
        assert_eq!(y, bits("1001"));
    }

    #[test]
    fn crossover_rejects_mismatch() {
        let mut rng = RngStream::new(0);
        assert!(two_point_crossover(&bits("01"), &bits("011"), &mut rng).is_err());
        assert!(two_point_crossover_at(&bits("01"), &bits("01"), 2, 1).is_err());
        assert!(two_point_crossover_at(&bits("01"), &bits("01"), 0, 3).is_err());
    }

    #[test]
    fn flip_rate_extremes() {
        let mut rng = RngStream::new(3);
        let g = BitGenome::random(64, &mut rng);
        assert_eq!(flip_bit_mutation(&g, 0.0, &mut rng).unwrap(), g);
        assert_eq!(flip_bit_mutation(&g, 1.0, &mut rng).unwrap(), g.complement());
        assert!(flip_bit_mutation(&g, 1.5, &mut rng).is_err());
        assert!(flip_bit_mutation(&g, -0.1, &mut rng).is_err());
    }

    #[test]
    fn sbx_neutral_draw_returns_parents() {
        let b = vec![Interval::new(-5.0, 5.0); 3];
        let a = RealGenome::new(vec![1.0, -2.0, 3.0], b.clone()).unwrap();
        let c = RealGenome::new(vec![-1.0, 4.0, 0.5], b).unwrap();
        let (x, y) = sbx_crossover_with_draws(&a, &c, 2.0, &[0.5; 3]).unwrap();
        assert_eq!((x, y), (a.clone(), c));
        let mut rng = RngStream::new(9);
        let (x, y) = sbx_crossover(&a, &a, 15.0, &mut rng).unwrap();
        assert_eq!((x, y), (a.clone(), a));
    }

    #[test]
    fn sbx_rejects_bad_input() {
        let a = RealGenome::new(vec![0.0], vec![Interval::new(0.0, 1.0)]).unwrap();
        let b = RealGenome::new(vec![0.0, 0.0], vec![Interval::new(0.0, 1.0); 2]).unwrap();
        let mut rng = RngStream::new(0);
        assert!(sbx_crossover(&a, &b, 2.0, &mut rng).is_err());
        assert!(sbx_crossover(&a, &a, 0.0, &mut rng).is_err());
    }

    #[test]
    fn gaussian_zero_sigma_is_identity() {
        let b = vec![Interval::new(0.0, 1.0); 4];
        let g = RealGenome::new(vec![0.1, 0.2, 0.3, 0.4], b).unwrap();
        let mut rng = RngStream::new(5);
        assert_eq!(gaussian_mutation(&g, &[0.0; 4], 1.0, &mut rng).unwrap(), g);
        assert!(gaussian_mutation(&g, &[-1.0, 0.0, 0.0, 0.0], 1.0, &mut rng).is_err());
        assert!(gaussian_mutation(&g, &[1.0], 1.0, &mut rng).is_err());
    }

    #[test]
    fn gaussian_stays_in_bounds() {
        let b = vec![Interval::new(0.0, 1.0), Interval::periodic(0.0, 2.0)];
        let mut rng = RngStream::new(11);
        let mut g = RealGenome::new(vec![0.5, 1.0], b).unwrap();
        for _ in 0..1000 {
            g = gaussian_mutation(&g, &[3.0, 3.0], 1.0, &mut rng).unwrap();
            assert!(g.bounds()[0].contains(g.values()[0]));
            assert!(g.bounds()[1].contains(g.values()[1]));
        }
    }

    #[test]
    fn tournament_requires_fitness() {
        let pop = vec![Individual::evaluated(0u8, 1.0), Individual::new(1u8)];
        let mut rng = RngStream::new(0);
        let err = tournament_select(&pop, 2, 10, Sense::Maximize, &mut rng).unwrap_err();
        assert!(matches!(err, crate::Error::IllegalState(_)));
        assert!(tournament_select::<u8>(&[], 2, 1, Sense::Maximize, &mut rng).is_err());
    }

    #[test]
    fn tournament_single_individual() {
        let pop = vec![Individual::evaluated(7u8, 0.0)];
        let mut rng = RngStream::new(0);
        let w = tournament_select(&pop, 3, 20, Sense::Minimize, &mut rng).unwrap();
        assert!(w.iter().all(|i| i.genome == 7));
    }

    #[test]
    fn tournament_tie_goes_to_earliest() {
        let pop = vec![Individual::evaluated(0u8, 5.0), Individual::evaluated(1u8, 5.0)];
        let mut rng = RngStream::new(4);
        // With k large both contestants almost surely appear; index 0 must win.
        let w = tournament_indices(&pop, 64, 50, Sense::Maximize, &mut rng).unwrap();
        assert!(w.iter().all(|&i| i == 0));
    }

    #[test]
    fn vary_preserves_population_size() {
        let mut rng = RngStream::new(2);
        let parents: Vec<_> = (0..7)
            .map(|_| Individual::new(BitGenome::random(64, &mut rng)))
            .collect();
        let v = BitVariation { flip_rate: 1.0 / 64.0 };
        let kids = vary(&parents, &v, 0.6, 1.0, &mut rng).unwrap();
        assert_eq!(kids.len(), 7);
        assert!(kids.iter().all(|k| k.len() == 64));
    }
}
