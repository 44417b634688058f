//! Nonparametric tests and run summaries.
//!
//! Both tests rank with average ranks on ties. Small samples get exact
//! p-values by enumerating the permutation distribution (using the observed,
//! possibly tied, ranks); larger samples use the normal approximation with
//! tie and continuity corrections. All p-values are two-sided.

use alloc::vec;
use alloc::vec::Vec;

/// Largest number of non-zero differences tested exactly.
pub const SIGNED_RANK_EXACT_MAX: usize = 12;
/// Largest combined sample size tested exactly.
pub const RANK_SUM_EXACT_MAX: usize = 10;

const RANK_EPS: f64 = 1e-9;

/// Average ranks (1-based) of `values`, ties sharing their mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Positions i..j share ranks i+1..=j.
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Sizes of the groups of tied values.
fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        groups.push(j - i);
        i = j;
    }
    groups
}

/// Standard normal cumulative distribution.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PValueMethod {
    Exact,
    Normal,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignedRankResult {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Number of non-zero differences.
    pub n: usize,
    pub p_value: f64,
    pub method: PValueMethod,
}

/// Wilcoxon signed-rank test on paired samples `(a, b)`, differences `a - b`.
/// Zero differences are dropped.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> SignedRankResult {
    let diffs: Vec<f64> = pairs.iter().map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return SignedRankResult {
            statistic: 0.0,
            w_plus: 0.0,
            w_minus: 0.0,
            n,
            p_value: 1.0,
            method: PValueMethod::Degenerate,
        };
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus.min(w_minus);

    let (p_value, method) = if n <= SIGNED_RANK_EXACT_MAX {
        let mut extreme = 0u64;
        for signs in 0u64..(1 << n) {
            let plus: f64 = (0..n).filter(|i| signs >> i & 1 == 1).map(|i| ranks[i]).sum();
            if plus.min(total - plus) <= statistic + RANK_EPS {
                extreme += 1;
            }
        }
        (extreme as f64 / (1u64 << n) as f64, PValueMethod::Exact)
    } else {
        let nf = n as f64;
        let ties: f64 = tie_groups(&magnitudes)
            .iter()
            .map(|&t| (t * t * t - t) as f64)
            .sum();
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
        let mean = total / 2.0;
        normal_p(statistic, mean, var)
    };
    SignedRankResult { statistic, w_plus, w_minus, n, p_value, method }
}

fn normal_p(statistic: f64, mean: f64, var: f64) -> (f64, PValueMethod) {
    if var <= 0.0 {
        return (1.0, PValueMethod::Degenerate);
    }
    let excess = ((statistic - mean).abs() - 0.5).max(0.0);
    let z = excess / libm::sqrt(var);
    ((2.0 * normal_cdf(-z)).min(1.0), PValueMethod::Normal)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankSumResult {
    pub u_a: f64,
    pub u_b: f64,
    pub p_value: f64,
    pub method: PValueMethod,
}

/// Mann-Whitney U test for two independent samples.
///
/// Empty samples give a degenerate result with p = 1.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> RankSumResult {
    let (na, nb) = (a.len(), b.len());
    if na == 0 || nb == 0 {
        return RankSumResult { u_a: 0.0, u_b: 0.0, p_value: 1.0, method: PValueMethod::Degenerate };
    }
    let combined: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&combined);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u_a = rank_sum_a - (na * (na + 1)) as f64 / 2.0;
    let u_b = (na * nb) as f64 - u_a;
    let mean = (na * nb) as f64 / 2.0;
    let observed = (u_a - mean).abs();

    let n = na + nb;
    let (p_value, method) = if n <= RANK_SUM_EXACT_MAX {
        let offset = (na * (na + 1)) as f64 / 2.0;
        let mut extreme = 0u64;
        let mut total = 0u64;
        for subset in 0u32..(1 << n) {
            if subset.count_ones() as usize != na {
                continue;
            }
            total += 1;
            let sum: f64 = (0..n).filter(|i| subset >> i & 1 == 1).map(|i| ranks[i]).sum();
            if ((sum - offset) - mean).abs() >= observed - RANK_EPS {
                extreme += 1;
            }
        }
        (extreme as f64 / total as f64, PValueMethod::Exact)
    } else {
        let nf = n as f64;
        let ties: f64 = tie_groups(&combined).iter().map(|&t| (t * t * t - t) as f64).sum();
        let var = (na * nb) as f64 / 12.0 * ((nf + 1.0) - ties / (nf * (nf - 1.0)));
        normal_p(u_a.min(u_b), mean, var)
    };
    RankSumResult { u_a, u_b, p_value, method }
}

/// Outcome of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunSummary {
    pub first_hit_step: Option<usize>,
    pub success: bool,
    pub evaluations: u64,
    pub final_species: usize,
    pub seed: u64,
}

impl RunSummary {
    pub fn new(first_hit_step: Option<usize>, evaluations: u64, final_species: usize, seed: u64) -> Self {
        Self { first_hit_step, success: first_hit_step.is_some(), evaluations, final_species, seed }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HistogramBin {
    /// Inclusive lower edge.
    pub low: usize,
    /// Exclusive upper edge.
    pub high: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Aggregate {
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Over successful runs only.
    pub mean_first_hit: Option<f64>,
    pub median_first_hit: Option<f64>,
    pub mean_final_species: Option<f64>,
    pub mean_evaluations: Option<f64>,
    pub histogram: Vec<HistogramBin>,
}

/// Aggregates runs; first-hit statistics and the histogram cover successful
/// runs only. Bins of width `bin_width` span `[0, budget]`; a first hit
/// beyond the budget extends the last bin.
pub fn summarize(runs: &[RunSummary], budget: usize, bin_width: usize) -> Aggregate {
    let bin_width = bin_width.max(1);
    let mut hits: Vec<usize> = runs.iter().filter_map(|r| r.first_hit_step).collect();
    hits.sort_unstable();
    let successes = hits.len();
    let mean = |xs: &mut dyn Iterator<Item = f64>, n: usize| {
        (n > 0).then(|| xs.sum::<f64>() / n as f64)
    };
    let mean_first_hit = mean(&mut hits.iter().map(|&h| h as f64), successes);
    let median_first_hit = (successes > 0).then(|| {
        if successes % 2 == 1 {
            hits[successes / 2] as f64
        } else {
            (hits[successes / 2 - 1] + hits[successes / 2]) as f64 / 2.0
        }
    });

    let top = budget.max(hits.last().copied().unwrap_or(0) + 1);
    let n_bins = top.div_ceil(bin_width).max(1);
    let mut histogram: Vec<HistogramBin> = (0..n_bins)
        .map(|b| HistogramBin { low: b * bin_width, high: (b + 1) * bin_width, count: 0 })
        .collect();
    for &h in &hits {
        let b = (h / bin_width).min(n_bins - 1);
        histogram[b].count += 1;
    }

    Aggregate {
        runs: runs.len(),
        successes,
        success_rate: if runs.is_empty() { 0.0 } else { successes as f64 / runs.len() as f64 },
        mean_first_hit,
        median_first_hit,
        mean_final_species: mean(&mut runs.iter().map(|r| r.final_species as f64), runs.len()),
        mean_evaluations: mean(&mut runs.iter().map(|r| r.evaluations as f64), runs.len()),
        histogram,
    }
}
