use ccmab_core::stats::{mann_whitney_u, summarize, wilcoxon_signed_rank, PValueMethod, RunSummary};
use ccmab_core::RngStream;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Null distribution of W+ for ranks 1..n by dynamic programming over
/// subset sums.
fn signed_rank_counts(n: usize) -> Vec<u64> {
    let total = n * (n + 1) / 2;
    let mut c = vec![0u64; total + 1];
    c[0] = 1;
    for r in 1..=n {
        for s in (r..=total).rev() {
            c[s] += c[s - r];
        }
    }
    c
}

fn oracle_signed_rank_p(w_plus: usize, n: usize) -> f64 {
    let counts = signed_rank_counts(n);
    let total = n * (n + 1) / 2;
    let stat = w_plus.min(total - w_plus);
    let hits: u64 = (0..=total).filter(|&w| w.min(total - w) <= stat).map(|w| counts[w]).sum();
    hits as f64 / (1u64 << n) as f64
}

/// Null distribution of U for sample sizes (m, n) by the standard
/// recurrence f(m, n, u) = f(m - 1, n, u - n) + f(m, n - 1, u).
fn rank_sum_counts(m: usize, n: usize) -> Vec<u64> {
    let max = m * n;
    let mut table = vec![vec![vec![0u64; max + 1]; n + 1]; m + 1];
    for (i, row) in table.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i == 0 || j == 0 {
                cell[0] = 1;
            }
        }
    }
    for i in 1..=m {
        for j in 1..=n {
            for u in 0..=i * j {
                let take = if u >= j { table[i - 1][j][u - j] } else { 0 };
                table[i][j][u] = take + table[i][j - 1][u];
            }
        }
    }
    table[m][n].clone()
}

fn oracle_rank_sum_p(u: usize, m: usize, n: usize) -> f64 {
    let counts = rank_sum_counts(m, n);
    let mean = (m * n) as f64 / 2.0;
    let dev = (u as f64 - mean).abs();
    let total: u64 = counts.iter().sum();
    let hits: u64 = counts
        .iter()
        .enumerate()
        .filter(|(v, _)| (*v as f64 - mean).abs() >= dev - 1e-9)
        .map(|(_, c)| c)
        .sum();
    hits as f64 / total as f64
}

#[test]
fn signed_rank_exact_cases_match_oracle() {
    let mut rng = RngStream::new(0x51);
    for _ in 0..300 {
        let n = rng.random_range(1..=12);
        let mut magnitudes: Vec<usize> = (1..=n).collect();
        magnitudes.shuffle(&mut rng);
        let pairs: Vec<(f64, f64)> = magnitudes
            .iter()
            .map(|&m| if rng.random_bool(0.5) { (m as f64, 0.0) } else { (0.0, m as f64) })
            .collect();
        let w_plus: usize = pairs.iter().filter(|(a, _)| *a > 0.0).map(|(a, _)| *a as usize).sum();
        let r = wilcoxon_signed_rank(&pairs);
        assert_eq!(r.method, PValueMethod::Exact);
        assert_eq!(r.w_plus, w_plus as f64);
        assert!((r.p_value - oracle_signed_rank_p(w_plus, n)).abs() < 1e-12);
    }
}

#[test]
fn signed_rank_fixed_values() {
    let all_positive: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, 0.0)).collect();
    let r = wilcoxon_signed_rank(&all_positive);
    assert_eq!((r.statistic, r.p_value), (0.0, 0.0625));
    // Zero differences are dropped before ranking.
    let mut with_zero = all_positive.clone();
    with_zero.push((3.0, 3.0));
    assert_eq!(wilcoxon_signed_rank(&with_zero).n, 5);
    let none = wilcoxon_signed_rank(&[(1.0, 1.0)]);
    assert_eq!((none.p_value, none.method), (1.0, PValueMethod::Degenerate));
}

#[test]
fn rank_sum_exact_cases_match_oracle() {
    let mut rng = RngStream::new(0x3a);
    for _ in 0..300 {
        let m = rng.random_range(1..=5);
        let n = rng.random_range(1..=10 - m);
        let mut values: Vec<usize> = (1..=m + n).collect();
        values.shuffle(&mut rng);
        let a: Vec<f64> = values[..m].iter().map(|&v| v as f64).collect();
        let b: Vec<f64> = values[m..].iter().map(|&v| v as f64).collect();
        let r = mann_whitney_u(&a, &b);
        assert_eq!(r.method, PValueMethod::Exact);
        let u = a.iter().map(|x| b.iter().filter(|y| x > *y).count()).sum::<usize>();
        assert_eq!(r.u_a, u as f64);
        assert!((r.p_value - oracle_rank_sum_p(u, m, n)).abs() < 1e-12);
    }
    let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
    assert!((r.p_value - 0.1).abs() < 1e-12);
}

#[test]
fn normal_approximations_track_the_exact_law() {
    // Beyond the exact cutoffs the approximations should stay close to the
    // oracle laws for tie-free data.
    let mut rng = RngStream::new(0x77);
    for _ in 0..100 {
        let n = rng.random_range(13..=20);
        let pairs: Vec<(f64, f64)> =
            (1..=n).map(|m| if rng.random_bool(0.3) { (m as f64, 0.0) } else { (0.0, m as f64) }).collect();
        let r = wilcoxon_signed_rank(&pairs);
        assert_eq!(r.method, PValueMethod::Normal);
        assert!((r.p_value - oracle_signed_rank_p(r.w_plus as usize, n)).abs() < 0.02);

        let mut values: Vec<usize> = (1..=16).collect();
        values.shuffle(&mut rng);
        let a: Vec<f64> = values[..8].iter().map(|&v| v as f64).collect();
        let b: Vec<f64> = values[8..].iter().map(|&v| v as f64).collect();
        let r = mann_whitney_u(&a, &b);
        assert_eq!(r.method, PValueMethod::Normal);
        assert!((r.p_value - oracle_rank_sum_p(r.u_a as usize, 8, 8)).abs() < 0.02);
    }
}

proptest! {
    #[test]
    fn rank_sum_is_invariant_under_monotone_maps(
        a in prop::collection::vec(-50i32..50, 1..12),
        b in prop::collection::vec(-50i32..50, 1..12),
    ) {
        let f = |x: i32| (x as f64 / 7.0).exp() * 3.0 - 1.0;
        let raw = mann_whitney_u(&a.iter().map(|&x| x as f64).collect::<Vec<_>>(), &b.iter().map(|&x| x as f64).collect::<Vec<_>>());
        let mapped = mann_whitney_u(&a.iter().map(|&x| f(x)).collect::<Vec<_>>(), &b.iter().map(|&x| f(x)).collect::<Vec<_>>());
        prop_assert_eq!(raw, mapped);
    }

    #[test]
    fn signed_rank_is_invariant_under_odd_monotone_maps_of_differences(
        d in prop::collection::vec(-30i32..30, 1..25),
    ) {
        let raw: Vec<(f64, f64)> = d.iter().map(|&x| (x as f64, 0.0)).collect();
        let cubed: Vec<(f64, f64)> = d.iter().map(|&x| ((x as f64).powi(3) * 2.0, 0.0)).collect();
        let (r, c) = (wilcoxon_signed_rank(&raw), wilcoxon_signed_rank(&cubed));
        prop_assert_eq!(r, c);
    }

    #[test]
    fn swapping_sides_keeps_p(pairs in prop::collection::vec((0i32..40, 0i32..40), 1..30)) {
        let p: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (x as f64, y as f64)).collect();
        let q: Vec<(f64, f64)> = p.iter().map(|&(x, y)| (y, x)).collect();
        let (r, s) = (wilcoxon_signed_rank(&p), wilcoxon_signed_rank(&q));
        prop_assert_eq!(r.p_value, s.p_value);
        prop_assert_eq!(r.w_plus, s.w_minus);
        prop_assert!((0.0..=1.0).contains(&r.p_value));
    }
}

#[test]
fn summary_of_mixed_runs() {
    let runs = [
        RunSummary::new(Some(10), 100, 3, 1),
        RunSummary::new(None, 500, 4, 2),
        RunSummary::new(Some(30), 300, 3, 3),
    ];
    let g = summarize(&runs, 500, 25);
    assert_eq!((g.runs, g.successes), (3, 2));
    assert!((g.success_rate - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(g.mean_first_hit, Some(20.0));
    assert_eq!(g.histogram.iter().map(|b| b.count).sum::<usize>(), 2);
}
