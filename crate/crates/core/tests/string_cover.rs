use ccmab_core::string_cover::{
    contribution, generate_target, match_strength, perfect, set_strength, Schema, TargetSet, STRING_LENGTH,
};
use ccmab_core::{BitGenome, RngStream};
use proptest::prelude::*;
use rand::Rng;

fn oracle_set_strength(matches: &[BitGenome], targets: &[BitGenome]) -> f64 {
    let mut total = 0usize;
    for t in targets {
        let mut best = 0;
        for m in matches {
            let mut s = 0;
            for i in 0..t.len() {
                if m.get(i) == t.get(i) {
                    s += 1;
                }
            }
            best = best.max(s);
        }
        total += best;
    }
    total as f64 / targets.len() as f64
}

fn random_strings(n: usize, rng: &mut RngStream) -> Vec<BitGenome> {
    (0..n).map(|_| BitGenome::random(STRING_LENGTH, rng)).collect()
}

#[test]
fn set_strength_matches_double_loop() {
    let mut rng = RngStream::new(0x5e7);
    for _ in 0..1000 {
        let m = random_strings(rng.random_range(1..=6), &mut rng);
        let t = random_strings(rng.random_range(1..=30), &mut rng);
        let targets = TargetSet::from_strings(t.clone()).unwrap();
        assert_eq!(set_strength(&m, &targets).unwrap(), oracle_set_strength(&m, &t));
    }
}

#[test]
fn contributions_partition_the_targets() {
    let mut rng = RngStream::new(0xc0);
    for _ in 0..1000 {
        let mut reps = random_strings(rng.random_range(1..=6), &mut rng);
        if reps.len() > 1 && rng.random_bool(0.3) {
            reps[1] = reps[0].clone();
        }
        let targets = TargetSet::from_strings(random_strings(rng.random_range(1..=30), &mut rng)).unwrap();
        let total: usize = (0..reps.len()).map(|i| contribution(i, &reps, &targets).unwrap()).sum();
        assert_eq!(total, targets.len());
    }
}

fn genome() -> impl Strategy<Value = BitGenome> {
    prop::collection::vec(any::<bool>(), STRING_LENGTH).prop_map(|b| BitGenome::from_bits(&b))
}

proptest! {
    #[test]
    fn set_strength_is_monotone_and_bounded(
        m in prop::collection::vec(genome(), 1..5),
        extra in genome(),
        t in prop::collection::vec(genome(), 1..10),
    ) {
        let targets = TargetSet::from_strings(t.clone()).unwrap();
        let s = set_strength(&m, &targets).unwrap();
        let mut grown = m.clone();
        grown.push(extra);
        prop_assert!(set_strength(&grown, &targets).unwrap() >= s);
        prop_assert!((0.0..=64.0).contains(&s));
        let all_present = t.iter().all(|x| m.contains(x));
        prop_assert_eq!(s == 64.0, all_present);
    }

    #[test]
    fn match_strength_is_symmetric_and_complementary(x in genome(), y in genome()) {
        let s = match_strength(&x, &y).unwrap();
        prop_assert_eq!(s, match_strength(&y, &x).unwrap());
        prop_assert_eq!(match_strength(&x, &y.complement()).unwrap(), 64 - s);
    }
}

#[test]
fn identical_representatives_credit_the_first() {
    let mut rng = RngStream::new(4);
    let a = BitGenome::random(64, &mut rng);
    let reps = vec![a.clone(), a];
    let targets = TargetSet::from_strings(random_strings(12, &mut rng)).unwrap();
    assert_eq!(contribution(0, &reps, &targets).unwrap(), 12);
    assert_eq!(contribution(1, &reps, &targets).unwrap(), 0);
}

#[test]
fn free_schema_instantiates_fair_coins() {
    let schema = Schema::parse(&"#".repeat(64)).unwrap();
    let mut rng = RngStream::new(9);
    let n = 4000;
    let mut ones = [0usize; 64];
    for _ in 0..n {
        let g = schema.instantiate(&mut rng);
        for (i, c) in ones.iter_mut().enumerate() {
            *c += usize::from(g.get(i));
        }
    }
    // 5 sigma per position.
    let bound = 5.0 * (n as f64 * 0.25).sqrt();
    for &c in &ones {
        assert!((c as f64 - n as f64 / 2.0).abs() < bound, "{c}");
    }
}

#[test]
fn perfect_cover_needs_every_fixed_bit() {
    let mut rng = RngStream::new(21);
    for scenario in 1..=3 {
        let (targets, schemata) = generate_target(scenario, &mut rng).unwrap();
        for (t, &o) in targets.strings().iter().zip(targets.origin()) {
            assert!(schemata[o].covered_by(t));
        }
        // One instance per schema is a perfect cover and reaches the fixed
        // bits of every target.
        let reps: Vec<BitGenome> = schemata.iter().map(|s| s.instantiate(&mut rng)).collect();
        assert!(perfect(&reps, &schemata));
        for (t, &o) in targets.strings().iter().zip(targets.origin()) {
            let best = reps.iter().map(|r| match_strength(r, t).unwrap()).max().unwrap();
            assert!(best >= schemata[o].fixed_count());
        }
        let mut broken = reps.clone();
        let s = &schemata[0];
        let pos = (0..64).find(|&i| s.fixed_mask().get(i)).unwrap();
        broken[0].flip(pos);
        if !schemata.iter().skip(1).any(|other| other.covered_by(&broken[0])) {
            let others_cover_first = broken.iter().skip(1).any(|r| s.covered_by(r));
            assert_eq!(perfect(&broken, &schemata), others_cover_first);
        }
    }
}
