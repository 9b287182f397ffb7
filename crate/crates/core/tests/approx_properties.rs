//! Properties of the event machinery and the estimator.

use num_traits::{ToPrimitive, Zero};

use nullcount::approx::{enumerate_events, event_size, karp_luby_estimate};
use nullcount::combinatorics::Count;
use nullcount::oracle::{brute_count_val, model_check, DEFAULT_ENUM_CAP};
use nullcount::query::UnionQuery;
use nullcount::testgen::{DbShape, Gen};

fn union_query(gen: &mut Gen) -> UnionQuery {
    // one or two self-join-free disjuncts over a shared signature
    let first = gen.query(2, 2, 3);
    if gen.rng.below(2) == 0 {
        UnionQuery::from_single(first)
    } else {
        let arities: Vec<(String, usize)> = first
            .signature()
            .iter()
            .map(|(n, &a)| (n.to_string(), a))
            .collect();
        // second disjunct reuses the same relations with fresh variable shapes
        let atoms: Vec<nullcount::query::Atom> = arities
            .iter()
            .map(|(n, a)| {
                let vars: Vec<String> =
                    (0..*a).map(|_| format!("u{}", gen.rng.below(3))).collect();
                let refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
                nullcount::query::Atom::new(n, &refs).unwrap()
            })
            .collect();
        let second = nullcount::query::SjfBCQ::new(atoms).unwrap();
        UnionQuery::new(vec![first, second]).unwrap()
    }
}

#[test]
fn membership_agrees_with_model_checking() {
    let mut gen = Gen::new(0xE7E);
    for round in 0..60 {
        let q = union_query(&mut gen);
        let shape = DbShape {
            uniform: round % 2 == 0,
            max_facts: 3,
            max_nulls: 3,
            ..DbShape::default()
        };
        let db = gen.database(&q.signature(), &shape);
        if db.total_valuations() > Count::from(10_000u32) {
            continue;
        }
        let events = enumerate_events(&q, &db).unwrap();
        for v in db.valuations() {
            let in_some = events.iter().any(|e| e.contains(&v));
            let holds = model_check(&q, &db.apply_valuation(&v).unwrap());
            assert_eq!(in_some, holds, "q = {q}");
        }
    }
}

#[test]
fn union_bound_sandwich() {
    let mut gen = Gen::new(0x5A17D);
    for round in 0..60 {
        let q = union_query(&mut gen);
        let shape = DbShape {
            uniform: round % 2 == 1,
            max_facts: 3,
            max_nulls: 3,
            ..DbShape::default()
        };
        let db = gen.database(&q.signature(), &shape);
        let truth = brute_count_val(&q, &db, DEFAULT_ENUM_CAP).unwrap();
        let events = enumerate_events(&q, &db).unwrap();
        if events.is_empty() {
            assert!(truth.is_zero());
            continue;
        }
        let sizes: Vec<Count> = events.iter().map(|e| event_size(e, &db)).collect();
        let max = sizes.iter().max().unwrap().clone();
        let sum = sizes.iter().fold(Count::zero(), |a, s| a + s);
        assert!(max <= truth, "max event size exceeds the count for {q}");
        assert!(truth <= sum, "count exceeds the union bound for {q}");
    }
}

#[test]
fn estimates_are_reproducible() {
    let mut gen = Gen::new(0xFEED);
    for _ in 0..5 {
        let q = union_query(&mut gen);
        let db = gen.database(&q.signature(), &DbShape::default());
        for workers in [1usize, 3] {
            let a = karp_luby_estimate(&q, &db, 0.3, 0.25, 1234, workers).unwrap();
            let b = karp_luby_estimate(&q, &db, 0.3, 0.25, 1234, workers).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn estimator_rough_calibration() {
    // smoke-level: the acceptance suite runs the full 50x100 calibration
    let mut gen = Gen::new(0xCAB);
    let mut instances = 0;
    while instances < 8 {
        let q = union_query(&mut gen);
        let db = gen.database(&q.signature(), &DbShape::default());
        let truth = brute_count_val(&q, &db, DEFAULT_ENUM_CAP).unwrap();
        if truth.is_zero() {
            continue;
        }
        instances += 1;
        let truth_f = truth.to_f64().unwrap();
        let mut ok = 0;
        for seed in 0..20u64 {
            let e = karp_luby_estimate(&q, &db, 0.2, 0.25, seed, 1).unwrap();
            let est = e.estimate.to_f64().unwrap();
            if (est - truth_f).abs() <= 0.2 * truth_f {
                ok += 1;
            }
        }
        assert!(ok >= 14, "only {ok}/20 seeds within epsilon for {q}");
    }
}

#[test]
fn invalid_tolerances_rejected() {
    let mut gen = Gen::new(1);
    let q = union_query(&mut gen);
    let db = gen.database(&q.signature(), &DbShape::default());
    for (eps, delta) in [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.0), (-0.1, 0.5)] {
        assert!(matches!(
            karp_luby_estimate(&q, &db, eps, delta, 1, 1),
            Err(nullcount::Error::InvalidTolerance)
        ));
    }
}
