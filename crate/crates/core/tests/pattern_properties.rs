//! Property tests for the pattern machinery and the classifier.

use proptest::prelude::*;

use nullcount::query::{
    canonical_pattern, classify, has_pattern, parse_query, pattern_profile, Atom, CanonicalPattern,
    DomainKind, ExactVerdict, Problem, SjfBCQ, TableKind,
};
use nullcount::testgen::Gen;

const ALL_PATTERNS: [CanonicalPattern; 6] = [
    CanonicalPattern::Xx,
    CanonicalPattern::XSx,
    CanonicalPattern::Path,
    CanonicalPattern::XySxy,
    CanonicalPattern::Xy,
    CanonicalPattern::X,
];

fn arb_query(max_atoms: usize, max_arity: usize, max_vars: u8) -> impl Strategy<Value = SjfBCQ> {
    prop::collection::vec(
        prop::collection::vec(0..max_vars, 1..=max_arity),
        1..=max_atoms,
    )
    .prop_map(|raw| {
        let atoms = raw
            .iter()
            .enumerate()
            .map(|(i, vars)| {
                let names: Vec<String> = vars.iter().map(|v| format!("v{v}")).collect();
                let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                Atom::new(&format!("R{i}"), &refs).expect("well-formed atom")
            })
            .collect();
        SjfBCQ::new(atoms).expect("distinct relations")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn prop_profile_agrees_with_generic_checker(q in arb_query(4, 3, 5)) {
        let profile = pattern_profile(&q);
        for p in ALL_PATTERNS {
            prop_assert_eq!(
                profile.contains(p),
                has_pattern(&q, &canonical_pattern(p)),
                "{} vs {}", q, p.query_text()
            );
        }
    }
}

proptest! {
    #[test]
    fn prop_has_pattern_reflexive(q in arb_query(4, 3, 5)) {
        prop_assert!(has_pattern(&q, &q));
    }

    #[test]
    fn prop_derived_queries_are_patterns(q in arb_query(4, 3, 5), seed in any::<u64>(), ops in 0usize..6) {
        let mut gen = Gen::new(seed);
        let derived = gen.derive_pattern(&q, ops);
        prop_assert!(has_pattern(&q, &derived), "{} should have pattern {}", q, derived);
    }

    #[test]
    fn prop_valuations_never_harder_than_completions(q in arb_query(4, 3, 5)) {
        for table in [TableKind::Naive, TableKind::Codd] {
            for domain in [DomainKind::NonUniform, DomainKind::Uniform] {
                let comp = classify(&q, table, domain, Problem::Completions);
                let val = classify(&q, table, domain, Problem::Valuations);
                if comp.exact == ExactVerdict::Fp {
                    // the (codd, uniform) valuation cell stays open rather
                    // than claiming tractability
                    let open_cell =
                        table == TableKind::Codd && domain == DomainKind::Uniform;
                    prop_assert!(
                        val.exact == ExactVerdict::Fp
                            || (open_cell && val.exact == ExactVerdict::Open),
                        "comp FP but val {:?} at {:?}/{:?} for {}",
                        val.exact, table, domain, q
                    );
                }
            }
        }
    }
}

/// The eight cells for the six queries named by the dichotomy table.
#[test]
fn classify_reproduces_the_dichotomy_table() {
    use ExactVerdict::*;
    // (query, cells in loop order:
    //   [val/naive/nonuni, val/naive/uni, val/codd/nonuni, val/codd/uni,
    //    comp/naive/nonuni, comp/naive/uni, comp/codd/nonuni, comp/codd/uni])
    let expected = [
        (
            "R(x,x)",
            [
                SharpPComplete, SharpPComplete, Fp, Open,
                SharpPHard, SharpPHard, SharpPComplete, SharpPComplete,
            ],
        ),
        (
            "R(x) & S(x)",
            [
                SharpPComplete, Fp, SharpPComplete, Open,
                SharpPHard, Fp, SharpPComplete, Fp,
            ],
        ),
        (
            "R(x) & S(x,y) & T(y)",
            [
                SharpPComplete, SharpPComplete, SharpPComplete, SharpPComplete,
                SharpPHard, SharpPHard, SharpPComplete, SharpPComplete,
            ],
        ),
        (
            "R(x,y) & S(x,y)",
            [
                SharpPComplete, SharpPComplete, SharpPComplete, Open,
                SharpPHard, SharpPHard, SharpPComplete, SharpPComplete,
            ],
        ),
        (
            "R(x)",
            [
                Fp, Fp, Fp, Open,
                SharpPHard, Fp, SharpPComplete, Fp,
            ],
        ),
        (
            "R(x,y)",
            [
                Fp, Fp, Fp, Open,
                SharpPHard, SharpPHard, SharpPComplete, SharpPComplete,
            ],
        ),
    ];
    for (text, cells) in expected {
        let q = parse_query(text).unwrap().as_single().unwrap().clone();
        let mut i = 0;
        for problem in [Problem::Valuations, Problem::Completions] {
            for table in [TableKind::Naive, TableKind::Codd] {
                for domain in [DomainKind::NonUniform, DomainKind::Uniform] {
                    let v = classify(&q, table, domain, problem);
                    assert_eq!(
                        v.exact, cells[i],
                        "{text} at {:?}/{:?}/{:?}",
                        problem, table, domain
                    );
                    i += 1;
                }
            }
        }
    }
}
