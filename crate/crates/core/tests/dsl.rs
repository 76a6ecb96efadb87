mod common;

use common::{random_kb, round_trip_corpus, shipped, SHIPPED};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use randworlds::dsl::*;
use randworlds::kb::*;

#[test]
fn corpus_round_trips() {
    let corpus = round_trip_corpus();
    assert!(corpus.len() >= 20);
    for (name, kb) in &corpus {
        let text = print_kb(kb);
        let back = parse_kb(&text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
        assert_eq!(&back, kb, "{name}");
        assert_eq!(
            print_kb(&back),
            text,
            "{name}: printing is not a fixed point"
        );
        assert_eq!(&kb_from_json(&kb_to_json(kb)).unwrap(), kb, "{name}: json");
    }
}

#[test]
fn shipped_files_validate() {
    for name in SHIPPED {
        let kb = parse_kb(&shipped(name)).unwrap();
        assert!(validate_kb(&kb).is_clean(), "{name}");
    }
    let kb = parse_kb(&shipped("mistress")).unwrap();
    assert_eq!((kb.facts.len(), kb.constraints.len()), (2, 1));
    assert!(matches!(
        parse_kb(&shipped("broken")),
        Err(DslError::Syntax(_))
    ));
    assert!(matches!(
        parse_kb(&shipped("contradictory")),
        Err(DslError::Validation(_))
    ));
}

#[test]
fn tolerance_slots_survive() {
    let text = "pred P; pred Q; stat ||P(x) | Q(x)||x ~= 1/3 tol 1; stat ||Q(x)||x >=~ 0.25;";
    let kb = parse_kb(text).unwrap();
    assert_eq!(kb.tolerance_slots(), 2);
    assert_eq!(kb.constraints[0].tolerance_index, 1);
    assert_eq!(kb.constraints[1].condition, Conjunction::truth());
    assert_eq!(parse_kb(&print_kb(&kb)).unwrap(), kb);
}

#[test]
fn query_examples() {
    let striking = parse_kb(&shipped("striking")).unwrap();
    let q = parse_query("Copy(xd)", &striking).unwrap();
    assert_eq!(q, Query::atom("Copy", "xd"));
    assert!(
        matches!(parse_query("Copy(ghost)", &striking), Err(DslError::UnknownSymbol { name, .. }) if name == "ghost")
    );
    let mistress = parse_kb(&shipped("mistress")).unwrap();
    assert_eq!(
        parse_query("Murderer(Jane)", &mistress).unwrap(),
        Query::atom("Murderer", "Jane")
    );
    let both = parse_query("Murderer(Jane) & not Apartment(Jane)", &mistress).unwrap();
    assert_eq!(both.target.len(), 2);
    assert!(parse_query("Murderer(Jane) & Apartment(John)", &mistress).is_err());
}

#[test]
fn range_error_points_at_value() {
    let text = "pred P; pred Q; stat ||P(x) | Q(x)||x ~= 1.7;";
    match parse_kb(text) {
        Err(DslError::Validation(diagnostics)) => {
            let span = diagnostics[0].span.expect("value span");
            assert_eq!(&text[span.begin..span.end], "1.7");
        }
        other => panic!("{other:?}"),
    }
}

fn spans(err: &DslError) -> Vec<SourceSpan> {
    match err {
        DslError::Syntax(errors) => errors.iter().map(|e| e.span).collect(),
        DslError::UnknownSymbol { span, .. } => vec![*span],
        DslError::Validation(diagnostics) => diagnostics.iter().filter_map(|d| d.span).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_kbs_round_trip(seed in any::<u64>(), k in 1usize..=3) {
        let kb = random_kb(&mut ChaCha8Rng::seed_from_u64(seed), k);
        let text = print_kb(&kb);
        prop_assert_eq!(parse_kb(&text).unwrap(), kb);
    }

    #[test]
    fn error_spans_lie_within_input(text in "[a-z|&~=<>;:(). 0-9/#\n]{0,60}") {
        if let Err(e) = parse_kb(&text) {
            for s in spans(&e) {
                prop_assert!(s.begin <= s.end && s.end <= text.len(), "{s:?} in {text:?}");
            }
        }
    }

    #[test]
    fn mutated_kbs_error_inside_input(seed in any::<u64>(), cut in 0usize..200) {
        let text = print_kb(&random_kb(&mut ChaCha8Rng::seed_from_u64(seed), 3));
        let cut = cut.min(text.len());
        let text = &text[..cut];
        if let Err(e) = parse_kb(text) {
            for s in spans(&e) {
                prop_assert!(s.begin <= s.end && s.end <= text.len());
            }
        }
    }

    #[test]
    fn satisfies_is_monotone_under_extension(bits in 0u32..16, a in 0usize..81, b in 0usize..81) {
        let vocab = Vocabulary::new(["P", "Q", "R", "S"]);
        let names = ["P", "Q", "R", "S"];
        // Base-3 digits: absent, positive, negative.
        let conj = |code: usize| {
            let lits = (0..4).filter_map(|i| match code / 3usize.pow(i as u32) % 3 {
                1 => Some(Literal::pos(names[i])),
                2 => Some(Literal::neg(names[i])),
                _ => None,
            });
            Conjunction::from_literals(lits).unwrap()
        };
        let (ca, cb) = (conj(a), conj(b));
        if let Some(both) = ca.and(&cb) {
            let p = AtomProfile::new(bits, 4);
            if vocab.satisfies(p, &both).unwrap() {
                prop_assert!(vocab.satisfies(p, &ca).unwrap());
                prop_assert!(vocab.satisfies(p, &cb).unwrap());
            }
        }
    }
}

#[test]
fn atom_profiles_are_distinct_powers_of_two() {
    for k in 0..=6 {
        let names: Vec<String> = (0..k).map(|i| format!("P{i}")).collect();
        let profiles = atom_profiles(&Vocabulary::new(names)).unwrap();
        assert_eq!(profiles.len(), 1 << k);
        let distinct: std::collections::BTreeSet<_> = profiles.iter().copied().collect();
        assert_eq!(distinct.len(), 1 << k);
    }
}
