mod common;

use common::{mistress_summation, naive_count, random_kb, rat};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use randworlds::dsl::parse_kb;
use randworlds::engine::*;
use randworlds::kb::*;
use randworlds::Rational;

const MISTRESS: &str = "
    pred Apartment; pred Mistress; pred Murderer;
    const Jane;
    fact Apartment(Jane); fact Mistress(Jane);
    stat ||Murderer(x) | Apartment(x) & Mistress(x)||x ~= 3/5;
";

fn tau(s: &str) -> ToleranceSpec {
    ToleranceSpec::uniform(rat(s), 1)
}

fn exact(b: &BeliefEstimate) -> Rational {
    b.value.exact().unwrap().clone()
}

#[test]
fn mistress_small_matches_naive_oracle() {
    let kb = parse_kb(MISTRESS).unwrap();
    let t = rat("1/10");
    let naive_den = naive_count(&kb, 8, &t, None);
    let q = Conjunction::of(&["Murderer"]);
    let naive_num = naive_count(&kb, 8, &t, Some(("Jane", &q)));
    assert_eq!(naive_den, 1_518_888);
    assert_eq!(
        count_models(&kb, 8, &tau("1/10")).unwrap(),
        WorldCount::from(naive_den)
    );
    let b = belief(&kb, &Query::atom("Murderer", "Jane"), 8, &tau("1/10")).unwrap();
    assert_eq!(exact(&b), Rational::new(naive_num.into(), naive_den.into()));
    assert_eq!(exact(&b), rat("60761/108492"));
}

#[test]
fn mistress_large_matches_summation_oracle() {
    let kb = parse_kb(MISTRESS).unwrap();
    let t = rat("1/50");
    let (num, den) = mistress_summation(60, &t);
    let b = belief(&kb, &Query::atom("Murderer", "Jane"), 60, &tau("1/50")).unwrap();
    assert_eq!(b.model_count.as_ref().unwrap().0, den);
    assert_eq!(exact(&b), Rational::new(num.into(), den.into()));
    let v = b.value.as_f64();
    assert!((v - 0.599_710_855_045_182_5).abs() < 1e-12);
    assert!((v - 0.6).abs() < 0.03);
}

#[test]
fn summation_oracle_agrees_with_naive_oracle() {
    let kb = parse_kb(MISTRESS).unwrap();
    for n in 1..=6 {
        let t = rat("1/5");
        let (_, den) = mistress_summation(n, &t);
        assert_eq!(den, BigUint::from(naive_count(&kb, n, &t, None)), "N={n}");
    }
}

#[test]
fn seeded_random_kbs_match_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..40 {
        let k = 1 + case % 3;
        let kb = random_kb(&mut rng, k);
        let n = (kb.constants.len().max(1)..=(18 / k).min(8))
            .nth(case % 4)
            .unwrap_or(kb.constants.len().max(1));
        let t = [rat("1/10"), rat("1/5"), rat("1/20")][case % 3].clone();
        let got = count_models(&kb, n, &ToleranceSpec::uniform(t.clone(), 1)).unwrap();
        assert_eq!(
            got,
            WorldCount::from(naive_count(&kb, n, &t, None)),
            "case {case}: {kb:?} N={n}"
        );
    }
}

#[test]
fn logic_kb_gives_zero_at_every_scheduled_size() {
    let kb = parse_kb("pred Copy; pred Access; const xd; rule forall x: Copy(x) => Access(x); fact not Access(xd);")
        .unwrap();
    let report = converge(&kb, &Query::atom("Copy", "xd"), &default_schedule());
    for p in &report.points {
        assert_eq!(p.value(), Some(&rat("0")), "N={}", p.n);
    }
}

#[test]
fn entailed_query_has_belief_one() {
    let kb = parse_kb("pred P; pred Q; const c; fact P(c); stat ||Q(x) | P(x)||x ~= 0.3;").unwrap();
    let b = belief(&kb, &Query::atom("P", "c"), 6, &tau("0.1")).unwrap();
    assert_eq!(exact(&b), rat("1"));
}

#[test]
fn converge_mistress_fixed_tau() {
    let kb = parse_kb(MISTRESS).unwrap();
    let schedule = ConvergenceSchedule::fixed_tau(&[20, 40, 60], rat("0.05")).unwrap();
    let report = converge(&kb, &Query::atom("Murderer", "Jane"), &schedule);
    assert_eq!(report.deltas.len(), 2);
    let d: Vec<f64> = report
        .deltas
        .iter()
        .map(|d| d.to_f64().unwrap().abs())
        .collect();
    assert!(d[1] < d[0], "{d:?}");
    let last = report.limit_guess.unwrap().to_f64().unwrap();
    assert!((last - 0.6).abs() < 0.05);
    assert!(report.note.contains("tau"));
}

#[test]
fn converge_symmetric_half_is_exact_everywhere() {
    let kb = parse_kb("pred P; pred Q; const c; fact Q(c); stat ||P(x) | Q(x)||x ~= 1/2;").unwrap();
    let report = converge(&kb, &Query::atom("P", "c"), &default_schedule());
    assert!(report.points.iter().all(|p| p.value() == Some(&rat("1/2"))));
    assert!(report.monotone && report.cauchy);
}

#[test]
fn converge_flags_unsatisfiable_point_and_continues() {
    let kb = parse_kb("pred P; pred Q; const c; stat ||P(x)||x ~= 0.6;").unwrap();
    // At N=10 no multiple of 1/10 lies within 1/50 of 0.65; 6/10 is exactly 0.6.
    let kb2 = parse_kb("pred P; pred Q; const c; stat ||P(x)||x ~= 0.65;").unwrap();
    let schedule = ConvergenceSchedule::new(vec![(10, tau("1/50")), (20, tau("1/50"))]).unwrap();
    let report = converge(&kb2, &Query::atom("Q", "c"), &schedule);
    assert!(matches!(
        report.points[0].outcome,
        PointOutcome::Unsatisfiable { .. }
    ));
    assert!(matches!(report.points[1].outcome, PointOutcome::Ok { .. }));
    let ok = converge(&kb, &Query::atom("Q", "c"), &schedule);
    assert!(ok
        .points
        .iter()
        .all(|p| matches!(p.outcome, PointOutcome::Ok { .. })));
    let csv = report.to_csv();
    assert!(csv.starts_with("N,tau,belief_num,belief_den,belief_decimal,model_count_digits"));
    assert!(csv.lines().nth(1).unwrap().ends_with("unsatisfiable"));
}

#[test]
fn schedules_are_validated() {
    assert_eq!(ConvergenceSchedule::new(vec![]), Err(ScheduleError::Empty));
    assert!(matches!(
        ConvergenceSchedule::new(vec![(20, tau("0.1")), (10, tau("0.1"))]),
        Err(ScheduleError::NotIncreasing { .. })
    ));
    assert!(matches!(
        ConvergenceSchedule::new(vec![(10, tau("0.1")), (20, tau("0.2"))]),
        Err(ScheduleError::ToleranceIncreases { .. })
    ));
    let d = default_schedule();
    let taus: Vec<Rational> = d.points().iter().map(|(_, t)| t.taus[0].clone()).collect();
    assert_eq!(
        taus,
        vec![
            rat("1/5"),
            rat("1/10"),
            rat("1/20"),
            rat("1/30"),
            rat("1/40")
        ]
    );
}

#[test]
fn monte_carlo_symmetry_and_determinism() {
    let kb = parse_kb("pred P; const c;").unwrap();
    let cfg = SampleConfig {
        samples: 20_000,
        seed: 3,
    };
    let a = sample_belief(&kb, &Query::atom("P", "c"), 5, &tau("0.1"), cfg).unwrap();
    let b = sample_belief(&kb, &Query::atom("P", "c"), 5, &tau("0.1"), cfg).unwrap();
    assert_eq!(a, b);
    let BeliefValue::Sampled {
        mean, half_width, ..
    } = a.value
    else {
        panic!()
    };
    assert!(half_width > 0.0);
    assert!((mean - 0.5).abs() <= half_width);
    assert_eq!(a.method, Method::MonteCarlo);
}

#[test]
fn monte_carlo_brackets_exact_mistress() {
    let kb = parse_kb(MISTRESS).unwrap();
    let q = Query::atom("Murderer", "Jane");
    let exact = belief(&kb, &q, 8, &tau("0.1")).unwrap().value.as_f64();
    let s = sample_belief(
        &kb,
        &q,
        8,
        &tau("0.1"),
        SampleConfig {
            samples: 200_000,
            seed: 0,
        },
    )
    .unwrap();
    let BeliefValue::Sampled {
        mean,
        half_width,
        accepted,
        ..
    } = s.value
    else {
        panic!()
    };
    assert!(accepted > 1000);
    assert!(
        (mean - exact).abs() <= half_width,
        "{mean} +/- {half_width} vs {exact}"
    );
}

#[test]
fn monte_carlo_errors() {
    let kb = parse_kb("pred P; const c; stat ||P(x)||x ~= 0.65;").unwrap();
    let q = Query::atom("P", "c");
    assert_eq!(
        sample_belief(
            &kb,
            &q,
            10,
            &tau("1/50"),
            SampleConfig {
                samples: 100,
                seed: 1
            }
        ),
        Err(EngineError::NoAcceptedSamples { samples: 100 })
    );
    assert_eq!(
        sample_belief(
            &kb,
            &q,
            10,
            &tau("0.1"),
            SampleConfig {
                samples: 0,
                seed: 1
            }
        ),
        Err(EngineError::NoSamples)
    );
}

fn rename(kb: &KnowledgeBase) -> KnowledgeBase {
    let map = |s: &str| match s {
        "P" => "Zed".to_string(),
        "Q" => "Alpha".to_string(),
        "R" => "Mid".to_string(),
        "a" => "z2".to_string(),
        "b" => "c0".to_string(),
        other => other.to_string(),
    };
    let conj = |c: &Conjunction| {
        Conjunction::from_literals(c.literals().map(|l| Literal {
            predicate: map(&l.predicate),
            negated: l.negated,
        }))
        .unwrap()
    };
    let mut out = KnowledgeBase::new();
    for p in kb.predicates.keys() {
        out.pred(&map(p));
    }
    for c in &kb.constants {
        out.constant(&map(c));
    }
    for r in &kb.rules {
        out.rule(UniversalRule::new(conj(&r.antecedent), conj(&r.consequent)));
    }
    for c in &kb.constraints {
        out.constraint(ProportionConstraint::new(
            conj(&c.target),
            conj(&c.condition),
            c.relation,
            c.value.clone(),
        ));
    }
    for f in &kb.facts {
        out.fact(
            &map(&f.constant),
            Literal {
                predicate: map(&f.literal.predicate),
                negated: f.literal.negated,
            },
        );
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grouped_count_equals_naive(seed in any::<u64>(), k in 1usize..=3, n in 1usize..=5, t in 1u32..=4) {
        let kb = random_kb(&mut ChaCha8Rng::seed_from_u64(seed), k);
        let n = n.max(kb.constants.len());
        let tau = Rational::new(t.into(), 10.into());
        let got = count_models(&kb, n, &ToleranceSpec::uniform(tau.clone(), 1)).unwrap();
        prop_assert_eq!(got, WorldCount::from(naive_count(&kb, n, &tau, None)));
    }

    #[test]
    fn widening_tolerance_never_loses_worlds(seed in any::<u64>(), k in 1usize..=3, n in 2usize..=12, t in 1u32..=9) {
        let kb = random_kb(&mut ChaCha8Rng::seed_from_u64(seed), k);
        let n = n.max(kb.constants.len());
        let narrow = count_models(&kb, n, &ToleranceSpec::uniform(Rational::new(t.into(), 20.into()), 1)).unwrap();
        let wide = count_models(&kb, n, &ToleranceSpec::uniform(Rational::new((t + 1).into(), 20.into()), 1)).unwrap();
        prop_assert!(narrow <= wide);
    }

    #[test]
    fn renaming_preserves_counts(seed in any::<u64>(), k in 1usize..=3, n in 2usize..=10) {
        let kb = random_kb(&mut ChaCha8Rng::seed_from_u64(seed), k);
        let n = n.max(kb.constants.len());
        let t = tau("0.1");
        prop_assert_eq!(count_models(&kb, n, &t).unwrap(), count_models(&rename(&kb), n, &t).unwrap());
    }

    #[test]
    fn beliefs_lie_in_unit_interval(seed in any::<u64>(), k in 1usize..=3, n in 2usize..=10) {
        let mut kb = random_kb(&mut ChaCha8Rng::seed_from_u64(seed), k);
        kb.constant("q");
        let query = Query::atom("P", "q");
        match belief(&kb, &query, n.max(kb.constants.len()), &tau("0.15")) {
            Ok(b) => {
                let v = exact(&b);
                prop_assert!(v >= rat("0") && v <= rat("1"));
            }
            Err(EngineError::Unsatisfiable { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
