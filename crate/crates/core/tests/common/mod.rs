//! Test-only oracles, written independently of the engine.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use randworlds::kb::{
    Conjunction, KnowledgeBase, Literal, ProportionConstraint, Relation, UniversalRule,
};
use randworlds::Rational;
use rayon::prelude::*;

pub fn rat(s: &str) -> Rational {
    randworlds::scalar::parse_rational(s).unwrap()
}

/// Evaluates a conjunction on one element whose truth values are given by
/// name order in `names`.
fn eval(conj: &Conjunction, names: &[String], profile: u64) -> bool {
    conj.literals().all(|lit| {
        let i = names
            .iter()
            .position(|n| *n == lit.predicate)
            .expect("declared predicate");
        let bit = (profile >> i) & 1 == 1;
        bit != lit.negated
    })
}

fn within(c: &ProportionConstraint, tau: &Rational, hits: u64, class: u64) -> bool {
    if class == 0 {
        return false;
    }
    let p = Rational::new(hits.into(), class.into());
    match c.relation {
        Relation::Approx => p >= &c.value - tau && p <= &c.value + tau,
        Relation::AtMost => p <= &c.value + tau,
        Relation::AtLeast => p >= &c.value - tau,
    }
}

/// Counts worlds one at a time: every element gets every truth assignment,
/// constants denote elements `0..m` in name order, and a world counts when
/// it satisfies every rule, fact and constraint. `query`, if given, must
/// also hold for its constant.
pub fn naive_count(
    kb: &KnowledgeBase,
    n: usize,
    tau: &Rational,
    query: Option<(&str, &Conjunction)>,
) -> u64 {
    let names: Vec<String> = kb.predicates.keys().cloned().collect();
    let k = names.len();
    let constants: Vec<&String> = kb.constants.iter().collect();
    assert!(n >= constants.len() && k * n <= 30);
    let bits = k * n;
    let mask = (1u64 << k) - 1;
    let element = |w: u64, e: usize| (w >> (k * e)) & mask;
    let slot = |name: &str| constants.iter().position(|c| *c == name).unwrap();

    let ok = |w: u64| -> bool {
        for e in 0..n {
            let p = element(w, e);
            for r in &kb.rules {
                if eval(&r.antecedent, &names, p) && !eval(&r.consequent, &names, p) {
                    return false;
                }
            }
        }
        for f in &kb.facts {
            let p = element(w, slot(&f.constant));
            if !eval(&Conjunction::literal(f.literal.clone()), &names, p) {
                return false;
            }
        }
        for c in &kb.constraints {
            let (mut class, mut hits) = (0, 0);
            for e in 0..n {
                let p = element(w, e);
                if eval(&c.condition, &names, p) {
                    class += 1;
                    if eval(&c.target, &names, p) {
                        hits += 1;
                    }
                }
            }
            if !within(c, tau, hits, class) {
                return false;
            }
        }
        if let Some((constant, target)) = query {
            if !eval(target, &names, element(w, slot(constant))) {
                return false;
            }
        }
        true
    };
    let total: u64 = 1 << bits;
    let chunk = 1u64 << bits.saturating_sub(8).min(bits);
    (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|i| {
            (i * chunk..((i + 1) * chunk).min(total))
                .filter(|&w| ok(w))
                .count() as u64
        })
        .sum()
}

fn binom(n: usize, k: usize) -> BigUint {
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    r
}

/// Direct summation for the basic mistress KB. Jane is the only constant
/// and lies in the Apartment & Mistress class; of the eight profiles of the
/// other elements two are in that class (with or without Murderer) and six
/// are outside it. Returns (numerator, denominator).
pub fn mistress_summation(n: usize, tau: &Rational) -> (BigUint, BigUint) {
    let v = rat("3/5");
    let ok = |hits: usize, class: usize| {
        let p = Rational::new(hits.into(), class.into());
        p >= &v - tau && p <= &v + tau
    };
    let (mut num, mut den) = (BigUint::zero(), BigUint::zero());
    let others = n - 1;
    for c in 0..=others {
        let outside = binom(others, c) * BigUint::from(6u32).pow((others - c) as u32);
        for t in 0..=c {
            let ways = &outside * binom(c, t);
            if ok(t + 1, c + 1) {
                num += &ways;
                den += &ways;
            }
            if ok(t, c + 1) {
                den += &ways;
            }
        }
    }
    (num, den)
}

const NAMES: [&str; 3] = ["P", "Q", "R"];

fn random_conj<R: Rng>(rng: &mut R, preds: &[&str], max_len: usize) -> Conjunction {
    let len = rng.gen_range(0..=max_len.min(preds.len()));
    let mut pool: Vec<&str> = preds.to_vec();
    let mut lits = Vec::new();
    for _ in 0..len {
        let p = pool.remove(rng.gen_range(0..pool.len()));
        lits.push(if rng.gen_bool(0.5) {
            Literal::pos(p)
        } else {
            Literal::neg(p)
        });
    }
    Conjunction::from_literals(lits).unwrap()
}

fn random_value<R: Rng>(rng: &mut R) -> Rational {
    let den = rng.gen_range(1..=10u32);
    Rational::new(rng.gen_range(0..=den).into(), den.into())
}

/// Random KB over `k` predicates with up to two rules, constraints and
/// constants, and some facts.
pub fn random_kb<R: Rng>(rng: &mut R, k: usize) -> KnowledgeBase {
    let preds = &NAMES[..k];
    let mut kb = KnowledgeBase::new();
    for p in preds {
        kb.pred(p);
    }
    for _ in 0..rng.gen_range(0..=2) {
        let a = random_conj(rng, preds, 2);
        let c = random_conj(rng, preds, 1);
        if !c.is_empty() {
            kb.rule(UniversalRule::new(a, c));
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        let mut target = random_conj(rng, preds, 2);
        if target.is_empty() {
            target = Conjunction::of(&[preds[0]]);
        }
        let condition = random_conj(rng, preds, 2);
        let relation = match rng.gen_range(0..3) {
            0 => Relation::Approx,
            1 => Relation::AtMost,
            _ => Relation::AtLeast,
        };
        kb.constraint(ProportionConstraint::new(
            target,
            condition,
            relation,
            random_value(rng),
        ));
    }
    let constants = ["a", "b"];
    for c in &constants[..rng.gen_range(0..=2)] {
        kb.constant(c);
        for p in preds {
            match rng.gen_range(0..4) {
                0 => {
                    kb.fact(c, Literal::pos(*p));
                }
                1 => {
                    kb.fact(c, Literal::neg(*p));
                }
                _ => {}
            }
        }
    }
    kb
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Direct summation for the striking-similarity KB (Copy => Access,
/// ||Copy | Access & Striking|| ~= rho, ||Access | Striking|| ~= sigma,
/// Striking(xd)). Six profiles respect the rule; three are striking:
/// copy-with-access (a), access only (b), neither (c). The other three
/// are free (weight 3 each). By symmetry the number of worlds whose first
/// element has a given profile is the multinomial times that profile's
/// count over N. Returns the world counts with and without the query Copy(xd).
pub fn striking_summation(
    n: usize,
    rho: &Rational,
    sigma: &Rational,
    tau: &Rational,
) -> (BigUint, BigUint) {
    let inside = |hits: usize, class: usize, v: &Rational| {
        class > 0 && {
            let p = Rational::new(hits.into(), class.into());
            p >= v - tau && p <= v + tau
        }
    };
    let fact_n = factorial(n);
    let (mut num, mut den) = (BigUint::zero(), BigUint::zero());
    for a in 0..=n {
        for b in 0..=n - a {
            if !inside(a, a + b, rho) {
                continue;
            }
            for c in 0..=n - a - b {
                if !inside(a + b, a + b + c, sigma) {
                    continue;
                }
                let r = n - a - b - c;
                let ways = &fact_n / (factorial(a) * factorial(b) * factorial(c) * factorial(r))
                    * BigUint::from(3u32).pow(r as u32);
                num += &ways * BigUint::from(a) / BigUint::from(n);
                den += &ways * BigUint::from(a + b + c) / BigUint::from(n);
            }
        }
    }
    (num, den)
}

/// Shipped `.rwkb` files that parse and validate.
pub const SHIPPED: [&str; 5] = [
    "mistress",
    "mistress_extended",
    "logic",
    "probative",
    "striking",
];

pub fn shipped(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../cli/scenarios")
        .join(format!("{name}.rwkb"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Named KBs for round-trip checks: every scenario builder's output, the
/// shipped scenario files, and seeded random KBs.
pub fn round_trip_corpus() -> Vec<(String, KnowledgeBase)> {
    use randworlds::scenarios::*;
    let mut out: Vec<(String, KnowledgeBase)> = Vec::new();
    for v in MistressVariant::ALL {
        out.push((format!("mistress {v:?}"), build_mistress_kb(v)));
    }
    out.push(("logic".into(), build_logic_kb()));
    out.push((
        "probative".into(),
        build_probative_kb(&rat("9/10")).unwrap(),
    ));
    out.push((
        "striking".into(),
        build_striking_kb(&rat("9/10"), &rat("4/5")).unwrap(),
    ));
    let r = |v: &[&str]| v.iter().map(|s| rat(s)).collect::<Vec<_>>();
    let irr = IrrConfig::from_vecs(
        r(&["0.2", "0.5", "0.9"]),
        vec![r(&["0.3", "0.6"]), r(&["0.4", "0.7"]), r(&["0.5", "0.8"])],
        rat("1/2"),
    )
    .unwrap();
    out.push(("irr n=3 m=2".into(), build_irr_kb(&irr).unwrap()));
    out.push((
        "irr case (2, 1)".into(),
        build_irr_case(&irr, 2, 1).unwrap(),
    ));
    let naf = NafConfig::new(rat("1/2"), rat("1/2"), GammaSpec::Exp, r(&["0.5", "0.9"])).unwrap();
    out.push(("naf n=2".into(), build_naf_kb(&naf).unwrap()));
    out.push(("naf case 1".into(), build_naf_case(&naf, 1).unwrap()));
    for name in SHIPPED {
        out.push((
            format!("{name}.rwkb"),
            randworlds::dsl::parse_kb(&shipped(name)).unwrap(),
        ));
    }
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(20);
    for i in 0..10 {
        out.push((format!("random {i}"), random_kb(&mut rng, 1 + i % 3)));
    }
    out
}

fn grid_value<R: Rng>(rng: &mut R) -> Rational {
    Rational::new(rng.gen_range(0..=20u32).into(), 20u32.into())
}

/// Random monotone grids with `n, m` up to the given sizes and lambda
/// drawn from (0, 1) in steps of 1/1000.
pub fn random_irr_config<R: Rng>(
    rng: &mut R,
    max_n: usize,
    max_m: usize,
) -> randworlds::ExactIrrConfig {
    let (n, m) = (rng.gen_range(1..=max_n), rng.gen_range(1..=max_m));
    let mut alphas: Vec<Rational> = (0..n).map(|_| grid_value(rng)).collect();
    alphas.sort();
    let mut betas = vec![vec![Rational::zero(); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut v = grid_value(rng);
            if i > 0 && betas[i - 1][j] > v {
                v = betas[i - 1][j].clone();
            }
            if j > 0 && betas[i][j - 1] > v {
                v = betas[i][j - 1].clone();
            }
            betas[i][j] = v;
        }
    }
    let lambda = Rational::new(rng.gen_range(1..1000u32).into(), 1000u32.into());
    randworlds::scenarios::IrrConfig::from_vecs(alphas, betas, lambda).unwrap()
}

/// Random outcome model: 2..=6 outcomes over levels 0..=3, integer weights
/// normalized exactly, and a prior in [0, 1]. Without-access weights are
/// positive so every level ratio is finite.
pub fn random_outcome_model<R: Rng>(rng: &mut R) -> randworlds::ExactOutcomeModel {
    let k = rng.gen_range(2..=6);
    let normalize = |w: Vec<u32>| {
        let total: u32 = w.iter().sum();
        w.into_iter()
            .map(|x| Rational::new(x.into(), total.into()))
            .collect::<Vec<_>>()
    };
    let with: Vec<u32> = (0..k).map(|_| rng.gen_range(0..=10)).collect();
    let with = if with.iter().all(|&w| w == 0) {
        vec![1; k]
    } else {
        with
    };
    let without: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=10)).collect();
    randworlds::scenarios::OutcomeModel {
        outcomes: (0..k).map(|i| format!("z{i}")).collect(),
        p_with_access: normalize(with),
        p_without_access: normalize(without),
        similarity_level: (0..k).map(|_| rng.gen_range(0..=3)).collect(),
        prior_access: Rational::new(rng.gen_range(0..=100u32).into(), 100u32.into()),
    }
}

/// A KB built to satisfy the six interval-rule conditions for constant
/// `c`, roles (Phi, Access, Copy), with a random interval `[a, b]` on
/// `||Access | Phi||`: either two one-sided statistics, one upper bound
/// (a = 0), or a point. Optional extras: a copying rate given access and
/// Phi, and an unrelated statistic. Returns the KB and `(a, b)`.
pub fn random_lemma_kb<R: Rng>(rng: &mut R) -> (KnowledgeBase, Rational, Rational) {
    let mut kb = KnowledgeBase::new();
    kb.pred("Phi")
        .pred("Access")
        .pred("Copy")
        .pred("Other")
        .constant("c");
    kb.rule(UniversalRule::implies("Copy", "Access"));
    kb.fact("c", Literal::pos("Phi"));
    let access = Conjunction::of(&["Access"]);
    let phi = Conjunction::of(&["Phi"]);
    let step = |x: u32| Rational::new(x.into(), 20u32.into());
    let (a, b) = match rng.gen_range(0..3) {
        0 => {
            let lo = rng.gen_range(0..=16u32);
            let hi = rng.gen_range(lo + 2..=20);
            kb.constraint(ProportionConstraint::new(
                access.clone(),
                phi.clone(),
                Relation::AtLeast,
                step(lo),
            ));
            kb.constraint(ProportionConstraint::new(
                access.clone(),
                phi.clone(),
                Relation::AtMost,
                step(hi),
            ));
            (step(lo), step(hi))
        }
        1 => {
            let hi = rng.gen_range(2..=20u32);
            kb.constraint(ProportionConstraint::new(
                access.clone(),
                phi.clone(),
                Relation::AtMost,
                step(hi),
            ));
            (Rational::zero(), step(hi))
        }
        _ => {
            let v = rng.gen_range(2..=18u32);
            kb.constraint(ProportionConstraint::approx(
                access.clone(),
                phi.clone(),
                step(v),
            ));
            (step(v), step(v))
        }
    };
    if rng.gen_bool(0.5) {
        let cond = Conjunction::of(&["Access", "Phi"]);
        kb.constraint(ProportionConstraint::approx(
            Conjunction::of(&["Copy"]),
            cond,
            step(rng.gen_range(2..=18)),
        ));
    }
    if rng.gen_bool(0.5) {
        kb.constraint(ProportionConstraint::approx(
            Conjunction::of(&["Other"]),
            phi,
            step(rng.gen_range(2..=18)),
        ));
    }
    (kb, a, b)
}
