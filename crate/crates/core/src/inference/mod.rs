//! Closed-form degrees of belief by reference-class reasoning.
//!
//! [`resolve`] applies the statistic of the most specific reference class
//! known to contain the query constant. [`total_probability_split`]
//! factors a belief through an intermediate property that the target
//! implies, and [`resolve_interval`] bounds a belief by an interval
//! statistic once [`check_lemma_conditions`] holds.
//!
//! Everything here works on the KB's syntax and the rule-respecting atom
//! profiles; the world-counting engine is never consulted, so the two
//! paths can check each other.

mod lemma;

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub use lemma::{check_lemma_conditions, resolve_interval, LemmaCheck, LemmaReport, LemmaRoles};

use crate::dsl::{SourceMap, SourceSpan};
use crate::kb::{
    validate_kb, Conjunction, GroundFact, KbError, KnowledgeBase, ProportionConstraint, Query,
    Relation, RuleLogic,
};
use crate::scalar::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InferenceError {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("direct inference does not apply: {0}")]
    NotApplicable(String),
    #[error("incomparable most-specific reference classes (constraints {0:?})")]
    AmbiguousReferenceClasses(Vec<usize>),
    #[error(
        "statistics of equally specific reference classes are inconsistent (constraints {0:?})"
    )]
    InconsistentStatistics(Vec<usize>),
    #[error("the rules do not make `{target}` imply `{pivot}`")]
    MissingRule { target: String, pivot: String },
    #[error("conditions {0:?} of the interval rule do not hold")]
    ConditionsUnmet(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Justification {
    MostSpecificReferenceClass,
    IntervalCorollary,
    ProductDecomposition,
    /// Rules and facts refute the query.
    LogicalZero,
    /// Rules and facts entail the query.
    LogicalOne,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResolvedValue {
    Point {
        #[serde(with = "crate::scalar::serde_rational")]
        value: Rational,
    },
    Interval {
        #[serde(with = "crate::scalar::serde_rational")]
        lo: Rational,
        #[serde(with = "crate::scalar::serde_rational")]
        hi: Rational,
    },
}

impl ResolvedValue {
    /// Collapses `[a, a]` to a point.
    pub fn interval(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        if lo == hi {
            ResolvedValue::Point { value: lo }
        } else {
            ResolvedValue::Interval { lo, hi }
        }
    }

    pub fn point(&self) -> Option<&Rational> {
        match self {
            ResolvedValue::Point { value } => Some(value),
            ResolvedValue::Interval { .. } => None,
        }
    }

    pub fn bounds(&self) -> (&Rational, &Rational) {
        match self {
            ResolvedValue::Point { value } => (value, value),
            ResolvedValue::Interval { lo, hi } => (lo, hi),
        }
    }

    fn times(&self, other: &ResolvedValue) -> ResolvedValue {
        let (a0, b0) = self.bounds();
        let (a1, b1) = other.bounds();
        ResolvedValue::interval(a0 * a1, b0 * b1)
    }
}

impl fmt::Display for ResolvedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolvedValue::Point { value } => f.write_str(&format_rational(value)),
            ResolvedValue::Interval { lo, hi } => {
                write!(f, "[{}, {}]", format_rational(lo), format_rational(hi))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectInferenceResult {
    pub value: ResolvedValue,
    pub justification: Justification,
    /// Index of the constraint whose statistic was applied.
    pub matched_constraint: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub span: Option<SourceSpan>,
    /// Sub-results of a product decomposition.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub factors: Vec<DirectInferenceResult>,
}

impl DirectInferenceResult {
    fn new(
        value: ResolvedValue,
        justification: Justification,
        matched_constraint: Option<usize>,
    ) -> Self {
        Self {
            value,
            justification,
            matched_constraint,
            span: None,
            factors: Vec::new(),
        }
    }

    /// Fills in source spans of matched constraints from a DSL parse.
    pub fn with_spans(mut self, map: &SourceMap) -> Self {
        self.span = self
            .matched_constraint
            .and_then(|i| map.constraints.get(i).copied());
        self.factors = self
            .factors
            .into_iter()
            .map(|f| f.with_spans(map))
            .collect();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

impl fmt::Display for DirectInferenceResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({:?}", self.value, self.justification)?;
        if let Some(i) = self.matched_constraint {
            write!(f, ", constraint {i}")?;
        }
        f.write_str(")")
    }
}

fn prepare(
    kb: &KnowledgeBase,
    query: &Query,
) -> Result<(RuleLogic, Option<Conjunction>), InferenceError> {
    let report = validate_kb(kb);
    if !report.is_clean() {
        return Err(KbError::Invalid(report).into());
    }
    crate::engine::check_query(kb, query)?;
    Ok((RuleLogic::new(kb)?, kb.known_about(&query.constant)))
}

/// Interval a constraint imposes on the proportion of its target.
fn constraint_interval(c: &ProportionConstraint) -> (Rational, Rational) {
    match c.relation {
        Relation::Approx => (c.value.clone(), c.value.clone()),
        Relation::AtMost => (Rational::zero(), c.value.clone()),
        Relation::AtLeast => (c.value.clone(), Rational::one()),
    }
}

/// Statistic a constraint gives for `target`: its own target, or the
/// complement when `target` is the negation of a single-literal target.
fn statistic_for(c: &ProportionConstraint, target: &Conjunction) -> Option<(Rational, Rational)> {
    let (lo, hi) = constraint_interval(c);
    if &c.target == target {
        return Some((lo, hi));
    }
    let (mut mine, mut theirs) = (c.target.literals(), target.literals());
    match (mine.next(), mine.next(), theirs.next(), theirs.next()) {
        (Some(a), None, Some(b), None) if a.negate() == b => {
            Some((Rational::one() - hi, Rational::one() - lo))
        }
        _ => None,
    }
}

fn intersect(
    kb: &KnowledgeBase,
    indices: &[usize],
    stat: impl Fn(&ProportionConstraint) -> (Rational, Rational),
) -> Result<(Rational, Rational), InferenceError> {
    let mut lo = Rational::zero();
    let mut hi = Rational::one();
    for &i in indices {
        let (a, b) = stat(&kb.constraints[i]);
        lo = lo.max(a);
        hi = hi.min(b);
    }
    if lo > hi {
        return Err(InferenceError::InconsistentStatistics(indices.to_vec()));
    }
    Ok((lo, hi))
}

/// Degree of belief in `query` from the most specific reference class
/// known to contain its constant.
///
/// A one-sided statistic (`<=~ v` or `>=~ v`) on its own yields the
/// interval it allows, except that it resolves to its bound `v` when the
/// rule-respecting profiles of the class put the target's share on the
/// far side of `v`: maximum entropy then concentrates on the bound.
pub fn resolve(kb: &KnowledgeBase, query: &Query) -> Result<DirectInferenceResult, InferenceError> {
    let (logic, known) = prepare(kb, query)?;
    let known = known.ok_or_else(|| {
        InferenceError::NotApplicable(format!("facts about {} conflict", query.constant))
    })?;

    if logic.refutes(&known, &query.target)? {
        return Ok(DirectInferenceResult::new(
            ResolvedValue::Point {
                value: Rational::zero(),
            },
            Justification::LogicalZero,
            None,
        ));
    }
    if logic.entails(&known, &query.target)? {
        return Ok(DirectInferenceResult::new(
            ResolvedValue::Point {
                value: Rational::one(),
            },
            Justification::LogicalOne,
            None,
        ));
    }

    let mut candidates = Vec::new();
    for (i, c) in kb.constraints.iter().enumerate() {
        if statistic_for(c, &query.target).is_some() && logic.entails(&known, &c.condition)? {
            candidates.push(i);
        }
    }
    if candidates.is_empty() {
        return Err(InferenceError::NotApplicable(format!(
            "no statistic for {} whose reference class contains {}",
            query.target, query.constant
        )));
    }

    // Keep the candidates no other candidate is strictly more specific than.
    let cond = |i: usize| &kb.constraints[i].condition;
    let mut maximal = Vec::new();
    for &i in &candidates {
        let mut dominated = false;
        for &j in &candidates {
            if i != j && logic.entails(cond(j), cond(i))? && !logic.entails(cond(i), cond(j))? {
                dominated = true;
                break;
            }
        }
        if !dominated {
            maximal.push(i);
        }
    }
    for &j in &maximal[1..] {
        if !logic.equivalent(cond(maximal[0]), cond(j))? {
            return Err(InferenceError::AmbiguousReferenceClasses(maximal));
        }
    }

    let (mut lo, mut hi) = intersect(kb, &maximal, |c| {
        statistic_for(c, &query.target).expect("candidate")
    })?;
    if lo != hi {
        if let Some(bound) = one_sided_bound(kb, &logic, &maximal, &query.target)? {
            lo = bound.clone();
            hi = bound;
        }
    }
    Ok(DirectInferenceResult::new(
        ResolvedValue::interval(lo, hi),
        Justification::MostSpecificReferenceClass,
        Some(maximal[0]),
    ))
}

fn one_sided_bound(
    kb: &KnowledgeBase,
    logic: &RuleLogic,
    maximal: &[usize],
    target: &Conjunction,
) -> Result<Option<Rational>, InferenceError> {
    let [i] = maximal else { return Ok(None) };
    let c = &kb.constraints[*i];
    let (class, hit) = logic.profile_counts(target, &c.condition)?;
    if class == 0 || c.relation == Relation::Approx {
        return Ok(None);
    }
    let share = Rational::new(hit.into(), class.into());
    let (lo, hi) = statistic_for(c, target).expect("candidate");
    Ok(if lo.is_zero() && share > hi {
        Some(hi)
    } else if hi.is_one() && share < lo {
        Some(lo)
    } else {
        None
    })
}

/// `Pr(target) = Pr(target | pivot) * Pr(pivot)` when the rules make the
/// target imply the pivot, so the `not pivot` branch contributes nothing.
/// Each factor is resolved with [`resolve`]; the first with the pivot
/// added to the constant's facts.
pub fn total_probability_split(
    kb: &KnowledgeBase,
    query: &Query,
    pivot: &Conjunction,
) -> Result<DirectInferenceResult, InferenceError> {
    let (logic, _) = prepare(kb, query)?;
    if !logic.entails(&query.target, pivot)? {
        return Err(InferenceError::MissingRule {
            target: query.target.to_string(),
            pivot: pivot.to_string(),
        });
    }
    let pivot_belief = resolve(kb, &Query::new(query.constant.clone(), pivot.clone()))?;
    if pivot_belief.value.point().is_some_and(Zero::is_zero) {
        let mut result = DirectInferenceResult::new(
            pivot_belief.value.clone(),
            Justification::ProductDecomposition,
            None,
        );
        result.factors = vec![pivot_belief];
        return Ok(result);
    }
    let mut with_pivot = kb.clone();
    for lit in pivot.literals() {
        with_pivot
            .facts
            .insert(GroundFact::new(query.constant.clone(), lit));
    }
    let conditional = resolve(&with_pivot, query)?;
    let value = conditional.value.times(&pivot_belief.value);
    let mut result = DirectInferenceResult::new(
        value,
        Justification::ProductDecomposition,
        conditional.matched_constraint,
    );
    result.factors = vec![conditional, pivot_belief];
    Ok(result)
}

/// [`resolve`], falling back to a [`total_probability_split`] over the
/// consequent of each rule the query target triggers. The first split that
/// resolves wins; otherwise the resolver's own error is returned.
pub fn direct_inference(
    kb: &KnowledgeBase,
    query: &Query,
) -> Result<DirectInferenceResult, InferenceError> {
    let err = match resolve(kb, query) {
        Ok(r) => return Ok(r),
        Err(e @ InferenceError::Kb(_)) => return Err(e),
        Err(e) => e,
    };
    for rule in &kb.rules {
        if query.target.contains_all(&rule.antecedent)
            && !query.target.contains_all(&rule.consequent)
        {
            if let Ok(r) = total_probability_split(kb, query, &rule.consequent) {
                return Ok(r);
            }
        }
    }
    Err(err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_kb;
    use crate::scalar::parse_rational;

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    const MISTRESS_EXT: &str = "
        pred Apartment; pred Mistress; pred Murderer; pred SmokingGun;
        const Jane;
        fact Apartment(Jane); fact Mistress(Jane);
        stat ||Murderer(x) | Apartment(x) & Mistress(x)||x ~= 0.6;
        stat ||Murderer(x) | Mistress(x)||x <=~ 0.05;
        stat ||Murderer(x) | Apartment(x) & Mistress(x) & SmokingGun(x)||x ~= 0.98;
    ";

    #[test]
    fn most_specific_class_wins() {
        let kb = parse_kb(MISTRESS_EXT).unwrap();
        let res = resolve(&kb, &Query::atom("Murderer", "Jane")).unwrap();
        assert_eq!(res.value.point(), Some(&r("3/5")));
        assert_eq!(res.matched_constraint, Some(0));
        assert_eq!(res.justification, Justification::MostSpecificReferenceClass);
    }

    #[test]
    fn negated_query_uses_complement() {
        let kb = parse_kb(MISTRESS_EXT).unwrap();
        let q = Query::new(
            "Jane",
            Conjunction::literal(crate::kb::Literal::neg("Murderer")),
        );
        assert_eq!(resolve(&kb, &q).unwrap().value.point(), Some(&r("2/5")));
    }

    #[test]
    fn incomparable_classes_are_ambiguous() {
        let kb = parse_kb(
            "pred A; pred B; pred T; const c; fact A(c); fact B(c);
             stat ||T(x) | A(x)||x ~= 0.2; stat ||T(x) | B(x)||x ~= 0.7;",
        )
        .unwrap();
        assert_eq!(
            resolve(&kb, &Query::atom("T", "c")),
            Err(InferenceError::AmbiguousReferenceClasses(vec![0, 1]))
        );
    }

    #[test]
    fn no_matching_class_is_not_applicable() {
        let kb = parse_kb("pred A; pred T; const c; stat ||T(x) | A(x)||x ~= 0.2;").unwrap();
        assert!(matches!(
            resolve(&kb, &Query::atom("T", "c")),
            Err(InferenceError::NotApplicable(_))
        ));
    }

    #[test]
    fn equivalent_classes_intersect() {
        let kb = parse_kb(
            "pred A; pred T; const c; fact A(c);
             stat ||T(x) | A(x)||x >=~ 0.2; stat ||T(x) | A(x)||x <=~ 0.4;",
        )
        .unwrap();
        let res = resolve(&kb, &Query::atom("T", "c")).unwrap();
        assert_eq!(
            res.value,
            ResolvedValue::Interval {
                lo: r("0.2"),
                hi: r("0.4")
            }
        );
        let bad = parse_kb("pred A; pred T; const c; fact A(c); stat ||T(x) | A(x)||x >=~ 0.6; stat ||T(x) | A(x)||x <=~ 0.4;")
            .unwrap();
        assert!(matches!(
            resolve(&bad, &Query::atom("T", "c")),
            Err(InferenceError::InconsistentStatistics(_))
        ));
    }

    #[test]
    fn one_sided_statistic_is_interval_unless_entropy_pushes_to_bound() {
        // Half of the class profiles satisfy T, above 0.9: the bound is not binding.
        let kb =
            parse_kb("pred A; pred T; const c; fact A(c); stat ||T(x) | A(x)||x <=~ 0.9;").unwrap();
        let res = resolve(&kb, &Query::atom("T", "c")).unwrap();
        assert_eq!(
            res.value,
            ResolvedValue::Interval {
                lo: r("0"),
                hi: r("0.9")
            }
        );
        let kb =
            parse_kb("pred A; pred T; const c; fact A(c); stat ||T(x) | A(x)||x >=~ 0.9;").unwrap();
        assert_eq!(
            resolve(&kb, &Query::atom("T", "c")).unwrap().value.point(),
            Some(&r("0.9"))
        );
    }

    #[test]
    fn product_decomposition() {
        let kb = parse_kb(
            "pred Copy; pred Access; pred Striking; const xd;
             rule forall x: Copy(x) => Access(x);
             stat ||Copy(x) | Access(x) & Striking(x)||x ~= 0.9;
             stat ||Access(x) | Striking(x)||x ~= 0.8;
             fact Striking(xd);",
        )
        .unwrap();
        let res = total_probability_split(
            &kb,
            &Query::atom("Copy", "xd"),
            &Conjunction::of(&["Access"]),
        )
        .unwrap();
        assert_eq!(res.value.point(), Some(&r("18/25")));
        assert_eq!(res.factors.len(), 2);
        let no_rule = parse_kb("pred Copy; pred Access; const xd;").unwrap();
        assert!(matches!(
            total_probability_split(
                &no_rule,
                &Query::atom("Copy", "xd"),
                &Conjunction::of(&["Access"])
            ),
            Err(InferenceError::MissingRule { .. })
        ));
    }

    #[test]
    fn logical_zero_and_one() {
        let kb = parse_kb("pred Copy; pred Access; const xd; rule forall x: Copy(x) => Access(x); fact not Access(xd);")
            .unwrap();
        let res = resolve(&kb, &Query::atom("Copy", "xd")).unwrap();
        assert_eq!(res.justification, Justification::LogicalZero);
        assert_eq!(res.value.point(), Some(&r("0")));
        let res = resolve(
            &kb,
            &Query::new(
                "xd",
                Conjunction::literal(crate::kb::Literal::neg("Access")),
            ),
        )
        .unwrap();
        assert_eq!(res.justification, Justification::LogicalOne);
    }

    #[test]
    fn json_carries_span() {
        let (kb, map) = crate::dsl::parse_kb_with_spans(MISTRESS_EXT).unwrap();
        let res = resolve(&kb, &Query::atom("Murderer", "Jane"))
            .unwrap()
            .with_spans(&map);
        let span = res.span.unwrap();
        assert!(MISTRESS_EXT[span.begin..span.end].contains("~= 0.6"));
        let json = res.to_json();
        assert!(json.contains("most_specific_reference_class") && json.contains("\"span\""));
    }
}
