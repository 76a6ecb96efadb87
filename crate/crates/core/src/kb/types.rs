use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::{format_rational, serde_rational, Rational};

/// Unary predicate. Binary predicates of the source domain are curried
/// against a fixed constant before they get here.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PredicateSymbol {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curried_from: Option<String>,
}

impl PredicateSymbol {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            curried_from: None,
        }
    }

    pub fn curried(name: impl Into<String>, from: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            curried_from: Some(from.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub predicate: String,
    pub negated: bool,
}

impl Literal {
    pub fn pos(predicate: impl Into<String>) -> Self {
        Self {
            predicate: predicate.into(),
            negated: false,
        }
    }

    pub fn neg(predicate: impl Into<String>) -> Self {
        Self {
            predicate: predicate.into(),
            negated: true,
        }
    }

    pub fn negate(&self) -> Self {
        Self {
            predicate: self.predicate.clone(),
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "not {}(x)", self.predicate)
        } else {
            write!(f, "{}(x)", self.predicate)
        }
    }
}

/// Conjunction of literals over the single variable `x`, keyed by predicate.
///
/// The empty conjunction is logical truth.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Conjunction {
    // predicate -> required truth value
    literals: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("predicate `{0}` appears twice in one conjunction")]
pub struct DuplicatePredicate(pub String);

impl Conjunction {
    pub fn truth() -> Self {
        Self::default()
    }

    pub fn from_literals<I: IntoIterator<Item = Literal>>(
        lits: I,
    ) -> Result<Self, DuplicatePredicate> {
        let mut literals = BTreeMap::new();
        for lit in lits {
            if literals
                .insert(lit.predicate.clone(), !lit.negated)
                .is_some()
            {
                return Err(DuplicatePredicate(lit.predicate));
            }
        }
        Ok(Self { literals })
    }

    /// Builds from positive predicate names.
    pub fn of<S: AsRef<str>>(names: &[S]) -> Self {
        Self::from_literals(names.iter().map(|n| Literal::pos(n.as_ref()))).expect("distinct names")
    }

    pub fn literal(lit: Literal) -> Self {
        Self::from_literals([lit]).expect("single literal")
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.literals.iter().map(|(p, &value)| Literal {
            predicate: p.clone(),
            negated: !value,
        })
    }

    pub fn predicates(&self) -> impl Iterator<Item = &str> {
        self.literals.keys().map(String::as_str)
    }

    pub fn mentions(&self, predicate: &str) -> bool {
        self.literals.contains_key(predicate)
    }

    /// Required value of `predicate`, if constrained.
    pub fn value_of(&self, predicate: &str) -> Option<bool> {
        self.literals.get(predicate).copied()
    }

    /// Conjoins two conjunctions; `None` if they disagree on a predicate.
    pub fn and(&self, other: &Conjunction) -> Option<Conjunction> {
        let mut literals = self.literals.clone();
        for (p, &v) in &other.literals {
            match literals.get(p) {
                Some(&existing) if existing != v => return None,
                _ => {
                    literals.insert(p.clone(), v);
                }
            }
        }
        Some(Conjunction { literals })
    }

    pub fn with(mut self, lit: Literal) -> Result<Self, DuplicatePredicate> {
        if self
            .literals
            .insert(lit.predicate.clone(), !lit.negated)
            .is_some()
        {
            return Err(DuplicatePredicate(lit.predicate));
        }
        Ok(self)
    }

    /// Literals of `self` not present (with the same sign) in `other`.
    pub fn minus(&self, other: &Conjunction) -> Conjunction {
        Conjunction {
            literals: self
                .literals
                .iter()
                .filter(|(p, v)| other.literals.get(*p) != Some(*v))
                .map(|(p, v)| (p.clone(), *v))
                .collect(),
        }
    }

    /// Whether every literal of `other` also appears in `self`.
    pub fn contains_all(&self, other: &Conjunction) -> bool {
        other
            .literals
            .iter()
            .all(|(p, v)| self.literals.get(p) == Some(v))
    }
}

impl fmt::Display for Conjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return f.write_str("true");
        }
        for (i, lit) in self.literals().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{lit}")?;
        }
        Ok(())
    }
}

impl Serialize for Conjunction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let lits: Vec<Literal> = self.literals().collect();
        lits.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Conjunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let lits = Vec::<Literal>::deserialize(d)?;
        Conjunction::from_literals(lits).map_err(serde::de::Error::custom)
    }
}

/// `forall x: antecedent => consequent`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UniversalRule {
    pub antecedent: Conjunction,
    pub consequent: Conjunction,
}

impl UniversalRule {
    pub fn new(antecedent: Conjunction, consequent: Conjunction) -> Self {
        Self {
            antecedent,
            consequent,
        }
    }

    /// `P(x) => Q(x)` for positive literals.
    pub fn implies(from: &str, to: &str) -> Self {
        Self::new(Conjunction::of(&[from]), Conjunction::of(&[to]))
    }

    pub fn mentions(&self, predicate: &str) -> bool {
        self.antecedent.mentions(predicate) || self.consequent.mentions(predicate)
    }
}

impl fmt::Display for UniversalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "forall x: {} => {}", self.antecedent, self.consequent)
    }
}

/// Approximate relation between a proportion and its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `~=`: within `[v - tau, v + tau]`.
    Approx,
    /// `<=~`: at most `v + tau`.
    AtMost,
    /// `>=~`: at least `v - tau`.
    AtLeast,
}

impl Relation {
    pub fn token(self) -> &'static str {
        match self {
            Relation::Approx => "~=",
            Relation::AtMost => "<=~",
            Relation::AtLeast => ">=~",
        }
    }
}

/// `||target | condition||x REL value`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProportionConstraint {
    pub target: Conjunction,
    pub condition: Conjunction,
    pub relation: Relation,
    #[serde(with = "serde_rational")]
    pub value: Rational,
    #[serde(default)]
    pub tolerance_index: usize,
}

impl ProportionConstraint {
    pub fn new(
        target: Conjunction,
        condition: Conjunction,
        relation: Relation,
        value: Rational,
    ) -> Self {
        Self {
            target,
            condition,
            relation,
            value,
            tolerance_index: 0,
        }
    }

    pub fn approx(target: Conjunction, condition: Conjunction, value: Rational) -> Self {
        Self::new(target, condition, Relation::Approx, value)
    }

    pub fn with_tolerance_index(mut self, index: usize) -> Self {
        self.tolerance_index = index;
        self
    }
}

impl fmt::Display for ProportionConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "||{} | {}||x {} {}",
            self.target,
            self.condition,
            self.relation.token(),
            format_rational(&self.value)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundFact {
    pub constant: String,
    pub literal: Literal,
}

impl GroundFact {
    pub fn new(constant: impl Into<String>, literal: Literal) -> Self {
        Self {
            constant: constant.into(),
            literal,
        }
    }
}

impl fmt::Display for GroundFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let not = if self.literal.negated { "not " } else { "" };
        write!(f, "{not}{}({})", self.literal.predicate, self.constant)
    }
}

/// Per-index tolerances; every entry must be positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ToleranceSpec {
    #[serde(with = "serde_rational::vec")]
    pub taus: Vec<Rational>,
}

impl ToleranceSpec {
    pub fn new(taus: Vec<Rational>) -> Self {
        Self { taus }
    }

    pub fn uniform(tau: Rational, count: usize) -> Self {
        Self {
            taus: vec![tau; count.max(1)],
        }
    }

    pub fn get(&self, index: usize) -> Option<&Rational> {
        self.taus.get(index)
    }

    pub fn is_valid(&self) -> bool {
        use num_traits::Signed;
        !self.taus.is_empty() && self.taus.iter().all(|t| t.is_positive())
    }

    /// Elementwise widening; a shorter spec is padded with its last entry.
    pub fn max_with(&self, other: &ToleranceSpec) -> ToleranceSpec {
        let len = self.taus.len().max(other.taus.len());
        let at = |s: &ToleranceSpec, i: usize| s.taus.get(i).or(s.taus.last()).cloned();
        ToleranceSpec {
            taus: (0..len)
                .map(|i| match (at(self, i), at(other, i)) {
                    (Some(a), Some(b)) => a.max(b),
                    (Some(a), None) | (None, Some(a)) => a,
                    (None, None) => unreachable!(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for ToleranceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.taus.iter().map(format_rational).collect();
        f.write_str(&parts.join(";"))
    }
}

/// Vocabulary, constants, rules, proportion constraints and ground facts.
///
/// Predicates, constants and facts are kept in sorted containers so two
/// knowledge bases with the same content compare equal regardless of the
/// order they were assembled in. Rules and constraints keep their order;
/// constraint indices are referenced by inference results.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    #[serde(with = "predicate_list")]
    pub predicates: BTreeMap<String, PredicateSymbol>,
    pub constants: BTreeSet<String>,
    pub rules: Vec<UniversalRule>,
    pub constraints: Vec<ProportionConstraint>,
    pub facts: BTreeSet<GroundFact>,
}

mod predicate_list {
    use super::*;

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<String, PredicateSymbol>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let v: Vec<&PredicateSymbol> = m.values().collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<String, PredicateSymbol>, D::Error> {
        let v = Vec::<PredicateSymbol>::deserialize(d)?;
        let mut m = BTreeMap::new();
        for p in v {
            let name = p.name.clone();
            if m.insert(name.clone(), p).is_some() {
                return Err(serde::de::Error::custom(format!(
                    "duplicate predicate `{name}`"
                )));
            }
        }
        Ok(m)
    }
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_predicate(&mut self, p: PredicateSymbol) -> &mut Self {
        self.predicates.insert(p.name.clone(), p);
        self
    }

    pub fn pred(&mut self, name: &str) -> &mut Self {
        self.add_predicate(PredicateSymbol::new(name))
    }

    pub fn constant(&mut self, name: &str) -> &mut Self {
        self.constants.insert(name.to_string());
        self
    }

    pub fn rule(&mut self, rule: UniversalRule) -> &mut Self {
        self.rules.push(rule);
        self
    }

    pub fn constraint(&mut self, c: ProportionConstraint) -> &mut Self {
        self.constraints.push(c);
        self
    }

    pub fn fact(&mut self, constant: &str, literal: Literal) -> &mut Self {
        self.facts.insert(GroundFact::new(constant, literal));
        self
    }

    pub fn predicate_names(&self) -> impl Iterator<Item = &str> {
        self.predicates.keys().map(String::as_str)
    }

    /// Conjunction of the literals known about `constant`; `None` when the
    /// facts about it contradict each other.
    pub fn known_about(&self, constant: &str) -> Option<Conjunction> {
        let mut conj = Conjunction::truth();
        for f in self.facts.iter().filter(|f| f.constant == constant) {
            conj = conj.and(&Conjunction::literal(f.literal.clone()))?;
        }
        Some(conj)
    }

    /// Number of tolerance slots referenced by the constraints.
    pub fn tolerance_slots(&self) -> usize {
        self.constraints
            .iter()
            .map(|c| c.tolerance_index + 1)
            .max()
            .unwrap_or(0)
    }

    /// Copy of this KB with `query` asserted as ground facts.
    pub fn with_query_facts(&self, query: &Query) -> KnowledgeBase {
        let mut kb = self.clone();
        for lit in query.target.literals() {
            kb.facts
                .insert(GroundFact::new(query.constant.clone(), lit));
        }
        kb
    }
}

/// Query `target(constant)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    pub constant: String,
    pub target: Conjunction,
}

impl Query {
    pub fn new(constant: impl Into<String>, target: Conjunction) -> Self {
        Self {
            constant: constant.into(),
            target,
        }
    }

    pub fn atom(predicate: &str, constant: &str) -> Self {
        Self::new(constant, Conjunction::of(&[predicate]))
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.target.is_empty() {
            return f.write_str("true");
        }
        for (i, lit) in self.target.literals().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{}", GroundFact::new(self.constant.clone(), lit))?;
        }
        Ok(())
    }
}
