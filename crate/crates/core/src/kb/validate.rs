use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::types::{Conjunction, KnowledgeBase};
use crate::scalar::{format_rational, in_unit_interval};

/// Where in a KB a violation was found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    Predicate { name: String },
    Constant { name: String },
    Rule { index: usize },
    Constraint { index: usize },
    Fact { constant: String, predicate: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    UndeclaredPredicate,
    UndeclaredConstant,
    ContradictoryFacts,
    ValueOutOfRange,
    EmptyRule,
    DuplicateDeclaration,
    DuplicatePredicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: Location,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Empty report means well-formed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn push(&mut self, kind: ViolationKind, location: Location, message: String) {
        self.violations.push(Violation {
            kind,
            location,
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_kb(kb: &KnowledgeBase) -> ValidationReport {
    let mut report = ValidationReport::default();

    let check_conj =
        |report: &mut ValidationReport, conj: &Conjunction, loc: &Location, what: &str| {
            for p in conj.predicates() {
                if !kb.predicates.contains_key(p) {
                    report.push(
                        ViolationKind::UndeclaredPredicate,
                        loc.clone(),
                        format!("undeclared predicate `{p}` in {what}"),
                    );
                }
            }
        };

    for (i, rule) in kb.rules.iter().enumerate() {
        let loc = Location::Rule { index: i };
        if rule.antecedent.is_empty() && rule.consequent.is_empty() {
            report.push(
                ViolationKind::EmptyRule,
                loc.clone(),
                format!("rule {i} has two empty sides"),
            );
        }
        check_conj(&mut report, &rule.antecedent, &loc, &format!("rule {i}"));
        check_conj(&mut report, &rule.consequent, &loc, &format!("rule {i}"));
    }

    for (i, c) in kb.constraints.iter().enumerate() {
        let loc = Location::Constraint { index: i };
        check_conj(&mut report, &c.target, &loc, &format!("constraint {i}"));
        check_conj(&mut report, &c.condition, &loc, &format!("constraint {i}"));
        if !in_unit_interval(&c.value) {
            report.push(
                ViolationKind::ValueOutOfRange,
                loc,
                format!(
                    "constraint {i} value {} is outside [0, 1]",
                    format_rational(&c.value)
                ),
            );
        }
    }

    // constant -> predicate -> signs seen
    let mut seen: BTreeMap<(&str, &str), bool> = BTreeMap::new();
    for fact in &kb.facts {
        let loc = Location::Fact {
            constant: fact.constant.clone(),
            predicate: fact.literal.predicate.clone(),
        };
        if !kb.constants.contains(&fact.constant) {
            report.push(
                ViolationKind::UndeclaredConstant,
                loc.clone(),
                format!("undeclared constant `{}` in fact {fact}", fact.constant),
            );
        }
        if !kb.predicates.contains_key(&fact.literal.predicate) {
            report.push(
                ViolationKind::UndeclaredPredicate,
                loc.clone(),
                format!(
                    "undeclared predicate `{}` in fact {fact}",
                    fact.literal.predicate
                ),
            );
        }
        let key = (fact.constant.as_str(), fact.literal.predicate.as_str());
        match seen.get(&key) {
            Some(&negated) if negated != fact.literal.negated => report.push(
                ViolationKind::ContradictoryFacts,
                loc,
                format!(
                    "facts {}({}) and not {}({}) contradict",
                    key.1, key.0, key.1, key.0
                ),
            ),
            _ => {
                seen.insert(key, fact.literal.negated);
            }
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::types::*;
    use crate::scalar::parse_rational;

    #[test]
    fn contradictory_facts_reported_once() {
        let mut kb = KnowledgeBase::new();
        kb.pred("P")
            .constant("c")
            .fact("c", Literal::pos("P"))
            .fact("c", Literal::neg("P"));
        let r = validate_kb(&kb);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.count(ViolationKind::ContradictoryFacts), 1);
    }

    #[test]
    fn out_of_range_value() {
        let mut kb = KnowledgeBase::new();
        kb.pred("P")
            .pred("Q")
            .constraint(ProportionConstraint::approx(
                Conjunction::of(&["P"]),
                Conjunction::of(&["Q"]),
                parse_rational("1.3").unwrap(),
            ));
        let r = validate_kb(&kb);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.count(ViolationKind::ValueOutOfRange), 1);
    }

    #[test]
    fn undeclared_symbols() {
        let mut kb = KnowledgeBase::new();
        kb.pred("P")
            .fact("ghost", Literal::pos("Q"))
            .rule(UniversalRule::implies("P", "R"));
        let r = validate_kb(&kb);
        assert_eq!(r.count(ViolationKind::UndeclaredConstant), 1);
        assert_eq!(r.count(ViolationKind::UndeclaredPredicate), 2);
    }

    #[test]
    fn empty_kb_is_clean() {
        assert!(validate_kb(&KnowledgeBase::new()).is_clean());
    }
}
