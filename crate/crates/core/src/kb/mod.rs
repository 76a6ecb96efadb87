//! Knowledge-base fragment: single variable `x`, unary predicates,
//! constants, universal rules, conditional proportion constraints and
//! ground facts.

mod profile;
mod types;
mod validate;

pub use profile::{
    atom_profiles, atom_profiles_capped, AtomProfile, CompiledConjunction, CompiledRule, RuleLogic,
    Vocabulary, DEFAULT_PREDICATE_CAP,
};
pub use types::{
    Conjunction, DuplicatePredicate, GroundFact, KnowledgeBase, Literal, PredicateSymbol,
    ProportionConstraint, Query, Relation, ToleranceSpec, UniversalRule,
};
pub use validate::{validate_kb, Location, ValidationReport, Violation, ViolationKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KbError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("{count} predicates exceed the profile enumeration cap of {cap}")]
    TooManyPredicates { count: usize, cap: usize },
    #[error("invalid knowledge base:\n{0}")]
    Invalid(ValidationReport),
}
