//! Evidentiary rules for factual copying: probative similarity with
//! access, the access requirement, and striking similarity.

use super::{exact, unit, ScenarioError};
use crate::kb::{Conjunction, KnowledgeBase, Literal, ProportionConstraint, Query, UniversalRule};
use crate::scalar::Scalar;

/// Constant naming the defendant's work.
pub const DEFENDANT: &str = "xd";

pub fn copy_query() -> Query {
    Query::atom("Copy", DEFENDANT)
}

/// Copying requires access.
pub fn build_logic_kb() -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    kb.pred("Copy")
        .pred("Access")
        .constant(DEFENDANT)
        .rule(UniversalRule::implies("Copy", "Access"));
    kb
}

/// Access plus probative similarity establish copying with rate `eta`,
/// and both were shown at trial. Carries the access requirement so the
/// belief can be split over access.
pub fn build_probative_kb<S: Scalar>(eta: &S) -> Result<KnowledgeBase, ScenarioError> {
    unit(eta, "eta")?;
    let mut kb = build_logic_kb();
    kb.pred("Probative");
    kb.constraint(ProportionConstraint::approx(
        Conjunction::of(&["Copy"]),
        Conjunction::of(&["Access", "Probative"]),
        exact(eta, "eta")?,
    ));
    kb.fact(DEFENDANT, Literal::pos("Access"))
        .fact(DEFENDANT, Literal::pos("Probative"));
    Ok(kb)
}

/// Striking similarity: copying given access and striking similarity at
/// rate `rho`, access given striking similarity at rate `sigma`, and the
/// defendant's work strikingly similar.
pub fn build_striking_kb<S: Scalar>(rho: &S, sigma: &S) -> Result<KnowledgeBase, ScenarioError> {
    unit(rho, "rho")?;
    unit(sigma, "sigma")?;
    let mut kb = build_logic_kb();
    kb.pred("Striking");
    kb.constraint(ProportionConstraint::approx(
        Conjunction::of(&["Copy"]),
        Conjunction::of(&["Access", "Striking"]),
        exact(rho, "rho")?,
    ));
    kb.constraint(ProportionConstraint::approx(
        Conjunction::of(&["Access"]),
        Conjunction::of(&["Striking"]),
        exact(sigma, "sigma")?,
    ));
    kb.fact(DEFENDANT, Literal::pos("Striking"));
    Ok(kb)
}
