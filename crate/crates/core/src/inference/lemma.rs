//! Interval bounds through an intermediate property.
//!
//! With a constant `c` known to lie in class `phi0`, a target `xi` that
//! implies `theta`, and `theta`/`xi` otherwise confined to specific
//! statistics, the belief in `theta(c)` lies in whatever interval the KB
//! gives for `||theta | phi0||`. The six syntactic conditions are checked
//! by [`check_lemma_conditions`].

use serde::{Deserialize, Serialize};

use super::{
    intersect, prepare, DirectInferenceResult, InferenceError, Justification, ResolvedValue,
};
use crate::kb::{Conjunction, KbError, KnowledgeBase, Query, RuleLogic};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaRoles {
    /// What is known about the constant.
    pub phi0: Conjunction,
    /// Intermediate property, e.g. access.
    pub theta: Conjunction,
    /// Target that implies `theta`, e.g. copying.
    pub xi: Conjunction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub condition: usize,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failed(&self) -> Vec<usize> {
        self.checks
            .iter()
            .filter(|c| !c.holds)
            .map(|c| c.condition)
            .collect()
    }

    pub fn holds(&self, condition: usize) -> bool {
        self.checks
            .iter()
            .any(|c| c.condition == condition && c.holds)
    }
}

fn decides(logic: &RuleLogic, phi0: &Conjunction, formula: &Conjunction) -> Result<bool, KbError> {
    Ok(logic.entails(phi0, formula)? || logic.refutes(phi0, formula)?)
}

fn mentions_any(conj: &Conjunction, symbols: &[&str]) -> bool {
    symbols.iter().any(|s| conj.mentions(s))
}

/// Checks the six conditions for `query.constant` and `roles`:
///
/// 1. the constant's facts entail `phi0`;
/// 2. the rules entail `xi => theta`;
/// 3. every statistic for `theta` has a reference class that `phi0`
///    either entails or refutes;
/// 4. every statistic for `xi` conditioned on `theta & psi` has `psi`
///    entailed or refuted by `phi0`;
/// 5. `theta`'s symbols occur only in the rule `xi => theta`, as targets
///    of (3) and inside the conditions of (4);
/// 6. `xi`'s symbols occur only in that rule and as targets of (4).
///
/// Entailment is with respect to the KB's universal rules.
pub fn check_lemma_conditions(
    kb: &KnowledgeBase,
    query: &Query,
    roles: &LemmaRoles,
) -> Result<LemmaReport, KbError> {
    let logic = RuleLogic::new(kb)?;
    let theta_syms: Vec<&str> = roles.theta.predicates().collect();
    let xi_syms: Vec<&str> = roles.xi.predicates().collect();
    let mut checks = Vec::new();
    let mut push = |condition: usize, holds: bool, detail: String| {
        checks.push(LemmaCheck {
            condition,
            holds,
            detail,
        })
    };

    let known = kb.known_about(&query.constant);
    let c1 = match &known {
        Some(k) => logic.entails(k, &roles.phi0)?,
        None => false,
    };
    push(
        1,
        c1,
        format!("facts about {} entail {}", query.constant, roles.phi0),
    );

    push(
        2,
        logic.entails(&roles.xi, &roles.theta)?,
        format!("rules entail {} => {}", roles.xi, roles.theta),
    );

    // Problems found per condition 3..=6.
    let mut notes: [Vec<String>; 4] = Default::default();
    for (i, c) in kb.constraints.iter().enumerate() {
        let theta_target = c.target == roles.theta;
        let xi_target = c.target == roles.xi && c.condition.contains_all(&roles.theta);
        if theta_target && !decides(&logic, &roles.phi0, &c.condition)? {
            notes[0].push(format!(
                "constraint {i}: class {} undecided by phi0",
                c.condition
            ));
        }
        let psi = c.condition.minus(&roles.theta);
        if xi_target && !decides(&logic, &roles.phi0, &psi)? {
            notes[1].push(format!("constraint {i}: {} undecided by phi0", psi));
        }
        // Where theta's symbols may appear: the target of (3) and theta inside a (4) condition.
        let theta_ok = if theta_target {
            !mentions_any(&c.condition, &theta_syms)
        } else if xi_target {
            !mentions_any(&psi, &theta_syms) && !mentions_any(&c.target, &theta_syms)
        } else {
            !mentions_any(&c.target, &theta_syms) && !mentions_any(&c.condition, &theta_syms)
        };
        if !theta_ok {
            notes[2].push(format!(
                "constraint {i} mentions theta outside its allowed places"
            ));
        }
        let xi_ok = if xi_target {
            !mentions_any(&c.condition, &xi_syms)
        } else {
            !mentions_any(&c.target, &xi_syms) && !mentions_any(&c.condition, &xi_syms)
        };
        if !xi_ok {
            notes[3].push(format!(
                "constraint {i} mentions xi outside its allowed places"
            ));
        }
    }
    for (i, r) in kb.rules.iter().enumerate() {
        let is_link = r.antecedent == roles.xi && r.consequent == roles.theta;
        if !is_link && theta_syms.iter().any(|s| r.mentions(s)) {
            notes[2].push(format!("rule {i} mentions theta"));
        }
        if !is_link && xi_syms.iter().any(|s| r.mentions(s)) {
            notes[3].push(format!("rule {i} mentions xi"));
        }
    }
    for f in &kb.facts {
        if theta_syms.contains(&f.literal.predicate.as_str()) {
            notes[2].push(format!("fact {f} mentions theta"));
        }
        if xi_syms.contains(&f.literal.predicate.as_str()) {
            notes[3].push(format!("fact {f} mentions xi"));
        }
    }
    for (k, problems) in notes.into_iter().enumerate() {
        let holds = problems.is_empty();
        push(
            k + 3,
            holds,
            if holds {
                "ok".to_string()
            } else {
                problems.join("; ")
            },
        );
    }
    Ok(LemmaReport { checks })
}

/// Interval for `theta(c)` from the statistics whose reference class is
/// equivalent to `phi0`, once all six conditions hold.
pub fn resolve_interval(
    kb: &KnowledgeBase,
    query: &Query,
    roles: &LemmaRoles,
) -> Result<DirectInferenceResult, InferenceError> {
    let (logic, _) = prepare(kb, query)?;
    if query.target != roles.theta {
        return Err(InferenceError::NotApplicable(format!(
            "query {} is not theta = {}",
            query.target, roles.theta
        )));
    }
    let report = check_lemma_conditions(kb, query, roles)?;
    if !report.all_hold() {
        return Err(InferenceError::ConditionsUnmet(report.failed()));
    }
    let mut matched = Vec::new();
    for (i, c) in kb.constraints.iter().enumerate() {
        if c.target == roles.theta && logic.equivalent(&c.condition, &roles.phi0)? {
            matched.push(i);
        }
    }
    if matched.is_empty() {
        return Err(InferenceError::NotApplicable(format!(
            "no statistic for ||{} | {}||",
            roles.theta, roles.phi0
        )));
    }
    let (lo, hi) = intersect(kb, &matched, super::constraint_interval)?;
    Ok(DirectInferenceResult::new(
        ResolvedValue::interval(lo, hi),
        Justification::IntervalCorollary,
        Some(matched[0]),
    ))
}
