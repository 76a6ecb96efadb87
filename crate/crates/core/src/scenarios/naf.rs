//! Near access-freeness (NAF) for generative models.
//!
//! A model is epsilon-NAF when no similarity-level event is more than
//! `gamma(epsilon)` times as likely with access to a work as without. By
//! Bayes' rule that caps the belief in access given any level at
//! `Gamma = gamma * delta / (1 + delta * (gamma - 1))`, where `delta` is the
//! prior rate of access, and so caps the belief in copying at
//! `alpha'_i * Gamma`.

use serde::{Deserialize, Serialize};

use super::evidence::DEFENDANT;
use super::irr::{level_condition, similar};
use super::{exact, unit, ScenarioError};
use crate::inference::LemmaRoles;
use crate::kb::{
    Conjunction, KnowledgeBase, Literal, ProportionConstraint, Relation, UniversalRule,
};
use crate::scalar::{serde_scalar, Scalar};
use crate::Rational;

/// Increasing family `gamma(epsilon) > 1` for `epsilon > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GammaSpec {
    /// `exp(epsilon)`, evaluated in `f64`; exact scalars take the float's
    /// exact rational value.
    #[default]
    Exp,
    /// `1 + slope * epsilon`, exact.
    Affine {
        #[serde(with = "crate::scalar::serde_rational")]
        slope: Rational,
    },
}

impl GammaSpec {
    pub fn gamma<S: Scalar>(&self, epsilon: &S) -> S {
        match self {
            GammaSpec::Exp => {
                let e = epsilon.to_f64().unwrap_or(f64::NAN).exp();
                match Rational::from_float(e) {
                    Some(r) => S::from_rational(&r),
                    None => S::from_f64(e).unwrap_or_else(S::zero),
                }
            }
            GammaSpec::Affine { slope } => S::one() + S::from_rational(slope) * epsilon.clone(),
        }
    }

    /// `epsilon` with `gamma(epsilon) = g`, for `g >= 1`.
    pub fn inverse<S: Scalar>(&self, g: &S) -> S {
        match self {
            GammaSpec::Exp => {
                let e = g.to_f64().unwrap_or(f64::NAN).ln();
                match Rational::from_float(e) {
                    Some(r) => S::from_rational(&r),
                    None => S::from_f64(e).unwrap_or_else(S::zero),
                }
            }
            GammaSpec::Affine { slope } => (g.clone() - S::one()) / S::from_rational(slope),
        }
    }
}

/// `gamma * delta / (1 + delta * (gamma - 1))` for a given ratio `gamma`.
pub fn gamma_of_ratio<S: Scalar>(gamma: &S, delta: &S) -> S {
    let num = gamma.clone() * delta.clone();
    let den = S::one() + delta.clone() * (gamma.clone() - S::one());
    num / den
}

/// Ceiling on the belief in access given a similarity level under
/// epsilon-NAF with access prior `delta`.
pub fn gamma_bound<S: Scalar>(epsilon: &S, delta: &S, spec: &GammaSpec) -> S {
    gamma_of_ratio(&spec.gamma(epsilon), delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NafConfig<S: Scalar = Rational> {
    #[serde(with = "serde_scalar")]
    pub epsilon: S,
    #[serde(with = "serde_scalar")]
    pub delta: S,
    #[serde(default)]
    pub gamma_spec: GammaSpec,
    #[serde(with = "serde_scalar::vec")]
    pub alpha_primes: Vec<S>,
}

impl<S: Scalar> NafConfig<S> {
    pub fn new(
        epsilon: S,
        delta: S,
        gamma_spec: GammaSpec,
        alpha_primes: Vec<S>,
    ) -> Result<Self, ScenarioError> {
        let config = Self {
            epsilon,
            delta,
            gamma_spec,
            alpha_primes,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.epsilon > S::zero() && self.gamma_spec.gamma(&self.epsilon) > S::one()) {
            return Err(ScenarioError::BadEpsilon(self.epsilon.to_string()));
        }
        unit(&self.delta, "delta")?;
        if self.alpha_primes.is_empty() {
            return Err(ScenarioError::Shape(
                "at least one similarity level is required".into(),
            ));
        }
        for (i, a) in self.alpha_primes.iter().enumerate() {
            unit(a, &format!("alpha'_{}", i + 1))?;
        }
        if let Some(i) = self.alpha_primes.windows(2).position(|w| w[1] < w[0]) {
            return Err(ScenarioError::NotMonotone {
                what: "alpha_primes".into(),
                detail: format!("alpha'_{} > alpha'_{}", i + 1, i + 2),
            });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.alpha_primes.len()
    }

    pub fn gamma(&self) -> S {
        gamma_bound(&self.epsilon, &self.delta, &self.gamma_spec)
    }

    fn check(&self, i: usize) -> Result<(), ScenarioError> {
        if !(1..=self.n()).contains(&i) {
            return Err(ScenarioError::IndexOutOfRange {
                index: i,
                max: self.n(),
            });
        }
        Ok(())
    }
}

/// General knowledge about works generated by a fixed epsilon-NAF model:
/// copying requires access, nested similarity levels, copying rates among
/// generated works with access per level, the access ceiling per level, and
/// the access rate among generated works. The model's NAF property is a
/// fixed fact about it, so it is folded into `Generated`.
pub fn build_naf_kb<S: Scalar>(config: &NafConfig<S>) -> Result<KnowledgeBase, ScenarioError> {
    config.validate()?;
    let n = config.n();
    let mut kb = KnowledgeBase::new();
    kb.pred("Copy").pred("Access").pred("Generated");
    for i in 1..=n {
        kb.pred(&similar(i));
    }
    kb.constant(DEFENDANT);
    kb.rule(UniversalRule::implies("Copy", "Access"));
    for i in 1..n {
        kb.rule(UniversalRule::implies(&similar(i + 1), &similar(i)));
    }
    let generated = Literal::pos("Generated");
    for (i, alpha) in config.alpha_primes.iter().enumerate() {
        let cond = level_condition(i + 1, n)
            .with(Literal::pos("Access"))
            .and_then(|c| c.with(generated.clone()))
            .expect("fresh predicates");
        kb.constraint(ProportionConstraint::approx(
            Conjunction::of(&["Copy"]),
            cond,
            exact(alpha, "alpha'")?,
        ));
    }
    let ceiling = exact(&config.gamma(), "Gamma")?;
    for i in 1..=n {
        let cond = level_condition(i, n)
            .with(generated.clone())
            .expect("fresh predicate");
        kb.constraint(ProportionConstraint::new(
            Conjunction::of(&["Access"]),
            cond,
            Relation::AtMost,
            ceiling.clone(),
        ));
    }
    kb.constraint(ProportionConstraint::approx(
        Conjunction::of(&["Access"]),
        Conjunction::literal(generated),
        exact(&config.delta, "delta")?,
    ));
    Ok(kb)
}

/// The NAF KB plus the case facts: similarity exactly at level `i`, and
/// the work was generated by the model.
pub fn build_naf_case<S: Scalar>(
    config: &NafConfig<S>,
    i: usize,
) -> Result<KnowledgeBase, ScenarioError> {
    config.check(i)?;
    let mut kb = build_naf_kb(config)?;
    for lit in level_condition(i, config.n()).literals() {
        kb.fact(DEFENDANT, lit);
    }
    kb.fact(DEFENDANT, Literal::pos("Generated"));
    Ok(kb)
}

/// Roles for the interval rule on a level-`i` case: the known class is the
/// level plus `Generated`, the intermediate property access, the target copying.
pub fn naf_roles(n: usize, i: usize) -> LemmaRoles {
    LemmaRoles {
        phi0: level_condition(i, n)
            .with(Literal::pos("Generated"))
            .expect("fresh predicate"),
        theta: Conjunction::of(&["Access"]),
        xi: Conjunction::of(&["Copy"]),
    }
}

/// Ceiling on the belief in copying at level `i`: `alpha'_i * Gamma`.
pub fn naf_copy_bound<S: Scalar>(config: &NafConfig<S>, i: usize) -> Result<S, ScenarioError> {
    config.check(i)?;
    Ok(config.alpha_primes[i - 1].clone() * config.gamma())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prop2ViolationKind {
    BelowDelta,
    AboveOne,
    DecreasingInEpsilon,
    DecreasingInDelta,
    NotOneAtUnitDelta,
    EqualityInsideInterval,
    CopyBoundDecreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Violation {
    pub kind: Prop2ViolationKind,
    pub epsilon: String,
    pub delta: String,
    pub detail: String,
}

/// Sample points `(epsilon, delta)`; finite differences are taken between
/// each point and its successor in the sorted epsilon and delta samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Input<S: Scalar = Rational> {
    #[serde(with = "serde_scalar::vec")]
    pub epsilons: Vec<S>,
    #[serde(with = "serde_scalar::vec")]
    pub deltas: Vec<S>,
    #[serde(with = "serde_scalar::vec", default)]
    pub alpha_primes: Vec<S>,
    #[serde(default)]
    pub gamma_spec: GammaSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Report {
    pub points: usize,
    pub differences: usize,
    /// Points with `Gamma == delta` at `delta == 0` (numerator of the gap vanishes).
    pub zero_delta_equalities: usize,
    pub unit_delta_points: usize,
    pub violations: Vec<Prop2Violation>,
}

impl Prop2Report {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "epsilon", "delta", "detail"])
            .expect("in-memory write");
        for v in &self.violations {
            let kind = serde_json::to_value(v.kind)
                .expect("kind")
                .as_str()
                .unwrap_or_default()
                .to_string();
            w.write_record([kind.as_str(), &v.epsilon, &v.delta, &v.detail])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Checks the bounds and monotonicity of `Gamma` (and of the copy bound
/// `alpha'_i * Gamma`) at every `(epsilons[k], deltas[k])`.
pub fn check_prop2<S: Scalar>(input: &Prop2Input<S>) -> Prop2Report {
    let spec = &input.gamma_spec;
    let successor = |xs: &[S], x: &S| -> Option<S> {
        xs.iter()
            .filter(|y| *y > x)
            .min_by(|a, b| a.partial_cmp(b).expect("ordered"))
            .cloned()
    };
    let mut report = Prop2Report {
        points: 0,
        differences: 0,
        zero_delta_equalities: 0,
        unit_delta_points: 0,
        violations: Vec::new(),
    };
    for (eps, delta) in input.epsilons.iter().zip(&input.deltas) {
        report.points += 1;
        let mut flag = |kind, detail: String| {
            report.violations.push(Prop2Violation {
                kind,
                epsilon: eps.to_string(),
                delta: delta.to_string(),
                detail,
            })
        };
        let g = gamma_bound(eps, delta, spec);
        if g < *delta {
            flag(Prop2ViolationKind::BelowDelta, format!("Gamma = {g}"));
        }
        if g > S::one() {
            flag(Prop2ViolationKind::AboveOne, format!("Gamma = {g}"));
        }
        let is_zero = delta.is_zero();
        let is_one = delta.is_one();
        if is_one {
            report.unit_delta_points += 1;
            if !g.is_one() {
                flag(
                    Prop2ViolationKind::NotOneAtUnitDelta,
                    format!("Gamma = {g}"),
                );
            }
        } else if g == *delta {
            if is_zero {
                report.zero_delta_equalities += 1;
            } else {
                flag(
                    Prop2ViolationKind::EqualityInsideInterval,
                    format!("Gamma = delta = {g}"),
                );
            }
        }
        if let Some(next) = successor(&input.epsilons, eps) {
            report.differences += 1;
            let g2 = gamma_bound(&next, delta, spec);
            if g2 < g {
                flag(
                    Prop2ViolationKind::DecreasingInEpsilon,
                    format!("Gamma({next}, delta) = {g2} < {g}"),
                );
            }
            for (i, a) in input.alpha_primes.iter().enumerate() {
                if a.clone() * g2.clone() < a.clone() * g.clone() {
                    flag(
                        Prop2ViolationKind::CopyBoundDecreasing,
                        format!("level {}", i + 1),
                    );
                }
            }
        }
        if let Some(next) = successor(&input.deltas, delta) {
            report.differences += 1;
            let g2 = gamma_bound(eps, &next, spec);
            if g2 < g {
                flag(
                    Prop2ViolationKind::DecreasingInDelta,
                    format!("Gamma(epsilon, {next}) = {g2} < {g}"),
                );
            }
        }
    }
    report
}

/// Output distribution of a generative model with and without access to
/// a work, and the similarity level of each output (0 = below every level).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeModel<S: Scalar = Rational> {
    pub outcomes: Vec<String>,
    #[serde(with = "serde_scalar::vec")]
    pub p_with_access: Vec<S>,
    #[serde(with = "serde_scalar::vec")]
    pub p_without_access: Vec<S>,
    pub similarity_level: Vec<usize>,
    #[serde(with = "serde_scalar")]
    pub prior_access: S,
}

impl<S: Scalar> OutcomeModel<S> {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let k = self.outcomes.len();
        if k == 0
            || self.p_with_access.len() != k
            || self.p_without_access.len() != k
            || self.similarity_level.len() != k
        {
            return Err(ScenarioError::InvalidModel(
                "every outcome needs two probabilities and a level".into(),
            ));
        }
        unit(&self.prior_access, "prior_access")?;
        for (name, dist) in [
            ("p_with_access", &self.p_with_access),
            ("p_without_access", &self.p_without_access),
        ] {
            let mut total = S::zero();
            for p in dist {
                unit(p, name)?;
                total = total + p.clone();
            }
            let off = (total - S::one()).abs();
            let ok = if S::is_exact() {
                off.is_zero()
            } else {
                off <= S::from_f64(1e-9).expect("small constant")
            };
            if !ok {
                return Err(ScenarioError::InvalidModel(format!(
                    "{name} does not sum to 1"
                )));
            }
        }
        Ok(())
    }

    /// Probability of each level present among the outcomes, with and without access.
    fn levels(&self) -> Vec<(usize, S, S)> {
        let mut levels: Vec<usize> = self.similarity_level.clone();
        levels.sort_unstable();
        levels.dedup();
        levels
            .into_iter()
            .map(|l| {
                let mut with = S::zero();
                let mut without = S::zero();
                for k in 0..self.outcomes.len() {
                    if self.similarity_level[k] == l {
                        with = with + self.p_with_access[k].clone();
                        without = without + self.p_without_access[k].clone();
                    }
                }
                (l, with, without)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelAudit<S: Scalar = Rational> {
    pub level: usize,
    #[serde(with = "serde_scalar")]
    pub p_with_access: S,
    #[serde(with = "serde_scalar")]
    pub p_without_access: S,
    /// `p_with_access / p_without_access`; absent when both are zero.
    #[serde(with = "serde_scalar::option")]
    pub ratio: Option<S>,
    /// Belief in access given the level, by Bayes with the model's prior.
    #[serde(with = "serde_scalar::option")]
    pub posterior: Option<S>,
    pub within_ceiling: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AuditReport<S: Scalar = Rational> {
    /// Smallest NAF ratio the model satisfies: the largest level ratio.
    #[serde(with = "serde_scalar")]
    pub gamma_star: S,
    /// `gamma_spec` inverted at `gamma_star`.
    #[serde(with = "serde_scalar")]
    pub epsilon_star: S,
    /// `Gamma(epsilon_star, prior)`, computed from `gamma_star` directly.
    #[serde(with = "serde_scalar")]
    pub ceiling: S,
    pub levels: Vec<LevelAudit<S>>,
    pub all_within_ceiling: bool,
}

impl<S: Scalar> AuditReport<S> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let show = |v: &Option<S>| v.as_ref().map(|x| x.to_string()).unwrap_or_default();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "level",
            "p_with_access",
            "p_without_access",
            "ratio",
            "posterior",
            "ceiling",
            "within_ceiling",
        ])
        .expect("in-memory write");
        for l in &self.levels {
            w.write_record([
                l.level.to_string(),
                l.p_with_access.to_string(),
                l.p_without_access.to_string(),
                show(&l.ratio),
                show(&l.posterior),
                self.ceiling.to_string(),
                l.within_ceiling.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Smallest epsilon for which the model is NAF over its level events, and
/// the check that every level's access posterior respects the resulting
/// ceiling. Level 0 (below every threshold) counts as an event too.
pub fn naf_audit<S: Scalar>(
    model: &OutcomeModel<S>,
    spec: &GammaSpec,
) -> Result<AuditReport<S>, ScenarioError> {
    model.validate()?;
    let delta = &model.prior_access;
    let levels = model.levels();
    let mut gamma_star = S::one();
    for (level, with, without) in &levels {
        if without.is_zero() {
            if !with.is_zero() {
                return Err(ScenarioError::UnboundedRatio { level: *level });
            }
            continue;
        }
        let ratio = with.clone() / without.clone();
        if ratio > gamma_star {
            gamma_star = ratio;
        }
    }
    let ceiling = gamma_of_ratio(&gamma_star, delta);
    let mut all = true;
    let audits = levels
        .into_iter()
        .map(|(level, with, without)| {
            let ratio = (!without.is_zero()).then(|| with.clone() / without.clone());
            let evidence =
                delta.clone() * with.clone() + (S::one() - delta.clone()) * without.clone();
            let posterior = (!evidence.is_zero()).then(|| delta.clone() * with.clone() / evidence);
            let within_ceiling = posterior.as_ref().is_none_or(|p| *p <= ceiling);
            all &= within_ceiling;
            LevelAudit {
                level,
                p_with_access: with,
                p_without_access: without,
                ratio,
                posterior,
                within_ceiling,
            }
        })
        .collect();
    Ok(AuditReport {
        epsilon_star: spec.inverse(&gamma_star),
        gamma_star,
        ceiling,
        levels: audits,
        all_within_ceiling: all,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardCheck {
    pub gamma: String,
    /// Levels where `P(level | access) > gamma * P(level | no access)`.
    pub failing_levels: Vec<usize>,
    pub pass: bool,
}

/// Forward NAF guarantee at `epsilon`: every level event is at most
/// `gamma(epsilon)` times as likely with access as without.
pub fn forward_bound_check<S: Scalar>(
    model: &OutcomeModel<S>,
    epsilon: &S,
    spec: &GammaSpec,
) -> Result<ForwardCheck, ScenarioError> {
    forward_bound_check_gamma(model, &spec.gamma(epsilon))
}

pub fn forward_bound_check_gamma<S: Scalar>(
    model: &OutcomeModel<S>,
    gamma: &S,
) -> Result<ForwardCheck, ScenarioError> {
    model.validate()?;
    let failing_levels: Vec<usize> = model
        .levels()
        .into_iter()
        .filter(|(_, with, without)| *with > gamma.clone() * without.clone())
        .map(|(l, _, _)| l)
        .collect();
    Ok(ForwardCheck {
        gamma: gamma.to_string(),
        pass: failing_levels.is_empty(),
        failing_levels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictInput<S: Scalar = Rational> {
    #[serde(with = "serde_scalar")]
    pub copy_belief: S,
    pub substantial: bool,
    #[serde(with = "serde_scalar")]
    pub lambda: S,
}

/// Infringement is found when copying is believed beyond the threshold
/// (strictly) and the works are substantially similar.
pub fn verdict<S: Scalar>(input: &VerdictInput<S>) -> bool {
    input.substantial && input.copy_belief > input.lambda
}
