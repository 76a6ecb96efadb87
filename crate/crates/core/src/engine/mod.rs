//! Degrees of belief by counting possible worlds.
//!
//! `Pr_N^tau(query | kb)` is the fraction of size-`N` worlds satisfying
//! the KB (rules, facts, and every proportion constraint within its
//! tolerance window) in which the query also holds. The exact path counts
//! with arbitrary-precision integers; [`sample_belief`] estimates the same
//! ratio by rejection sampling; [`converge`] runs a schedule of `(N, tau)`
//! points toward the limit.

mod converge;
mod count;
mod model;
mod sample;

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use converge::{
    converge, converge_with, default_schedule, ConvergencePoint, ConvergenceReport,
    ConvergenceSchedule, PointOutcome, ScheduleError, DEFAULT_SCHEDULE_SIZES,
};
pub use sample::{sample_belief, SampleConfig};

use crate::kb::{
    validate_kb, AtomProfile, KbError, KnowledgeBase, Query, ToleranceSpec, DEFAULT_PREDICATE_CAP,
};
use crate::scalar::{format_rational, Rational};
use count::CountPlan;
use model::WorldModel;

/// Default cap on dynamic-programming transitions for the exact path.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub budget: u64,
    pub predicate_cap: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            predicate_cap: DEFAULT_PREDICATE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("domain size {n} is smaller than the {constants} declared constants (or zero)")]
    DomainTooSmall { n: usize, constants: usize },
    #[error("domain size {0} is too large for exact counting")]
    DomainTooLarge(usize),
    #[error("no world of size {n} satisfies the knowledge base at tau = {taus}; proportions at size N are multiples of 1/N, so a tolerance tighter than the grid spacing is the usual cause")]
    Unsatisfiable { n: usize, taus: ToleranceSpec },
    #[error("exact counting over {groups} profile groups exceeds the budget of {budget} transitions; use Monte Carlo or raise the budget")]
    BudgetExceeded { budget: u64, groups: usize },
    #[error("tolerance spec is empty or has a non-positive entry: {0}")]
    InvalidTolerance(ToleranceSpec),
    #[error("constraint uses tolerance index {index} but only {available} tolerances were given")]
    ToleranceIndexOutOfRange { index: usize, available: usize },
    #[error("no sample out of {samples} satisfied the knowledge base")]
    NoAcceptedSamples { samples: u64 },
    #[error("at least one sample is required")]
    NoSamples,
}

/// Number of worlds; arbitrary precision.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct WorldCount(pub BigUint);

impl WorldCount {
    pub fn digits(&self) -> usize {
        self.0.to_string().len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Display for WorldCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl From<u64> for WorldCount {
    fn from(v: u64) -> Self {
        WorldCount(BigUint::from(v))
    }
}

impl Serialize for WorldCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for WorldCount {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse::<BigUint>()
            .map(WorldCount)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactEnumeration,
    MonteCarlo,
    DirectInference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BeliefValue {
    Exact {
        #[serde(with = "crate::scalar::serde_rational")]
        value: Rational,
    },
    Sampled {
        mean: f64,
        half_width: f64,
        samples: u64,
        accepted: u64,
    },
}

impl BeliefValue {
    pub fn as_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        match self {
            BeliefValue::Exact { value } => value.to_f64().unwrap_or(f64::NAN),
            BeliefValue::Sampled { mean, .. } => *mean,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            BeliefValue::Exact { value } => Some(value),
            BeliefValue::Sampled { .. } => None,
        }
    }
}

/// `Pr_N^tau(query | kb)` with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefEstimate {
    pub value: BeliefValue,
    pub method: Method,
    pub n: usize,
    pub taus: ToleranceSpec,
    /// Worlds satisfying the KB (exact path only).
    pub model_count: Option<WorldCount>,
    /// Worlds satisfying the KB and the query (exact path only).
    pub query_count: Option<WorldCount>,
}

impl fmt::Display for BeliefEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            BeliefValue::Exact { value } => {
                write!(
                    f,
                    "{} (~{:.6}) at N={}, tau={}",
                    format_rational(value),
                    self.value.as_f64(),
                    self.n,
                    self.taus
                )
            }
            BeliefValue::Sampled {
                mean,
                half_width,
                accepted,
                samples,
            } => write!(
                f,
                "{mean:.6} +/- {half_width:.6} ({accepted}/{samples} accepted) at N={}, tau={}",
                self.n, self.taus
            ),
        }
    }
}

/// Profiles allowed by every universal rule, in binary-counter order.
pub fn feasible_profiles(kb: &KnowledgeBase) -> Result<Vec<AtomProfile>, EngineError> {
    Ok(WorldModel::compile(kb, DEFAULT_PREDICATE_CAP)?.feasible_profiles())
}

/// Exact number of size-`n` worlds satisfying `kb` at tolerance `taus`.
pub fn count_models(
    kb: &KnowledgeBase,
    n: usize,
    taus: &ToleranceSpec,
) -> Result<WorldCount, EngineError> {
    count_models_with(kb, n, taus, &EngineConfig::default())
}

pub fn count_models_with(
    kb: &KnowledgeBase,
    n: usize,
    taus: &ToleranceSpec,
    config: &EngineConfig,
) -> Result<WorldCount, EngineError> {
    let report = validate_kb(kb);
    if !report.is_clean() {
        return Err(KbError::Invalid(report).into());
    }
    count_unchecked(kb, n, taus, config)
}

fn count_unchecked(
    kb: &KnowledgeBase,
    n: usize,
    taus: &ToleranceSpec,
    config: &EngineConfig,
) -> Result<WorldCount, EngineError> {
    let model = WorldModel::compile(kb, config.predicate_cap)?;
    let tau_values = model.resolve_taus(taus)?;
    let grouping = model.grouping();
    let plan = CountPlan::build(&[&model], &grouping, n, &tau_values)?;
    let [count] = <[BigUint; 1]>::try_from(plan.run(config.budget)?).expect("one kb");
    Ok(WorldCount(count))
}

/// Exact `Pr_N^tau(query | kb)` as a ratio of world counts.
pub fn belief(
    kb: &KnowledgeBase,
    query: &Query,
    n: usize,
    taus: &ToleranceSpec,
) -> Result<BeliefEstimate, EngineError> {
    belief_with(kb, query, n, taus, &EngineConfig::default())
}

pub fn belief_with(
    kb: &KnowledgeBase,
    query: &Query,
    n: usize,
    taus: &ToleranceSpec,
    config: &EngineConfig,
) -> Result<BeliefEstimate, EngineError> {
    check_query(kb, query)?;
    let report = validate_kb(kb);
    if !report.is_clean() {
        return Err(KbError::Invalid(report).into());
    }
    // Query facts only narrow the constants, so both counts share one plan.
    let model = WorldModel::compile(kb, config.predicate_cap)?;
    let with_query = WorldModel::compile(&kb.with_query_facts(query), config.predicate_cap)?;
    let tau_values = model.resolve_taus(taus)?;
    let grouping = model.grouping();
    let plan = CountPlan::build(&[&model, &with_query], &grouping, n, &tau_values)?;
    let [denominator, numerator] =
        <[BigUint; 2]>::try_from(plan.run(config.budget)?).expect("two kbs");
    let (denominator, numerator) = (WorldCount(denominator), WorldCount(numerator));
    if denominator.is_zero() {
        return Err(EngineError::Unsatisfiable {
            n,
            taus: taus.clone(),
        });
    }
    let value = Rational::new(numerator.0.clone().into(), denominator.0.clone().into());
    Ok(BeliefEstimate {
        value: BeliefValue::Exact { value },
        method: Method::ExactEnumeration,
        n,
        taus: taus.clone(),
        model_count: Some(denominator),
        query_count: Some(numerator),
    })
}

pub(crate) fn check_query(kb: &KnowledgeBase, query: &Query) -> Result<(), KbError> {
    if !kb.constants.contains(&query.constant) {
        return Err(KbError::UnknownConstant(query.constant.clone()));
    }
    if let Some(p) = query
        .target
        .predicates()
        .find(|p| !kb.predicates.contains_key(*p))
    {
        return Err(KbError::UnknownPredicate(p.to_string()));
    }
    Ok(())
}
