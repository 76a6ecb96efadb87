//! Knowledge bases for the copyright-dispute scenarios and the analyzers
//! built on them.
//!
//! Builders return ordinary [`KnowledgeBase`](crate::kb::KnowledgeBase)
//! values, so everything here can be checked against both the resolver and
//! the world-counting engine. Configs and analyzers are generic over
//! [`Scalar`](crate::Scalar); builders convert parameters to exact
//! rationals.

mod evidence;
mod irr;
mod mistress;
mod naf;

pub use evidence::{build_logic_kb, build_probative_kb, build_striking_kb, copy_query, DEFENDANT};
pub use irr::{
    build_irr_case, build_irr_kb, check_prop1, irr_belief, level_condition, min_ev_index,
    min_sim_index, EvidenceGrid, IrrConfig, Prop1Counterexample, Prop1Report, SimilarityGrid,
};
pub use mistress::{build_mistress_kb, mistress_query, MistressVariant};
pub use naf::{
    build_naf_case, build_naf_kb, check_prop2, forward_bound_check, forward_bound_check_gamma,
    gamma_bound, gamma_of_ratio, naf_audit, naf_copy_bound, naf_roles, verdict, AuditReport,
    ForwardCheck, GammaSpec, LevelAudit, NafConfig, OutcomeModel, Prop2Input, Prop2Report,
    Prop2Violation, Prop2ViolationKind, VerdictInput,
};

use crate::scalar::Scalar;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("{what} must lie in [0, 1], got {value}")]
    OutOfRange { what: String, value: String },
    #[error("{0} is not finite")]
    NonFinite(String),
    #[error("{what} must be nondecreasing ({detail})")]
    NotMonotone { what: String, detail: String },
    #[error("grid shape mismatch: {0}")]
    Shape(String),
    #[error("index {index} outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("threshold lambda must lie strictly between 0 and 1, got {0}")]
    BadLambda(String),
    #[error("epsilon must be positive with gamma(epsilon) > 1, got epsilon = {0}")]
    BadEpsilon(String),
    #[error("invalid outcome model: {0}")]
    InvalidModel(String),
    #[error("level {level} has positive probability with access but none without; no finite epsilon satisfies NAF")]
    UnboundedRatio { level: usize },
}

pub(crate) fn exact<S: Scalar>(v: &S, what: &str) -> Result<Rational, ScenarioError> {
    v.to_rational()
        .ok_or_else(|| ScenarioError::NonFinite(what.to_string()))
}

pub(crate) fn unit<S: Scalar>(v: &S, what: &str) -> Result<(), ScenarioError> {
    if !(*v >= S::zero() && *v <= S::one()) {
        return Err(ScenarioError::OutOfRange {
            what: what.to_string(),
            value: v.to_string(),
        });
    }
    Ok(())
}
