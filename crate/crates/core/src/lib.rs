//! Degree-of-belief computation with the random-worlds method over a
//! single-variable unary fragment, plus scenario analyzers for
//! copyright-dispute reasoning.

pub mod dsl;
pub mod engine;
pub mod inference;
pub mod kb;
pub mod scalar;
pub mod scenarios;

pub use scalar::{Rational, Scalar};

pub type ExactIrrConfig = scenarios::IrrConfig<Rational>;
pub type FloatIrrConfig = scenarios::IrrConfig<f64>;
pub type ExactNafConfig = scenarios::NafConfig<Rational>;
pub type FloatNafConfig = scenarios::NafConfig<f64>;
pub type ExactOutcomeModel = scenarios::OutcomeModel<Rational>;
pub type FloatOutcomeModel = scenarios::OutcomeModel<f64>;
