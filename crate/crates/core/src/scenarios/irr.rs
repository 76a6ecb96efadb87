//! The inverse ratio rule: similarity and evidence of access trade off
//! against each other in establishing copying.
//!
//! The belief in copying for a case at maximal similarity level `i` with
//! sole evidence category `j` factors as `alpha_i * beta_ij`; with both
//! grids nondecreasing, the least similarity level clearing a threshold
//! can only fall as evidence of access strengthens, and vice versa.

use serde::{Deserialize, Serialize};

use super::evidence::DEFENDANT;
use super::{exact, unit, ScenarioError};
use crate::kb::{Conjunction, KnowledgeBase, Literal, ProportionConstraint, UniversalRule};
use crate::scalar::{serde_scalar, Scalar};
use crate::Rational;

pub(crate) fn similar(i: usize) -> String {
    format!("Similar_{i}")
}

fn evidence(j: usize) -> String {
    format!("EA_{j}")
}

/// Similarity is exactly at level `i` of `n`: `Similar_i` and no higher level.
pub fn level_condition(i: usize, n: usize) -> Conjunction {
    let lits = std::iter::once(Literal::pos(similar(i)))
        .chain((i + 1..=n).map(|k| Literal::neg(similar(k))));
    Conjunction::from_literals(lits).expect("distinct predicates")
}

/// Evidence category `j` of `m` and no other.
fn evidence_condition(j: usize, m: usize) -> Conjunction {
    let lits = (1..=m).map(|l| {
        if l == j {
            Literal::pos(evidence(l))
        } else {
            Literal::neg(evidence(l))
        }
    });
    Conjunction::from_literals(lits).expect("distinct predicates")
}

/// Rate of copying among works with access at each maximal similarity level.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimilarityGrid<S: Scalar = Rational> {
    #[serde(with = "serde_scalar::vec")]
    alphas: Vec<S>,
}

impl<S: Scalar> SimilarityGrid<S> {
    pub fn new(alphas: Vec<S>) -> Result<Self, ScenarioError> {
        if alphas.is_empty() {
            return Err(ScenarioError::Shape(
                "at least one similarity level is required".into(),
            ));
        }
        for (i, a) in alphas.iter().enumerate() {
            unit(a, &format!("alpha_{}", i + 1))?;
        }
        if let Some(i) = alphas.windows(2).position(|w| w[1] < w[0]) {
            return Err(ScenarioError::NotMonotone {
                what: "alphas".into(),
                detail: format!("alpha_{} > alpha_{}", i + 1, i + 2),
            });
        }
        Ok(Self { alphas })
    }

    pub fn alphas(&self) -> &[S] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }
}

impl<'de, S: Scalar> Deserialize<'de> for SimilarityGrid<S> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Self::new(serde_scalar::vec::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Rate of access at similarity level `i` (rows) given evidence category
/// `j` (columns).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EvidenceGrid<S: Scalar = Rational> {
    #[serde(with = "serde_scalar::matrix")]
    betas: Vec<Vec<S>>,
}

impl<S: Scalar> EvidenceGrid<S> {
    pub fn new(betas: Vec<Vec<S>>) -> Result<Self, ScenarioError> {
        let m = betas.first().map_or(0, Vec::len);
        if m == 0 || betas.iter().any(|r| r.len() != m) {
            return Err(ScenarioError::Shape(
                "betas must be a nonempty rectangular matrix".into(),
            ));
        }
        for (i, row) in betas.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                unit(b, &format!("beta_{},{}", i + 1, j + 1))?;
                if j > 0 && *b < row[j - 1] {
                    return Err(ScenarioError::NotMonotone {
                        what: "betas along evidence".into(),
                        detail: format!("beta_{},{} > beta_{},{}", i + 1, j, i + 1, j + 1),
                    });
                }
                if i > 0 && *b < betas[i - 1][j] {
                    return Err(ScenarioError::NotMonotone {
                        what: "betas along similarity".into(),
                        detail: format!("beta_{},{} > beta_{},{}", i, j + 1, i + 1, j + 1),
                    });
                }
            }
        }
        Ok(Self { betas })
    }

    pub fn betas(&self) -> &[Vec<S>] {
        &self.betas
    }

    pub fn rows(&self) -> usize {
        self.betas.len()
    }

    pub fn cols(&self) -> usize {
        self.betas[0].len()
    }
}

impl<'de, S: Scalar> Deserialize<'de> for EvidenceGrid<S> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Self::new(serde_scalar::matrix::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Grids plus the standard-of-proof threshold.
///
/// JSON form: `{"alphas": [...], "betas": [[...]], "lambda": "1/2"}`;
/// `lambda` defaults to 1/2.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct IrrConfig<S: Scalar = Rational> {
    alphas: SimilarityGrid<S>,
    betas: EvidenceGrid<S>,
    #[serde(with = "serde_scalar")]
    lambda: S,
}

impl<S: Scalar> IrrConfig<S> {
    pub fn new(
        alphas: SimilarityGrid<S>,
        betas: EvidenceGrid<S>,
        lambda: S,
    ) -> Result<Self, ScenarioError> {
        if betas.rows() != alphas.len() {
            return Err(ScenarioError::Shape(format!(
                "{} similarity levels but {} beta rows",
                alphas.len(),
                betas.rows()
            )));
        }
        if !(lambda > S::zero() && lambda < S::one()) {
            return Err(ScenarioError::BadLambda(lambda.to_string()));
        }
        Ok(Self {
            alphas,
            betas,
            lambda,
        })
    }

    pub fn from_vecs(alphas: Vec<S>, betas: Vec<Vec<S>>, lambda: S) -> Result<Self, ScenarioError> {
        Self::new(
            SimilarityGrid::new(alphas)?,
            EvidenceGrid::new(betas)?,
            lambda,
        )
    }

    pub fn similarity(&self) -> &SimilarityGrid<S> {
        &self.alphas
    }

    pub fn evidence(&self) -> &EvidenceGrid<S> {
        &self.betas
    }

    /// Similarity levels.
    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    /// Evidence categories.
    pub fn m(&self) -> usize {
        self.betas.cols()
    }

    pub fn alpha(&self, i: usize) -> &S {
        &self.alphas.alphas[i - 1]
    }

    pub fn beta(&self, i: usize, j: usize) -> &S {
        &self.betas.betas[i - 1][j - 1]
    }

    pub fn lambda(&self) -> &S {
        &self.lambda
    }

    fn check(&self, i: usize, j: usize) -> Result<(), ScenarioError> {
        if !(1..=self.n()).contains(&i) {
            return Err(ScenarioError::IndexOutOfRange {
                index: i,
                max: self.n(),
            });
        }
        if !(1..=self.m()).contains(&j) {
            return Err(ScenarioError::IndexOutOfRange {
                index: j,
                max: self.m(),
            });
        }
        Ok(())
    }

    fn product(&self, i: usize, j: usize) -> S {
        self.alpha(i).clone() * self.beta(i, j).clone()
    }
}

#[derive(Deserialize)]
#[serde(bound = "")]
struct RawIrrConfig<S: Scalar> {
    alphas: SimilarityGrid<S>,
    betas: EvidenceGrid<S>,
    #[serde(default, deserialize_with = "opt_scalar")]
    lambda: Option<S>,
}

fn opt_scalar<'de, S: Scalar, D: serde::Deserializer<'de>>(d: D) -> Result<Option<S>, D::Error> {
    serde_scalar::deserialize(d).map(Some)
}

impl<'de, S: Scalar> Deserialize<'de> for IrrConfig<S> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawIrrConfig::<S>::deserialize(d)?;
        let lambda = raw.lambda.unwrap_or_else(|| S::from_ratio(1, 2));
        Self::new(raw.alphas, raw.betas, lambda).map_err(serde::de::Error::custom)
    }
}

/// General knowledge: copying requires access, similarity levels are
/// nested, and the copying and access statistics of both grids.
pub fn build_irr_kb<S: Scalar>(config: &IrrConfig<S>) -> Result<KnowledgeBase, ScenarioError> {
    let (n, m) = (config.n(), config.m());
    let mut kb = KnowledgeBase::new();
    kb.pred("Copy").pred("Access");
    for i in 1..=n {
        kb.pred(&similar(i));
    }
    for j in 1..=m {
        kb.pred(&evidence(j));
    }
    kb.constant(DEFENDANT);
    kb.rule(UniversalRule::implies("Copy", "Access"));
    for i in 1..n {
        kb.rule(UniversalRule::implies(&similar(i + 1), &similar(i)));
    }
    for i in 1..=n {
        let cond = level_condition(i, n)
            .with(Literal::pos("Access"))
            .expect("fresh predicate");
        let alpha = exact(config.alpha(i), "alpha")?;
        kb.constraint(ProportionConstraint::approx(
            Conjunction::of(&["Copy"]),
            cond,
            alpha,
        ));
    }
    for i in 1..=n {
        for j in 1..=m {
            let cond = level_condition(i, n)
                .and(&evidence_condition(j, m))
                .expect("disjoint predicates");
            let beta = exact(config.beta(i, j), "beta")?;
            kb.constraint(ProportionConstraint::approx(
                Conjunction::of(&["Access"]),
                cond,
                beta,
            ));
        }
    }
    Ok(kb)
}

/// The general KB plus what the trial showed about the defendant's work:
/// similarity exactly at level `i` and evidence of access only of category `j`.
pub fn build_irr_case<S: Scalar>(
    config: &IrrConfig<S>,
    i: usize,
    j: usize,
) -> Result<KnowledgeBase, ScenarioError> {
    config.check(i, j)?;
    let mut kb = build_irr_kb(config)?;
    for lit in level_condition(i, config.n())
        .literals()
        .chain(evidence_condition(j, config.m()).literals())
    {
        kb.fact(DEFENDANT, lit);
    }
    Ok(kb)
}

/// Limit belief in copying for case `(i, j)`: `alpha_i * beta_ij`.
pub fn irr_belief<S: Scalar>(
    config: &IrrConfig<S>,
    i: usize,
    j: usize,
) -> Result<S, ScenarioError> {
    config.check(i, j)?;
    Ok(config.product(i, j))
}

/// Least similarity level whose belief exceeds lambda at evidence `j`;
/// `n + 1` when none does.
pub fn min_sim_index<S: Scalar>(config: &IrrConfig<S>, j: usize) -> Result<usize, ScenarioError> {
    config.check(1, j)?;
    Ok((1..=config.n())
        .find(|&i| config.product(i, j) > config.lambda)
        .unwrap_or(config.n() + 1))
}

/// Least evidence category whose belief exceeds lambda at similarity `i`;
/// `m + 1` when none does.
pub fn min_ev_index<S: Scalar>(config: &IrrConfig<S>, i: usize) -> Result<usize, ScenarioError> {
    config.check(i, 1)?;
    Ok((1..=config.m())
        .find(|&j| config.product(i, j) > config.lambda)
        .unwrap_or(config.m() + 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop1Counterexample {
    /// 1: stronger evidence must not raise the similarity needed;
    /// 2: higher similarity must not raise the evidence needed.
    pub claim: u8,
    /// The larger index of the pair.
    pub larger: usize,
    pub smaller: usize,
    pub min_at_larger: usize,
    pub min_at_smaller: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop1Report {
    /// `min_sim_index` for each evidence category.
    pub min_sim: Vec<usize>,
    /// `min_ev_index` for each similarity level.
    pub min_ev: Vec<usize>,
    pub pairs_checked: usize,
    pub counterexamples: Vec<Prop1Counterexample>,
}

impl Prop1Report {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per minimum index: `axis, index, min_index`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["axis", "index", "min_index"])
            .expect("in-memory write");
        for (j, v) in self.min_sim.iter().enumerate() {
            w.write_record(["evidence", &(j + 1).to_string(), &v.to_string()])
                .expect("in-memory write");
        }
        for (i, v) in self.min_ev.iter().enumerate() {
            w.write_record(["similarity", &(i + 1).to_string(), &v.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Checks both directions of the inverse ratio rule over every index pair.
pub fn check_prop1<S: Scalar>(config: &IrrConfig<S>) -> Prop1Report {
    let min_sim: Vec<usize> = (1..=config.m())
        .map(|j| min_sim_index(config, j).expect("valid index"))
        .collect();
    let min_ev: Vec<usize> = (1..=config.n())
        .map(|i| min_ev_index(config, i).expect("valid index"))
        .collect();
    let mut counterexamples = Vec::new();
    let mut pairs_checked = 0;
    for (claim, mins) in [(1u8, &min_sim), (2u8, &min_ev)] {
        for larger in 1..=mins.len() {
            for smaller in 1..=larger {
                pairs_checked += 1;
                let (a, b) = (mins[larger - 1], mins[smaller - 1]);
                if a > b {
                    counterexamples.push(Prop1Counterexample {
                        claim,
                        larger,
                        smaller,
                        min_at_larger: a,
                        min_at_smaller: b,
                    });
                }
            }
        }
    }
    Prop1Report {
        min_sim,
        min_ev,
        pairs_checked,
        counterexamples,
    }
}
