//! Finite schedules of `(N, tau)` points approximating the limit belief.

use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::{belief_with, BeliefEstimate, EngineConfig, EngineError};
use crate::kb::{KnowledgeBase, Query, ToleranceSpec};
use crate::scalar::{format_rational, Rational};

pub const DEFAULT_SCHEDULE_SIZES: [usize; 5] = [10, 20, 40, 60, 80];

const INTERLEAVING_NOTE: &str = "the limit belief takes N to infinity before tau to zero; this finite schedule \
                                 shrinks both together, so the last value approximates that iterated limit";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("schedule is empty")]
    Empty,
    #[error("domain sizes must increase strictly ({previous} then {next})")]
    NotIncreasing { previous: usize, next: usize },
    #[error("tolerances must not increase along the schedule (at N={n})")]
    ToleranceIncreases { n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceSchedule {
    points: Vec<(usize, ToleranceSpec)>,
}

impl ConvergenceSchedule {
    pub fn new(points: Vec<(usize, ToleranceSpec)>) -> Result<Self, ScheduleError> {
        if points.is_empty() {
            return Err(ScheduleError::Empty);
        }
        for w in points.windows(2) {
            let ((n0, t0), (n1, t1)) = (&w[0], &w[1]);
            if n1 <= n0 {
                return Err(ScheduleError::NotIncreasing {
                    previous: *n0,
                    next: *n1,
                });
            }
            let slots = t0.taus.len().max(t1.taus.len());
            let at = |t: &ToleranceSpec, i: usize| {
                if t.taus.len() == 1 {
                    t.taus.first()
                } else {
                    t.get(i)
                }
                .cloned()
            };
            for i in 0..slots {
                if let (Some(a), Some(b)) = (at(t0, i), at(t1, i)) {
                    if b > a {
                        return Err(ScheduleError::ToleranceIncreases { n: *n1 });
                    }
                }
            }
        }
        Ok(Self { points })
    }

    /// Same tolerance at every size.
    pub fn fixed_tau(sizes: &[usize], tau: Rational) -> Result<Self, ScheduleError> {
        Self::new(
            sizes
                .iter()
                .map(|&n| (n, ToleranceSpec::uniform(tau.clone(), 1)))
                .collect(),
        )
    }

    pub fn points(&self) -> &[(usize, ToleranceSpec)] {
        &self.points
    }
}

/// `N` in {10, 20, 40, 60, 80} with `tau = max(1/50, 2/N)` for every index,
/// keeping tau above the 1/N spacing of achievable proportions.
pub fn default_schedule() -> ConvergenceSchedule {
    let floor = Rational::new(1.into(), 50.into());
    let points = DEFAULT_SCHEDULE_SIZES
        .iter()
        .map(|&n| {
            let tau = Rational::new(2.into(), n.into()).max(floor.clone());
            (n, ToleranceSpec::uniform(tau, 1))
        })
        .collect();
    ConvergenceSchedule::new(points).expect("default schedule is well formed")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PointOutcome {
    Ok { estimate: BeliefEstimate },
    Unsatisfiable { message: String },
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub taus: ToleranceSpec,
    #[serde(flatten)]
    pub outcome: PointOutcome,
}

impl ConvergencePoint {
    pub fn value(&self) -> Option<&Rational> {
        match &self.outcome {
            PointOutcome::Ok { estimate } => estimate.value.exact(),
            _ => None,
        }
    }

    fn status(&self) -> &'static str {
        match self.outcome {
            PointOutcome::Ok { .. } => "ok",
            PointOutcome::Unsatisfiable { .. } => "unsatisfiable",
            PointOutcome::Failed { .. } => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub points: Vec<ConvergencePoint>,
    /// Differences between consecutive successful points.
    #[serde(with = "crate::scalar::serde_rational::vec")]
    pub deltas: Vec<Rational>,
    pub monotone: bool,
    /// Absolute deltas never grow.
    pub cauchy: bool,
    /// Last successful value; no acceleration is applied.
    #[serde(with = "crate::scalar::serde_rational::option")]
    pub limit_guess: Option<Rational>,
    pub note: String,
}

impl ConvergenceReport {
    pub fn final_delta(&self) -> Option<&Rational> {
        self.deltas.last()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per point: `N, tau, belief_num, belief_den, belief_decimal,
    /// model_count_digits, status`. Failed points leave the value columns empty.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "N",
            "tau",
            "belief_num",
            "belief_den",
            "belief_decimal",
            "model_count_digits",
            "status",
        ])
        .expect("in-memory write");
        for p in &self.points {
            let mut row = vec![p.n.to_string(), p.taus.to_string()];
            match &p.outcome {
                PointOutcome::Ok { estimate } => {
                    let v = estimate.value.exact().cloned().unwrap_or_default();
                    row.push(v.numer().to_string());
                    row.push(v.denom().to_string());
                    row.push(format!("{:.10}", v.to_f64().unwrap_or(f64::NAN)));
                    row.push(
                        estimate
                            .model_count
                            .as_ref()
                            .map(|c| c.digits().to_string())
                            .unwrap_or_default(),
                    );
                }
                _ => row.extend(std::iter::repeat_n(String::new(), 4)),
            }
            row.push(p.status().to_string());
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

impl std::fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for p in &self.points {
            match p.value() {
                Some(v) => writeln!(
                    f,
                    "N={:<4} tau={:<8} {} (~{:.6})",
                    p.n,
                    p.taus,
                    format_rational(v),
                    v.to_f64().unwrap_or(f64::NAN)
                )?,
                None => writeln!(f, "N={:<4} tau={:<8} {}", p.n, p.taus, p.status())?,
            }
        }
        writeln!(f, "monotone: {}, cauchy: {}", self.monotone, self.cauchy)?;
        if let Some(v) = &self.limit_guess {
            writeln!(f, "limit guess: {:.6}", v.to_f64().unwrap_or(f64::NAN))?;
        }
        write!(f, "note: {}", self.note)
    }
}

/// Exact beliefs along `schedule`. Points that fail are recorded and the
/// schedule continues.
pub fn converge(
    kb: &KnowledgeBase,
    query: &Query,
    schedule: &ConvergenceSchedule,
) -> ConvergenceReport {
    converge_with(kb, query, schedule, &EngineConfig::default())
}

pub fn converge_with(
    kb: &KnowledgeBase,
    query: &Query,
    schedule: &ConvergenceSchedule,
    config: &EngineConfig,
) -> ConvergenceReport {
    let points: Vec<ConvergencePoint> = schedule
        .points
        .iter()
        .map(|(n, taus)| {
            let outcome = match belief_with(kb, query, *n, taus, config) {
                Ok(estimate) => PointOutcome::Ok { estimate },
                Err(e @ EngineError::Unsatisfiable { .. }) => PointOutcome::Unsatisfiable {
                    message: e.to_string(),
                },
                Err(e) => PointOutcome::Failed {
                    message: e.to_string(),
                },
            };
            ConvergencePoint {
                n: *n,
                taus: taus.clone(),
                outcome,
            }
        })
        .collect();

    let values: Vec<&Rational> = points.iter().filter_map(|p| p.value()).collect();
    let deltas: Vec<Rational> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone =
        deltas.iter().all(|d| !d.is_negative()) || deltas.iter().all(|d| !d.is_positive());
    let cauchy = deltas.windows(2).all(|w| w[1].abs() <= w[0].abs());
    ConvergenceReport {
        limit_guess: values.last().map(|v| (*v).clone()),
        points,
        deltas,
        monotone,
        cauchy,
        note: INTERLEAVING_NOTE.to_string(),
    }
}
