//! Monte Carlo estimate of `Pr_N^tau` by rejection sampling.
//!
//! Each sample draws every free element's profile uniformly from the
//! feasible profiles and every constant's profile uniformly from those its
//! facts allow, so accepted samples are uniform over worlds satisfying the
//! rules and facts. Samples violating a proportion constraint are rejected.
//! Work is split into a fixed number of shards with independent ChaCha
//! streams keyed by `(seed, shard)`, so results do not depend on the number
//! of threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::model::{CompiledConstraint, WorldModel};
use super::{check_query, BeliefEstimate, BeliefValue, EngineError, Method};
use crate::kb::{validate_kb, KbError, KnowledgeBase, Query, ToleranceSpec, DEFAULT_PREDICATE_CAP};

const SHARDS: u64 = 64;
/// Normal quantile for a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    pub samples: u64,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
        }
    }
}

struct Sampler<'a> {
    model: &'a WorldModel,
    windows: Vec<Vec<Option<(usize, usize)>>>,
    free: usize,
    query: crate::kb::CompiledConjunction,
    query_slot: usize,
}

impl Sampler<'_> {
    /// `(accepted, hits)` over `count` samples from one stream.
    fn run(&self, rng: &mut ChaCha8Rng, count: u64) -> (u64, u64) {
        let mut accepted = 0;
        let mut hits = 0;
        let mut world: Vec<u32> = Vec::with_capacity(self.model.constants.len() + self.free);
        for _ in 0..count {
            world.clear();
            for (_, allowed) in &self.model.constants {
                world.push(allowed[rng.gen_range(0..allowed.len())]);
            }
            let feasible = &self.model.feasible;
            for _ in 0..self.free {
                world.push(feasible[rng.gen_range(0..feasible.len())]);
            }
            if self
                .model
                .constraints
                .iter()
                .enumerate()
                .all(|(j, c)| self.holds(j, c, &world))
            {
                accepted += 1;
                if self.query.matches(world[self.query_slot]) {
                    hits += 1;
                }
            }
        }
        (accepted, hits)
    }

    fn holds(&self, j: usize, c: &CompiledConstraint, world: &[u32]) -> bool {
        let mut class = 0;
        let mut target = 0;
        for &b in world {
            if c.condition.matches(b) {
                class += 1;
                if c.target.matches(b) {
                    target += 1;
                }
            }
        }
        matches!(self.windows[j][class], Some((lo, hi)) if lo <= target && target <= hi)
    }
}

/// Rejection-sampling estimate of `Pr_N^tau(query | kb)`.
///
/// The reported half-width is the 95% Agresti-Coull interval, which stays
/// positive even when every accepted sample agrees.
pub fn sample_belief(
    kb: &KnowledgeBase,
    query: &Query,
    n: usize,
    taus: &ToleranceSpec,
    config: SampleConfig,
) -> Result<BeliefEstimate, EngineError> {
    if config.samples == 0 {
        return Err(EngineError::NoSamples);
    }
    let report = validate_kb(kb);
    if !report.is_clean() {
        return Err(KbError::Invalid(report).into());
    }
    check_query(kb, query)?;
    let model = WorldModel::compile(kb, DEFAULT_PREDICATE_CAP)?;
    let tau_values = model.resolve_taus(taus)?;
    let m = model.constants.len();
    if n == 0 || n < m {
        return Err(EngineError::DomainTooSmall { n, constants: m });
    }
    if model.feasible.is_empty() || model.constants.iter().any(|(_, a)| a.is_empty()) {
        return Err(EngineError::NoAcceptedSamples {
            samples: config.samples,
        });
    }
    let windows = model
        .constraints
        .iter()
        .zip(&tau_values)
        .map(|(c, tau)| (0..=n).map(|class| c.window(class, tau)).collect())
        .collect();
    let query_slot = model
        .constants
        .iter()
        .position(|(name, _)| name == &query.constant)
        .expect("query constant checked above");
    let sampler = Sampler {
        model: &model,
        windows,
        free: n - m,
        query: model.vocab.compile(&query.target)?,
        query_slot,
    };

    let (accepted, hits) = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let count = config.samples / SHARDS + u64::from(shard < config.samples % SHARDS);
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(shard);
            sampler.run(&mut rng, count)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    if accepted == 0 {
        return Err(EngineError::NoAcceptedSamples {
            samples: config.samples,
        });
    }
    let mean = hits as f64 / accepted as f64;
    let n_tilde = accepted as f64 + Z95 * Z95;
    let p_tilde = (hits as f64 + Z95 * Z95 / 2.0) / n_tilde;
    let half_width = Z95 * (p_tilde * (1.0 - p_tilde) / n_tilde).sqrt();
    Ok(BeliefEstimate {
        value: BeliefValue::Sampled {
            mean,
            half_width,
            samples: config.samples,
            accepted,
        },
        method: Method::MonteCarlo,
        n,
        taus: taus.clone(),
        model_count: None,
        query_count: None,
    })
}
