//! Exact world counting.
//!
//! A world of size `N` assigns a feasible profile to every domain element;
//! declared constants denote the first `m` elements, one each. Profiles
//! with the same constraint signature are interchangeable, so worlds are
//! counted per vector of group sizes with weight
//! `multinomial * prod(group_size ^ count)`. The sum over vectors runs as a
//! dynamic program over groups whose state holds only the counters still
//! needed by unchecked constraints; a constraint is tested as soon as all
//! groups feeding its counters have been placed.

use std::cell::OnceCell;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use smallvec::{smallvec, SmallVec};

use super::model::{Grouping, WorldModel};
use super::EngineError;
use crate::Rational;

type Key = SmallVec<[u16; 8]>;
type Weights = SmallVec<[BigUint; 2]>;

/// A constraint test: positions in the extended state of its class and
/// target counters (`None` reads as zero).
#[derive(Clone, Copy)]
struct Check {
    constraint: usize,
    class: Option<usize>,
    target: Option<usize>,
}

struct Step {
    group: usize,
    /// Width of the extended state: `u` plus the counters live while placing this group.
    width: usize,
    /// Positions in the extended state that grow with the group count.
    incr: Vec<usize>,
    checks: Vec<Check>,
    /// Positions in the extended state carried to the next step.
    keep: Vec<usize>,
}

/// Counting plan shared by several KBs that differ only in their facts:
/// same feasible profiles and constraints, different admissible profiles
/// for the constants. Each state carries one weight per KB.
pub(crate) struct CountPlan {
    free: usize,
    group_sizes: Vec<usize>,
    irrelevant_size: usize,
    windows: Vec<Vec<Option<(usize, usize)>>>,
    steps: Vec<Step>,
    /// Starting states: counters preloaded with the constants' contributions.
    initial: Vec<(Key, Weights)>,
    kbs: usize,
}

impl CountPlan {
    pub fn build(
        models: &[&WorldModel],
        grouping: &Grouping,
        n: usize,
        taus: &[Rational],
    ) -> Result<Self, EngineError> {
        let model = models[0];
        let m = model.constants.len();
        if n == 0 || n < m {
            return Err(EngineError::DomainTooSmall { n, constants: m });
        }
        if n > u16::MAX as usize {
            return Err(EngineError::DomainTooLarge(n));
        }
        let free = n - m;
        let g_count = grouping.groups.len();

        // Counters: distinct sets of groups whose summed counts a constraint reads.
        let mut counter_ids: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut counters: Vec<Vec<usize>> = Vec::new();
        let mut intern = |set: Vec<usize>| -> usize {
            *counter_ids.entry(set.clone()).or_insert_with(|| {
                counters.push(set);
                counters.len() - 1
            })
        };
        let mut constraint_counters = Vec::new();
        for j in 0..model.constraints.len() {
            let cond: Vec<usize> = (0..g_count)
                .filter(|&g| grouping.groups[g].signature[j] >= 1)
                .collect();
            let tgt: Vec<usize> = (0..g_count)
                .filter(|&g| grouping.groups[g].signature[j] == 2)
                .collect();
            constraint_counters.push((intern(cond), intern(tgt)));
        }

        let windows: Vec<Vec<Option<(usize, usize)>>> = model
            .constraints
            .iter()
            .zip(taus)
            .map(|(c, tau)| (0..=n).map(|class| c.window(class, tau)).collect())
            .collect();

        // Constants: aggregate group placements into counter offsets, per KB.
        let kbs = models.len();
        let mut configs: BTreeMap<Vec<usize>, Weights> = BTreeMap::new();
        for (r, model) in models.iter().enumerate() {
            for (offs, w) in constant_configs(model, grouping, &counters) {
                configs
                    .entry(offs)
                    .or_insert_with(|| smallvec![BigUint::zero(); kbs])[r] += w;
            }
        }
        let preload: Vec<bool> = (0..counters.len())
            .map(|k| configs.keys().any(|o| o[k] > 0))
            .collect();

        let plan = schedule(&counters, &constraint_counters, g_count, &preload);
        let admits =
            |j: usize, class: usize, hits: usize| match windows[j].get(class).copied().flatten() {
                Some((lo, hi)) => lo <= hits && hits <= hi,
                None => false,
            };
        let initial = configs
            .into_iter()
            .filter(|(offs, _)| {
                plan.initial_checks.iter().all(|&j| {
                    let (c, t) = constraint_counters[j];
                    admits(j, offs[c], offs[t])
                })
            })
            .map(|(offs, w)| {
                let key = std::iter::once(0)
                    .chain(plan.layout.iter().map(|&k| offs[k] as u16))
                    .collect();
                (key, w)
            })
            .collect();

        Ok(Self {
            free,
            group_sizes: grouping.groups.iter().map(|g| g.profiles.len()).collect(),
            irrelevant_size: grouping.irrelevant.len(),
            windows,
            steps: plan.steps,
            initial,
            kbs,
        })
    }

    fn admits(&self, check: &Check, ext: &[usize]) -> bool {
        let class = check.class.map_or(0, |p| ext[p]);
        let hits = check.target.map_or(0, |p| ext[p]);
        match self.windows[check.constraint].get(class).copied().flatten() {
            Some((lo, hi)) => lo <= hits && hits <= hi,
            None => false,
        }
    }

    /// World counts, one per KB the plan was built for.
    pub fn run(&self, budget: u64) -> Result<Vec<BigUint>, EngineError> {
        let free = self.free;
        let mut states: HashMap<Key, Weights> = self.initial.iter().cloned().collect();
        let mut spent: u64 = 0;
        let mut ext: Vec<usize> = Vec::new();

        for step in &self.steps {
            if states.is_empty() {
                break;
            }
            let transitions: u64 = states
                .keys()
                .map(|k| (free - k[0] as usize + 1) as u64)
                .sum();
            spent += transitions;
            if spent > budget {
                return Err(EngineError::BudgetExceeded {
                    budget,
                    groups: self.group_sizes.len(),
                });
            }

            let size = BigUint::from(self.group_sizes[step.group]);
            let powers: Vec<BigUint> =
                std::iter::successors(Some(BigUint::one()), |p| Some(p * &size))
                    .take(free + 1)
                    .collect();
            // rows[u][n] = C(u + n, n) * size^n, built on first use.
            let rows: Vec<OnceCell<Vec<BigUint>>> = (0..=free).map(|_| OnceCell::new()).collect();
            let row = |u: usize| {
                rows[u].get_or_init(|| {
                    let mut binom = BigUint::one();
                    (0..=free - u)
                        .map(|n| {
                            if n > 0 {
                                binom = &binom * BigUint::from(u + n) / BigUint::from(n);
                            }
                            &binom * &powers[n]
                        })
                        .collect()
                })
            };

            let mut next_states: HashMap<Key, Weights> = HashMap::with_capacity(states.len());
            for (key, weights) in &states {
                let u = key[0] as usize;
                ext.clear();
                ext.extend(key.iter().map(|&v| v as usize));
                ext.resize(step.width, 0);
                let coef = row(u);
                for (n, c) in coef.iter().enumerate() {
                    if n > 0 {
                        for &p in &step.incr {
                            ext[p] += 1;
                        }
                    }
                    if !step.checks.iter().all(|c| self.admits(c, &ext)) {
                        continue;
                    }
                    let next: Key = step.keep.iter().map(|&p| ext[p] as u16).collect();
                    let slot = next_states
                        .entry(next)
                        .or_insert_with(|| smallvec![BigUint::zero(); self.kbs]);
                    for (acc, w) in slot.iter_mut().zip(weights) {
                        if !w.is_zero() {
                            *acc += w * c;
                        }
                    }
                }
            }
            states = next_states;
        }

        let irr = BigUint::from(self.irrelevant_size);
        let mut totals = vec![BigUint::zero(); self.kbs];
        for (key, weights) in states {
            let u = key[0] as usize;
            let rest = free - u;
            if rest > 0 && self.irrelevant_size == 0 {
                continue;
            }
            let factor = binomial(free, u) * irr.pow(rest as u32);
            for (t, w) in totals.iter_mut().zip(weights) {
                *t += w * &factor;
            }
        }
        Ok(totals)
    }
}

/// Ways of placing the constants, keyed by the counter offsets they cause.
fn constant_configs(
    model: &WorldModel,
    grouping: &Grouping,
    counters: &[Vec<usize>],
) -> HashMap<Vec<usize>, BigUint> {
    let g_count = grouping.groups.len();
    let mut configs: HashMap<Vec<usize>, BigUint> = HashMap::new();
    configs.insert(vec![0; counters.len()], BigUint::one());
    for (_, allowed) in &model.constants {
        let mut per_group = vec![0usize; g_count + 1];
        for &b in allowed {
            per_group[grouping.index_of(b)] += 1;
        }
        let mut next: HashMap<Vec<usize>, BigUint> = HashMap::new();
        for (offs, w) in &configs {
            for (g, &t) in per_group.iter().enumerate().filter(|(_, &t)| t > 0) {
                let mut o = offs.clone();
                if g < g_count {
                    for (k, set) in counters.iter().enumerate() {
                        if set.binary_search(&g).is_ok() {
                            o[k] += 1;
                        }
                    }
                }
                *next.entry(o).or_insert_with(BigUint::zero) += w * BigUint::from(t);
            }
        }
        configs = next;
    }
    configs
}

pub(crate) fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

struct Schedule {
    steps: Vec<Step>,
    initial_checks: Vec<usize>,
    /// Counters held in the starting state, after `u`.
    layout: Vec<usize>,
}

/// Greedy group order keeping few counters live, and the per-step layouts.
/// Counters flagged in `preload` start live because constants feed them.
fn schedule(
    counters: &[Vec<usize>],
    constraint_counters: &[(usize, usize)],
    g_count: usize,
    preload: &[bool],
) -> Schedule {
    let mut remaining_groups: Vec<usize> = (0..g_count).collect();
    let mut left_in_counter: Vec<usize> = counters.iter().map(Vec::len).collect();
    let mut pending: Vec<bool> = vec![true; constraint_counters.len()];

    let complete = |left: &[usize], j: usize| {
        let (c, t) = constraint_counters[j];
        left[c] == 0 && left[t] == 0
    };
    let initial_checks: Vec<usize> = (0..constraint_counters.len())
        .filter(|&j| complete(&left_in_counter, j))
        .collect();
    for &j in &initial_checks {
        pending[j] = false;
    }
    let reads = |j: usize, k: usize| constraint_counters[j].0 == k || constraint_counters[j].1 == k;
    let mut layout: Vec<usize> = (0..counters.len())
        .filter(|&k| {
            preload[k] && (0..constraint_counters.len()).any(|j| pending[j] && reads(j, k))
        })
        .collect();
    let initial_layout = layout.clone();
    let mut activated: Vec<bool> = (0..counters.len()).map(|k| layout.contains(&k)).collect();

    let mut steps = Vec::new();
    while !remaining_groups.is_empty() {
        // Pick the group leaving the smallest live layout afterwards.
        let mut best: Option<(usize, usize, usize)> = None; // (live_after, new, pos)
        for (pos, &g) in remaining_groups.iter().enumerate() {
            let touched: Vec<usize> = (0..counters.len())
                .filter(|&k| counters[k].binary_search(&g).is_ok())
                .collect();
            let new = touched.iter().filter(|&&k| !activated[k]).count();
            let mut left = left_in_counter.clone();
            for &k in &touched {
                left[k] -= 1;
            }
            let still_needed = |k: usize| {
                (0..constraint_counters.len())
                    .any(|j| pending[j] && !complete(&left, j) && reads(j, k))
            };
            let live_after = layout
                .iter()
                .chain(touched.iter().filter(|&&k| !activated[k]))
                .filter(|&&k| still_needed(k))
                .count();
            let cand = (live_after, new, pos);
            if best.is_none_or(|b| (cand.0, cand.1) < (b.0, b.1)) {
                best = Some(cand);
            }
        }
        let (_, _, pos) = best.expect("nonempty");
        let g = remaining_groups.remove(pos);

        let touched: Vec<usize> = (0..counters.len())
            .filter(|&k| counters[k].binary_search(&g).is_ok())
            .collect();
        let mut extended = layout.clone();
        for &k in &touched {
            if !activated[k] {
                activated[k] = true;
                extended.push(k);
            }
            left_in_counter[k] -= 1;
        }
        // State position of a counter: `u` sits at 0.
        let pos_of = |k: usize| extended.iter().position(|&c| c == k).map(|p| p + 1);
        let incr: Vec<usize> = std::iter::once(0)
            .chain(touched.iter().map(|&k| pos_of(k).expect("active")))
            .collect();
        let checks: Vec<Check> = (0..constraint_counters.len())
            .filter(|&j| pending[j] && complete(&left_in_counter, j))
            .map(|j| Check {
                constraint: j,
                class: pos_of(constraint_counters[j].0),
                target: pos_of(constraint_counters[j].1),
            })
            .collect();
        for c in &checks {
            pending[c.constraint] = false;
        }
        let needed = |k: usize| (0..constraint_counters.len()).any(|j| pending[j] && reads(j, k));
        let kept: Vec<usize> = (0..extended.len())
            .filter(|&p| needed(extended[p]))
            .collect();
        layout = kept.iter().map(|&p| extended[p]).collect();
        let keep = std::iter::once(0)
            .chain(kept.iter().map(|&p| p + 1))
            .collect();
        steps.push(Step {
            group: g,
            width: extended.len() + 1,
            incr,
            checks,
            keep,
        });
    }
    Schedule {
        steps,
        initial_checks,
        layout: initial_layout,
    }
}
