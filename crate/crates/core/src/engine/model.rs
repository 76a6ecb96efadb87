//! KB compiled to bitmasks, with feasible profiles grouped by how they
//! interact with the proportion constraints.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use super::EngineError;
use crate::kb::{
    atom_profiles_capped, AtomProfile, CompiledConjunction, KnowledgeBase, Relation, ToleranceSpec,
    Vocabulary,
};
use crate::Rational;

#[derive(Debug, Clone)]
pub(crate) struct CompiledConstraint {
    pub target: CompiledConjunction,
    pub condition: CompiledConjunction,
    pub relation: Relation,
    pub value: Rational,
    pub tolerance_index: usize,
}

impl CompiledConstraint {
    /// Inclusive range of admissible target counts for a reference class
    /// of size `class`; `None` when no count qualifies (including the
    /// empty class, which is never satisfied).
    pub fn window(&self, class: usize, tau: &Rational) -> Option<(usize, usize)> {
        if class == 0 {
            return None;
        }
        let c = Rational::from_integer(class.into());
        let lo = match self.relation {
            Relation::AtMost => 0,
            _ => ceil_nonneg(&(&c * (&self.value - tau))),
        };
        let hi = match self.relation {
            Relation::AtLeast => class,
            _ => floor_clamped(&(&c * (&self.value + tau)), class)?,
        };
        (lo <= hi).then_some((lo, hi))
    }
}

fn ceil_nonneg(r: &Rational) -> usize {
    if !r.is_positive() {
        return 0;
    }
    let q = r.numer().div_ceil(r.denom());
    q.to_usize().unwrap_or(usize::MAX)
}

fn floor_clamped(r: &Rational, max: usize) -> Option<usize> {
    if r.is_negative() {
        return None;
    }
    let q = r.numer().div_floor(r.denom());
    Some(q.to_usize().unwrap_or(usize::MAX).min(max))
}

/// A KB ready for counting: feasible profiles, per-constant admissible
/// profiles and compiled constraints.
#[derive(Debug, Clone)]
pub(crate) struct WorldModel {
    pub vocab: Vocabulary,
    pub feasible: Vec<u32>,
    pub constants: Vec<(String, Vec<u32>)>,
    pub constraints: Vec<CompiledConstraint>,
}

impl WorldModel {
    pub fn compile(kb: &KnowledgeBase, predicate_cap: usize) -> Result<Self, EngineError> {
        let vocab = Vocabulary::of_kb(kb);
        let rules = kb
            .rules
            .iter()
            .map(|r| vocab.compile_rule(r))
            .collect::<Result<Vec<_>, _>>()?;
        let feasible: Vec<u32> = atom_profiles_capped(&vocab, predicate_cap)?
            .into_iter()
            .map(|p| p.bits)
            .filter(|&b| rules.iter().all(|r| r.holds(b)))
            .collect();

        let mut constants = Vec::new();
        for name in &kb.constants {
            let mut facts = Vec::new();
            for f in kb.facts.iter().filter(|f| &f.constant == name) {
                let lit = crate::kb::Conjunction::literal(f.literal.clone());
                facts.push(vocab.compile(&lit)?);
            }
            let allowed = feasible
                .iter()
                .copied()
                .filter(|&b| facts.iter().all(|f| f.matches(b)))
                .collect();
            constants.push((name.clone(), allowed));
        }
        for f in &kb.facts {
            if !kb.constants.contains(&f.constant) {
                return Err(EngineError::Kb(crate::kb::KbError::UnknownConstant(
                    f.constant.clone(),
                )));
            }
        }

        let constraints = kb
            .constraints
            .iter()
            .map(|c| {
                Ok(CompiledConstraint {
                    target: vocab.compile(&c.target)?,
                    condition: vocab.compile(&c.condition)?,
                    relation: c.relation,
                    value: c.value.clone(),
                    tolerance_index: c.tolerance_index,
                })
            })
            .collect::<Result<Vec<_>, EngineError>>()?;

        Ok(Self {
            vocab,
            feasible,
            constants,
            constraints,
        })
    }

    pub fn feasible_profiles(&self) -> Vec<AtomProfile> {
        let k = self.vocab.len();
        self.feasible
            .iter()
            .map(|&b| AtomProfile::new(b, k))
            .collect()
    }

    /// Tolerance for each constraint. A single-entry spec applies to every
    /// tolerance index.
    pub fn resolve_taus(&self, taus: &ToleranceSpec) -> Result<Vec<Rational>, EngineError> {
        if !taus.is_valid() {
            return Err(EngineError::InvalidTolerance(taus.clone()));
        }
        self.constraints
            .iter()
            .map(|c| {
                let tau = if taus.taus.len() == 1 {
                    taus.taus.first()
                } else {
                    taus.get(c.tolerance_index)
                };
                tau.cloned().ok_or(EngineError::ToleranceIndexOutOfRange {
                    index: c.tolerance_index,
                    available: taus.taus.len(),
                })
            })
            .collect()
    }

    /// Signature of a profile: per constraint, 0 = outside the reference
    /// class, 1 = in class without target, 2 = in class with target.
    pub fn signature(&self, bits: u32) -> Vec<u8> {
        self.constraints
            .iter()
            .map(
                |c| match (c.condition.matches(bits), c.target.matches(bits)) {
                    (false, _) => 0,
                    (true, false) => 1,
                    (true, true) => 2,
                },
            )
            .collect()
    }

    pub fn grouping(&self) -> Grouping {
        let mut by_sig: BTreeMap<Vec<u8>, Vec<u32>> = BTreeMap::new();
        for &b in &self.feasible {
            by_sig.entry(self.signature(b)).or_default().push(b);
        }
        let mut groups = Vec::new();
        let mut irrelevant = Vec::new();
        for (sig, profiles) in by_sig {
            if sig.iter().all(|&s| s == 0) {
                irrelevant = profiles;
            } else {
                groups.push(ProfileGroup {
                    signature: sig,
                    profiles,
                });
            }
        }
        Grouping { groups, irrelevant }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ProfileGroup {
    pub signature: Vec<u8>,
    pub profiles: Vec<u32>,
}

/// Feasible profiles split into constraint-relevant groups plus the
/// profiles outside every reference class.
#[derive(Debug, Clone)]
pub(crate) struct Grouping {
    pub groups: Vec<ProfileGroup>,
    pub irrelevant: Vec<u32>,
}

impl Grouping {
    /// Group index of a profile; `groups.len()` stands for the irrelevant group.
    pub fn index_of(&self, bits: u32) -> usize {
        self.groups
            .iter()
            .position(|g| g.profiles.contains(&bits))
            .unwrap_or(self.groups.len())
    }
}
