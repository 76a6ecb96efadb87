use serde::{Deserialize, Serialize};

use super::types::{Conjunction, KnowledgeBase, UniversalRule};
use super::KbError;

/// Default cap on the number of predicates for profile enumeration.
pub const DEFAULT_PREDICATE_CAP: usize = 16;

/// Predicate names in canonical (sorted) order; bit `i` of a profile is
/// the truth value of predicate `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    names: Vec<String>,
}

impl Vocabulary {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        names.sort();
        names.dedup();
        Self { names }
    }

    pub fn of_kb(kb: &KnowledgeBase) -> Self {
        Self {
            names: kb.predicates.keys().cloned().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn compile(&self, conj: &Conjunction) -> Result<CompiledConjunction, KbError> {
        let mut mask = 0u32;
        let mut value = 0u32;
        for lit in conj.literals() {
            let idx = self
                .index_of(&lit.predicate)
                .ok_or_else(|| KbError::UnknownPredicate(lit.predicate.clone()))?;
            mask |= 1 << idx;
            if !lit.negated {
                value |= 1 << idx;
            }
        }
        Ok(CompiledConjunction { mask, value })
    }

    pub fn compile_rule(&self, rule: &UniversalRule) -> Result<CompiledRule, KbError> {
        Ok(CompiledRule {
            antecedent: self.compile(&rule.antecedent)?,
            consequent: self.compile(&rule.consequent)?,
        })
    }

    /// True iff every literal of `formula` holds under `profile`.
    pub fn satisfies(&self, profile: AtomProfile, formula: &Conjunction) -> Result<bool, KbError> {
        Ok(self.compile(formula)?.matches(profile.bits))
    }

    /// Named truth values of a profile, in vocabulary order.
    pub fn describe(&self, profile: AtomProfile) -> Vec<(String, bool)> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), profile.bits >> i & 1 == 1))
            .collect()
    }
}

/// Truth assignment to every predicate of a vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AtomProfile {
    pub bits: u32,
    pub width: u8,
}

impl AtomProfile {
    pub fn new(bits: u32, width: usize) -> Self {
        Self {
            bits,
            width: width as u8,
        }
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits >> index & 1 == 1
    }
}

/// Conjunction as a bitmask test: satisfied iff `bits & mask == value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CompiledConjunction {
    pub mask: u32,
    pub value: u32,
}

impl CompiledConjunction {
    #[inline]
    pub fn matches(&self, bits: u32) -> bool {
        bits & self.mask == self.value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompiledRule {
    pub antecedent: CompiledConjunction,
    pub consequent: CompiledConjunction,
}

impl CompiledRule {
    #[inline]
    pub fn holds(&self, bits: u32) -> bool {
        !self.antecedent.matches(bits) || self.consequent.matches(bits)
    }
}

/// All `2^k` profiles in binary-counter order.
pub fn atom_profiles(vocab: &Vocabulary) -> Result<Vec<AtomProfile>, KbError> {
    atom_profiles_capped(vocab, DEFAULT_PREDICATE_CAP)
}

pub fn atom_profiles_capped(vocab: &Vocabulary, cap: usize) -> Result<Vec<AtomProfile>, KbError> {
    let k = vocab.len();
    if k > cap || k > 31 {
        return Err(KbError::TooManyPredicates {
            count: k,
            cap: cap.min(31),
        });
    }
    Ok((0..1u32 << k)
        .map(|bits| AtomProfile::new(bits, k))
        .collect())
}

/// Propositional reasoning over a KB's universal rules.
///
/// `A` entails `B` under the rules iff every profile allowed by the rules
/// that satisfies `A` also satisfies `B`.
#[derive(Debug, Clone)]
pub struct RuleLogic {
    vocab: Vocabulary,
    feasible: Vec<u32>,
}

impl RuleLogic {
    pub fn new(kb: &KnowledgeBase) -> Result<Self, KbError> {
        let vocab = Vocabulary::of_kb(kb);
        let rules = kb
            .rules
            .iter()
            .map(|r| vocab.compile_rule(r))
            .collect::<Result<Vec<_>, _>>()?;
        let feasible = atom_profiles(&vocab)?
            .into_iter()
            .map(|p| p.bits)
            .filter(|&bits| rules.iter().all(|r| r.holds(bits)))
            .collect();
        Ok(Self { vocab, feasible })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn feasible(&self) -> impl Iterator<Item = AtomProfile> + '_ {
        let k = self.vocab.len();
        self.feasible.iter().map(move |&b| AtomProfile::new(b, k))
    }

    pub fn entails(
        &self,
        premise: &Conjunction,
        conclusion: &Conjunction,
    ) -> Result<bool, KbError> {
        let p = self.vocab.compile(premise)?;
        let c = self.vocab.compile(conclusion)?;
        Ok(self.feasible.iter().all(|&b| !p.matches(b) || c.matches(b)))
    }

    /// Whether some rule-respecting profile satisfies `formula`.
    pub fn satisfiable(&self, formula: &Conjunction) -> Result<bool, KbError> {
        let f = self.vocab.compile(formula)?;
        Ok(self.feasible.iter().any(|&b| f.matches(b)))
    }

    /// `premise => not formula`, i.e. the two are jointly unsatisfiable.
    pub fn refutes(&self, premise: &Conjunction, formula: &Conjunction) -> Result<bool, KbError> {
        Ok(match premise.and(formula) {
            None => true,
            Some(both) => !self.satisfiable(&both)?,
        })
    }

    pub fn equivalent(&self, a: &Conjunction, b: &Conjunction) -> Result<bool, KbError> {
        Ok(self.entails(a, b)? && self.entails(b, a)?)
    }

    /// Counts of rule-respecting profiles satisfying `condition` and
    /// `condition & target`.
    pub fn profile_counts(
        &self,
        target: &Conjunction,
        condition: &Conjunction,
    ) -> Result<(usize, usize), KbError> {
        let c = self.vocab.compile(condition)?;
        let t = self.vocab.compile(target)?;
        let in_class = self.feasible.iter().filter(|&&b| c.matches(b));
        let (mut class, mut hit) = (0, 0);
        for &b in in_class {
            class += 1;
            if t.matches(b) {
                hit += 1;
            }
        }
        Ok((class, hit))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::types::Literal;

    fn vocab2() -> Vocabulary {
        Vocabulary::new(["Copy", "Access"])
    }

    #[test]
    fn profile_counts_are_powers_of_two() {
        assert_eq!(
            atom_profiles(&Vocabulary::new(Vec::<String>::new()))
                .unwrap()
                .len(),
            1
        );
        assert_eq!(atom_profiles(&vocab2()).unwrap().len(), 4);
        let v = Vocabulary::new(["Apartment", "Mistress", "Murderer", "SmokingGun"]);
        let ps = atom_profiles(&v).unwrap();
        assert_eq!(ps.len(), 16);
        let distinct: std::collections::BTreeSet<_> = ps.iter().collect();
        assert_eq!(distinct.len(), 16);
        assert!(ps.windows(2).all(|w| w[0].bits + 1 == w[1].bits));
    }

    #[test]
    fn cap_is_enforced() {
        let v = Vocabulary::new((0..17).map(|i| format!("P{i}")));
        assert!(matches!(
            atom_profiles(&v),
            Err(KbError::TooManyPredicates { count: 17, .. })
        ));
    }

    #[test]
    fn satisfies_literals() {
        let v = vocab2();
        // Access is bit 0, Copy is bit 1.
        let copy_only = AtomProfile::new(0b10, 2);
        let both = AtomProfile::new(0b11, 2);
        assert!(v.satisfies(copy_only, &Conjunction::truth()).unwrap());
        assert!(!v
            .satisfies(copy_only, &Conjunction::of(&["Copy", "Access"]))
            .unwrap());
        assert!(!v
            .satisfies(both, &Conjunction::literal(Literal::neg("Copy")))
            .unwrap());
        assert!(v.satisfies(both, &Conjunction::of(&["Copy"])).unwrap());
        assert!(matches!(
            v.satisfies(both, &Conjunction::of(&["Ghost"])),
            Err(KbError::UnknownPredicate(_))
        ));
    }

    #[test]
    fn rule_logic_entailment() {
        let mut kb = KnowledgeBase::new();
        kb.pred("Copy")
            .pred("Access")
            .rule(UniversalRule::implies("Copy", "Access"));
        let logic = RuleLogic::new(&kb).unwrap();
        assert_eq!(logic.feasible().count(), 3);
        assert!(logic
            .entails(&Conjunction::of(&["Copy"]), &Conjunction::of(&["Access"]))
            .unwrap());
        assert!(!logic
            .entails(&Conjunction::of(&["Access"]), &Conjunction::of(&["Copy"]))
            .unwrap());
        let no_access = Conjunction::literal(Literal::neg("Access"));
        assert!(logic
            .refutes(&no_access, &Conjunction::of(&["Copy"]))
            .unwrap());
        assert_eq!(
            logic
                .profile_counts(&Conjunction::of(&["Access"]), &Conjunction::truth())
                .unwrap(),
            (3, 2)
        );
    }
}
