use crate::kb::{
    Conjunction, KnowledgeBase, Literal, PredicateSymbol, ProportionConstraint, Query, Relation,
};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MistressVariant {
    /// One statistic: murderers among mistresses whose apartment it was.
    Basic,
    /// Adds a broad statistic (mistresses in general) and a narrow one
    /// (with a smoking gun).
    Extended,
    /// Extended, without knowing the apartment was hers.
    NoApartment,
    /// Extended, plus the smoking gun.
    SmokingGun,
}

impl MistressVariant {
    pub const ALL: [MistressVariant; 4] = [
        MistressVariant::Basic,
        MistressVariant::Extended,
        MistressVariant::NoApartment,
        MistressVariant::SmokingGun,
    ];
}

fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// The murdering-mistress knowledge base. `Mistress` and `Murderer` are
/// binary in the story (`Mistress(x, John)`) and curried here since the
/// victim is fixed.
pub fn build_mistress_kb(variant: MistressVariant) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    kb.pred("Apartment")
        .add_predicate(PredicateSymbol::curried("Mistress", "Mistress(x, John)"))
        .add_predicate(PredicateSymbol::curried("Murderer", "Murderer(x, John)"))
        .constant("Jane");
    let murderer = Conjunction::of(&["Murderer"]);
    kb.constraint(ProportionConstraint::approx(
        murderer.clone(),
        Conjunction::of(&["Apartment", "Mistress"]),
        ratio(3, 5),
    ));
    if variant != MistressVariant::Basic {
        kb.pred("SmokingGun");
        kb.constraint(ProportionConstraint::new(
            murderer.clone(),
            Conjunction::of(&["Mistress"]),
            Relation::AtMost,
            ratio(1, 20),
        ));
        kb.constraint(ProportionConstraint::approx(
            murderer,
            Conjunction::of(&["Apartment", "Mistress", "SmokingGun"]),
            ratio(49, 50),
        ));
    }
    if variant != MistressVariant::NoApartment {
        kb.fact("Jane", Literal::pos("Apartment"));
    }
    kb.fact("Jane", Literal::pos("Mistress"));
    if variant == MistressVariant::SmokingGun {
        kb.fact("Jane", Literal::pos("SmokingGun"));
    }
    kb
}

pub fn mistress_query() -> Query {
    Query::atom("Murderer", "Jane")
}
