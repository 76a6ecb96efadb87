//! Text format for knowledge bases (`.rwkb`) and queries.
//!
//! ```text
//! # comment
//! pred Mistress curried "Mistress(x, John)";
//! const Jane;
//! rule forall x: Copy(x) => Access(x);
//! stat ||Murderer(x) | Apartment(x) & Mistress(x)||x ~= 0.6 tol 0;
//! fact Apartment(Jane);
//! fact not Access(xd);
//! ```
//!
//! Relations are `~=` (approximately), `<=~` (approximately at most) and
//! `>=~` (approximately at least). Values are decimals or fractions and are
//! stored exactly. `true` is the empty conjunction; `||P(x)||x` is shorthand
//! for `||P(x) | true||x`.

mod lexer;
mod parser;
mod printer;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use lexer::SourceSpan;
pub use parser::{parse_kb, parse_kb_with_spans, parse_query, VARIABLE};
pub use printer::print_kb;

use crate::kb::{KnowledgeBase, Query, ViolationKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// A semantic problem found after a successful parse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: ViolationKind,
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(span) => write!(f, "{span}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DslError {
    #[error("syntax errors:\n{}", join_lines(.0))]
    Syntax(Vec<ParseError>),
    #[error("invalid knowledge base:\n{}", join_lines(.0))]
    Validation(Vec<Diagnostic>),
    #[error("{span}: unknown symbol `{name}`")]
    UnknownSymbol { name: String, span: SourceSpan },
}

fn join_lines<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Source spans of the declarations of a parsed KB.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceMap {
    pub predicates: BTreeMap<String, SourceSpan>,
    pub constants: BTreeMap<String, SourceSpan>,
    pub rules: Vec<SourceSpan>,
    pub constraints: Vec<SourceSpan>,
    pub constraint_values: Vec<SourceSpan>,
    #[serde(with = "fact_spans")]
    pub facts: BTreeMap<(String, String), SourceSpan>,
}

mod fact_spans {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        constant: String,
        predicate: String,
        span: SourceSpan,
    }

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<(String, String), SourceSpan>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let v: Vec<Entry> = m
            .iter()
            .map(|((c, p), span)| Entry {
                constant: c.clone(),
                predicate: p.clone(),
                span: *span,
            })
            .collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(String, String), SourceSpan>, D::Error> {
        let v = Vec::<Entry>::deserialize(d)?;
        Ok(v.into_iter()
            .map(|e| ((e.constant, e.predicate), e.span))
            .collect())
    }
}

pub fn kb_to_json(kb: &KnowledgeBase) -> String {
    serde_json::to_string_pretty(kb).expect("KB serializes")
}

pub fn kb_from_json(text: &str) -> Result<KnowledgeBase, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn query_to_json(q: &Query) -> String {
    serde_json::to_string_pretty(q).expect("query serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{Conjunction, Literal, Relation};
    use crate::scalar::parse_rational;

    const MISTRESS: &str = r#"
        # the basic murdering-mistress knowledge base
        pred Apartment;
        pred Mistress curried "Mistress(x, John)";
        pred Murderer curried "Murderer(x, John)";
        const Jane;
        fact Apartment(Jane);
        fact Mistress(Jane);
        stat ||Murderer(x) | Apartment(x) & Mistress(x)||x ~= 0.6;
    "#;

    #[test]
    fn parses_mistress_kb() {
        let kb = parse_kb(MISTRESS).unwrap();
        assert_eq!(kb.facts.len(), 2);
        assert_eq!(kb.constraints.len(), 1);
        assert_eq!(kb.constraints[0].value, parse_rational("3/5").unwrap());
        assert_eq!(kb.constraints[0].relation, Relation::Approx);
        assert_eq!(
            kb.predicates["Mistress"].curried_from.as_deref(),
            Some("Mistress(x, John)")
        );
    }

    #[test]
    fn empty_input_is_vacuous() {
        let kb = parse_kb("").unwrap();
        assert!(kb.predicates.is_empty());
        assert_eq!(kb, KnowledgeBase::default());
        assert!(parse_kb("  # only a comment\n").is_ok());
    }

    #[test]
    fn out_of_range_value_points_at_value() {
        let text = "pred P; pred Q; stat ||P(x) | Q(x)||x ~= 1.7;";
        match parse_kb(text) {
            Err(DslError::Validation(d)) => {
                assert_eq!(d.len(), 1);
                assert_eq!(d[0].kind, ViolationKind::ValueOutOfRange);
                let span = d[0].span.unwrap();
                assert_eq!(&text[span.begin..span.end], "1.7");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_collected_with_spans() {
        let text = "pred P\nconst c;\nfact P(c;\nstat ||P(x)||y ~= 1/2;";
        match parse_kb(text) {
            Err(DslError::Syntax(errs)) => {
                assert!(errs.len() >= 2);
                for e in &errs {
                    assert!(e.span.begin <= e.span.end && e.span.end <= text.len());
                    assert!(!e.message.is_empty());
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn contradictory_facts_are_validation_errors() {
        let text = "pred P; const c; fact P(c); fact not P(c);";
        match parse_kb(text) {
            Err(DslError::Validation(d)) => {
                assert_eq!(d[0].kind, ViolationKind::ContradictoryFacts)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unconditional_and_true_forms() {
        let kb = parse_kb("pred P; stat ||P(x)||x >=~ 1/4 tol 2; stat ||P(x) | true||x <=~ 3/4;")
            .unwrap();
        assert!(kb.constraints[0].condition.is_empty());
        assert_eq!(kb.constraints[0].tolerance_index, 2);
        assert_eq!(kb.constraints[1].relation, Relation::AtMost);
    }

    #[test]
    fn queries() {
        let kb = parse_kb(MISTRESS).unwrap();
        let q = parse_query("Murderer(Jane)", &kb).unwrap();
        assert_eq!(q, Query::atom("Murderer", "Jane"));
        let q = parse_query("not Murderer(Jane) & Apartment(Jane)", &kb).unwrap();
        assert_eq!(
            q.target,
            Conjunction::from_literals([Literal::neg("Murderer"), Literal::pos("Apartment")])
                .unwrap()
        );
        assert!(matches!(
            parse_query("Murderer(ghost)", &kb),
            Err(DslError::UnknownSymbol { .. })
        ));
        assert!(matches!(
            parse_query("Ghost(Jane)", &kb),
            Err(DslError::UnknownSymbol { .. })
        ));
        assert!(matches!(
            parse_query("Murderer(Jane) &", &kb),
            Err(DslError::Syntax(_))
        ));
    }

    #[test]
    fn json_mirrors_fields() {
        let kb = parse_kb(MISTRESS).unwrap();
        let json = kb_to_json(&kb);
        assert!(json.contains("\"curried_from\""));
        assert!(json.contains("\"value\": \"3/5\""));
        assert_eq!(kb_from_json(&json).unwrap(), kb);
    }
}
