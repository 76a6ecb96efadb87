use std::fmt::Write;

use crate::kb::{Conjunction, KnowledgeBase};
use crate::scalar::format_rational;

fn conj(c: &Conjunction) -> String {
    c.to_string()
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        if ch == '"' || ch == '\\' {
            out.push('\\');
        }
        out.push(ch);
    }
    out.push('"');
    out
}

/// Canonical text: predicates and constants alphabetical, rules and
/// constraints in KB order, facts sorted by constant then predicate.
pub fn print_kb(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    for p in kb.predicates.values() {
        match &p.curried_from {
            Some(from) => writeln!(out, "pred {} curried {};", p.name, quote(from)),
            None => writeln!(out, "pred {};", p.name),
        }
        .unwrap();
    }
    for c in &kb.constants {
        writeln!(out, "const {c};").unwrap();
    }
    for r in &kb.rules {
        writeln!(
            out,
            "rule forall x: {} => {};",
            conj(&r.antecedent),
            conj(&r.consequent)
        )
        .unwrap();
    }
    for c in &kb.constraints {
        write!(
            out,
            "stat ||{} | {}||x {} {}",
            conj(&c.target),
            conj(&c.condition),
            c.relation.token(),
            format_rational(&c.value)
        )
        .unwrap();
        if c.tolerance_index != 0 {
            write!(out, " tol {}", c.tolerance_index).unwrap();
        }
        out.push_str(";\n");
    }
    for f in &kb.facts {
        writeln!(out, "fact {f};").unwrap();
    }
    out
}
