use super::lexer::{tokenize, SourceSpan, Tok, Token};
use super::{Diagnostic, DslError, ParseError, SourceMap};
use crate::kb::{
    validate_kb, Conjunction, GroundFact, KnowledgeBase, Literal, Location, PredicateSymbol,
    ProportionConstraint, Query, Relation, UniversalRule, ViolationKind,
};
use crate::scalar::parse_rational;

/// The only variable name the fragment allows.
pub const VARIABLE: &str = "x";

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn error(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError {
            span: t.span,
            message: format!("expected {expected}, found {}", t.tok.describe()),
            expected: Some(expected.to_string()),
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if self.peek().tok == tok {
            Ok(self.next().span)
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.is_keyword(kw) {
            Ok(self.next().span)
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.next().span))
            }
            _ => Err(self.error(what)),
        }
    }

    /// Skips past the next `;` (or to end of input).
    fn recover(&mut self) {
        loop {
            match self.next().tok {
                Tok::Semi | Tok::Eof => return,
                _ => {}
            }
        }
    }
}

#[derive(Debug)]
struct RawLiteral {
    literal: Literal,
    arg: String,
    span: SourceSpan,
}

impl Parser {
    /// `[not] NAME ( ARG )`
    fn literal(&mut self) -> PResult<RawLiteral> {
        let start = self.peek().span;
        let negated = if self.is_keyword("not") {
            self.next();
            true
        } else {
            false
        };
        let (name, _) = self.ident("predicate name")?;
        self.expect(Tok::LParen)?;
        let (arg, _) = self.ident("argument")?;
        let end = self.expect(Tok::RParen)?;
        Ok(RawLiteral {
            literal: Literal {
                predicate: name,
                negated,
            },
            arg,
            span: start.join(end),
        })
    }

    fn conjunction(&mut self, dup: &mut Vec<Diagnostic>) -> PResult<Conjunction> {
        if self.is_keyword("true") {
            self.next();
            return Ok(Conjunction::truth());
        }
        let mut conj = Conjunction::truth();
        loop {
            let raw = self.literal()?;
            if raw.arg != VARIABLE {
                return Err(ParseError {
                    span: raw.span,
                    message: format!(
                        "formula literals must use the variable `x`, found `{}`",
                        raw.arg
                    ),
                    expected: Some("`x`".into()),
                });
            }
            let pred = raw.literal.predicate.clone();
            conj = match conj.clone().with(raw.literal) {
                Ok(c) => c,
                Err(_) => {
                    dup.push(Diagnostic {
                        kind: ViolationKind::DuplicatePredicate,
                        message: format!("predicate `{pred}` appears twice in one conjunction"),
                        span: Some(raw.span),
                    });
                    conj
                }
            };
            if self.peek().tok == Tok::Amp {
                self.next();
            } else {
                return Ok(conj);
            }
        }
    }

    fn rational(&mut self) -> PResult<(crate::Rational, SourceSpan)> {
        match &self.peek().tok {
            Tok::Number(s) => {
                let s = s.clone();
                let span = self.next().span;
                parse_rational(&s)
                    .map(|r| (r, span))
                    .map_err(|e| ParseError {
                        span,
                        message: e.to_string(),
                        expected: Some("decimal or fraction".into()),
                    })
            }
            _ => Err(self.error("rational value")),
        }
    }

    fn index(&mut self) -> PResult<usize> {
        match &self.peek().tok {
            Tok::Number(s) if s.chars().all(|c| c.is_ascii_digit()) => {
                let v = s.parse().map_err(|_| self.error("tolerance index"))?;
                self.next();
                Ok(v)
            }
            _ => Err(self.error("tolerance index")),
        }
    }
}

#[derive(Default)]
struct Builder {
    kb: KnowledgeBase,
    map: SourceMap,
    diags: Vec<Diagnostic>,
}

impl Builder {
    fn statement(&mut self, p: &mut Parser) -> PResult<()> {
        let start = p.peek().span;
        let (kw, _) = p.ident("a declaration keyword (`pred`, `const`, `fact`, `rule`, `stat`)")?;
        match kw.as_str() {
            "pred" => {
                let (name, _) = p.ident("predicate name")?;
                let curried = if p.is_keyword("curried") {
                    p.next();
                    match p.next().tok {
                        Tok::Str(s) => Some(s),
                        _ => return Err(p.error("quoted string")),
                    }
                } else {
                    None
                };
                let end = p.expect(Tok::Semi)?;
                let span = start.join(end);
                if self.kb.predicates.contains_key(&name) {
                    self.diags.push(Diagnostic {
                        kind: ViolationKind::DuplicateDeclaration,
                        message: format!("predicate `{name}` declared twice"),
                        span: Some(span),
                    });
                }
                self.map.predicates.insert(name.clone(), span);
                self.kb.add_predicate(PredicateSymbol {
                    name,
                    curried_from: curried,
                });
            }
            "const" => {
                let (name, _) = p.ident("constant name")?;
                let end = p.expect(Tok::Semi)?;
                let span = start.join(end);
                if !self.kb.constants.insert(name.clone()) {
                    self.diags.push(Diagnostic {
                        kind: ViolationKind::DuplicateDeclaration,
                        message: format!("constant `{name}` declared twice"),
                        span: Some(span),
                    });
                }
                self.map.constants.insert(name, span);
            }
            "fact" => {
                let raw = p.literal()?;
                let end = p.expect(Tok::Semi)?;
                let fact = GroundFact::new(raw.arg, raw.literal);
                self.map
                    .facts
                    .entry((fact.constant.clone(), fact.literal.predicate.clone()))
                    .or_insert(start.join(end));
                self.kb.facts.insert(fact);
            }
            "rule" => {
                p.expect_keyword("forall")?;
                p.expect_keyword(VARIABLE)?;
                p.expect(Tok::Colon)?;
                let antecedent = p.conjunction(&mut self.diags)?;
                p.expect(Tok::Arrow)?;
                let consequent = p.conjunction(&mut self.diags)?;
                let end = p.expect(Tok::Semi)?;
                self.map.rules.push(start.join(end));
                self.kb.rules.push(UniversalRule {
                    antecedent,
                    consequent,
                });
            }
            "stat" => {
                p.expect(Tok::DoubleBar)?;
                let target = p.conjunction(&mut self.diags)?;
                let condition = if p.peek().tok == Tok::Bar {
                    p.next();
                    p.conjunction(&mut self.diags)?
                } else {
                    Conjunction::truth()
                };
                p.expect(Tok::DoubleBar)?;
                p.expect_keyword(VARIABLE)?;
                let relation = match p.peek().tok {
                    Tok::Approx => Relation::Approx,
                    Tok::AtMost => Relation::AtMost,
                    Tok::AtLeast => Relation::AtLeast,
                    _ => return Err(p.error("`~=`, `<=~` or `>=~`")),
                };
                p.next();
                let (value, value_span) = p.rational()?;
                let tolerance_index = if p.is_keyword("tol") {
                    p.next();
                    p.index()?
                } else {
                    0
                };
                let end = p.expect(Tok::Semi)?;
                self.map.constraints.push(start.join(end));
                self.map.constraint_values.push(value_span);
                self.kb.constraints.push(ProportionConstraint {
                    target,
                    condition,
                    relation,
                    value,
                    tolerance_index,
                });
            }
            other => {
                return Err(ParseError {
                    span: p.prev_span(),
                    message: format!("unknown declaration `{other}`"),
                    expected: Some("`pred`, `const`, `fact`, `rule` or `stat`".into()),
                })
            }
        }
        Ok(())
    }
}

/// Parses `.rwkb` text, returning the KB and spans of its parts.
pub fn parse_kb_with_spans(text: &str) -> Result<(KnowledgeBase, SourceMap), DslError> {
    let (tokens, lex_errors) = tokenize(text);
    let mut errors: Vec<ParseError> = lex_errors
        .into_iter()
        .map(|e| ParseError {
            span: e.span,
            message: e.message,
            expected: None,
        })
        .collect();
    let mut parser = Parser { tokens, pos: 0 };
    let mut builder = Builder::default();
    while parser.peek().tok != Tok::Eof {
        if let Err(e) = builder.statement(&mut parser) {
            errors.push(e);
            parser.recover();
        }
    }
    if !errors.is_empty() {
        errors.sort_by_key(|e| e.span.begin);
        return Err(DslError::Syntax(errors));
    }

    let Builder { kb, map, mut diags } = builder;
    for v in validate_kb(&kb).violations {
        let span = match &v.location {
            Location::Constraint { index } if v.kind == ViolationKind::ValueOutOfRange => {
                map.constraint_values.get(*index).copied()
            }
            loc => map.span_of(loc),
        };
        diags.push(Diagnostic {
            kind: v.kind,
            message: v.message,
            span,
        });
    }
    if diags.is_empty() {
        Ok((kb, map))
    } else {
        Err(DslError::Validation(diags))
    }
}

pub fn parse_kb(text: &str) -> Result<KnowledgeBase, DslError> {
    parse_kb_with_spans(text).map(|(kb, _)| kb)
}

/// Parses `[not] P(c) { & [not] Q(c) }` against the symbols of `kb`.
pub fn parse_query(text: &str, kb: &KnowledgeBase) -> Result<Query, DslError> {
    let (tokens, lex_errors) = tokenize(text);
    if let Some(e) = lex_errors.into_iter().next() {
        return Err(DslError::Syntax(vec![ParseError {
            span: e.span,
            message: e.message,
            expected: None,
        }]));
    }
    let mut p = Parser { tokens, pos: 0 };
    let syntax = |e: ParseError| DslError::Syntax(vec![e]);
    let mut literals: Vec<RawLiteral> = Vec::new();
    loop {
        literals.push(p.literal().map_err(syntax)?);
        if p.peek().tok == Tok::Amp {
            p.next();
        } else {
            break;
        }
    }
    if p.peek().tok == Tok::Semi {
        p.next();
    }
    if p.peek().tok != Tok::Eof {
        return Err(syntax(p.error("`&` or end of query")));
    }

    let constant = literals[0].arg.clone();
    let mut target = Conjunction::truth();
    for raw in literals {
        if !kb.predicates.contains_key(&raw.literal.predicate) {
            return Err(DslError::UnknownSymbol {
                name: raw.literal.predicate,
                span: raw.span,
            });
        }
        if !kb.constants.contains(&raw.arg) {
            return Err(DslError::UnknownSymbol {
                name: raw.arg,
                span: raw.span,
            });
        }
        if raw.arg != constant {
            return Err(syntax(ParseError {
                span: raw.span,
                message: format!(
                    "a query mentions one constant; found `{}` and `{}`",
                    constant, raw.arg
                ),
                expected: Some(format!("`{constant}`")),
            }));
        }
        let pred = raw.literal.predicate.clone();
        target = target.with(raw.literal).map_err(|_| {
            syntax(ParseError {
                span: raw.span,
                message: format!("predicate `{pred}` appears twice in the query"),
                expected: None,
            })
        })?;
    }
    Ok(Query { constant, target })
}

impl SourceMap {
    pub fn span_of(&self, loc: &Location) -> Option<SourceSpan> {
        match loc {
            Location::Predicate { name } => self.predicates.get(name).copied(),
            Location::Constant { name } => self.constants.get(name).copied(),
            Location::Rule { index } => self.rules.get(*index).copied(),
            Location::Constraint { index } => self.constraints.get(*index).copied(),
            Location::Fact {
                constant,
                predicate,
            } => self
                .facts
                .get(&(constant.clone(), predicate.clone()))
                .copied(),
        }
    }
}
