use serde::{Deserialize, Serialize};

/// Byte range plus 1-based line/column of its start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SourceSpan {
    pub begin: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    pub fn join(self, other: SourceSpan) -> SourceSpan {
        SourceSpan {
            begin: self.begin,
            end: other.end.max(self.begin),
            line: self.line,
            column: self.column,
        }
    }
}

impl std::fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Semi,
    LParen,
    RParen,
    Colon,
    Amp,
    Arrow,
    DoubleBar,
    Bar,
    Approx,
    AtMost,
    AtLeast,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Str(_) => "string".into(),
            Tok::Semi => "`;`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::DoubleBar => "`||`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Approx => "`~=`".into(),
            Tok::AtMost => "`<=~`".into(),
            Tok::AtLeast => "`>=~`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub span: SourceSpan,
    pub message: String,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.text[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn mark(&self) -> (usize, usize, usize) {
        (self.pos, self.line, self.col)
    }

    fn span_from(&self, (begin, line, column): (usize, usize, usize)) -> SourceSpan {
        SourceSpan {
            begin,
            end: self.pos,
            line,
            column,
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Tokenizes the whole input; lexical errors are collected, not fatal.
pub fn tokenize(text: &str) -> (Vec<Token>, Vec<LexError>) {
    let mut cur = Cursor {
        text,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let start = cur.mark();
        let tok = if is_ident_start(c) {
            let mut s = String::new();
            while let Some(c) = cur.peek().filter(|&c| is_ident_continue(c)) {
                s.push(c);
                cur.bump();
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit()
            || c == '.'
            || (c == '-'
                && cur
                    .peek_at(1)
                    .is_some_and(|d| d.is_ascii_digit() || d == '.'))
        {
            let mut s = String::new();
            s.push(c);
            cur.bump();
            while let Some(c) = cur
                .peek()
                .filter(|c| c.is_ascii_digit() || *c == '.' || *c == '/')
            {
                s.push(c);
                cur.bump();
            }
            Tok::Number(s)
        } else if c == '"' {
            cur.bump();
            let mut s = String::new();
            let mut closed = false;
            while let Some(c) = cur.bump() {
                match c {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => match cur.bump() {
                        Some(e) => s.push(e),
                        None => break,
                    },
                    _ => s.push(c),
                }
            }
            if !closed {
                errors.push(LexError {
                    span: cur.span_from(start),
                    message: "unterminated string".into(),
                });
                continue;
            }
            Tok::Str(s)
        } else {
            cur.bump();
            match (c, cur.peek()) {
                (';', _) => Tok::Semi,
                ('(', _) => Tok::LParen,
                (')', _) => Tok::RParen,
                (':', _) => Tok::Colon,
                ('&', _) | ('∧', _) => Tok::Amp,
                ('|', Some('|')) => {
                    cur.bump();
                    Tok::DoubleBar
                }
                ('|', _) => Tok::Bar,
                ('=', Some('>')) => {
                    cur.bump();
                    Tok::Arrow
                }
                ('~', Some('=')) => {
                    cur.bump();
                    Tok::Approx
                }
                ('≈', _) => Tok::Approx,
                ('⪯', _) => Tok::AtMost,
                ('⪰', _) => Tok::AtLeast,
                ('<', Some('=')) | ('>', Some('=')) => {
                    cur.bump();
                    if cur.peek() == Some('~') {
                        cur.bump();
                        if c == '<' {
                            Tok::AtMost
                        } else {
                            Tok::AtLeast
                        }
                    } else {
                        errors.push(LexError {
                            span: cur.span_from(start),
                            message: format!("expected `{c}=~`"),
                        });
                        continue;
                    }
                }
                _ => {
                    errors.push(LexError {
                        span: cur.span_from(start),
                        message: format!("unexpected character `{c}`"),
                    });
                    continue;
                }
            }
        };
        tokens.push(Token {
            tok,
            span: cur.span_from(start),
        });
    }
    let end = cur.mark();
    tokens.push(Token {
        tok: Tok::Eof,
        span: cur.span_from(end),
    });
    (tokens, errors)
}
