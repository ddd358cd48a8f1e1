//! Tokenizer shared by the query and program parsers.

use std::fmt;

use crate::relcore::Value;

/// Byte offset plus 1-based line/column of a token start.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Span {
    pub offset: usize,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Num(String),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Num(s) => write!(f, "number {s}"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{span}: {msg}")]
pub struct SyntaxError {
    pub msg: String,
    pub span: Span,
}

// Longest first so that `<=` wins over `<`.
const PUNCTS: &[&str] = &[
    "/\\", "==", "<=", ">=", "(", ")", "[", "]", "{", "}", ",", ".", ":", "+", "-", "*", ";", "=",
];

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Span)>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1usize, 0usize);
    let span_at = |i: usize, line: usize, line_start: usize| Span {
        offset: i,
        line,
        col: i - line_start + 1,
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' || (c == b'/' && bytes.get(i + 1) == Some(&b'/')) {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let span = span_at(i, line, line_start);
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
            {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), span));
        } else if c.is_ascii_digit() {
            let start = i;
            let digits = |i: &mut usize| {
                while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                    *i += 1;
                }
            };
            digits(&mut i);
            if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                i += 1;
                digits(&mut i);
            }
            if matches!(bytes.get(i), Some(b'e' | b'E')) {
                let mut j = i + 1;
                if matches!(bytes.get(j), Some(b'+' | b'-')) {
                    j += 1;
                }
                if bytes.get(j).is_some_and(u8::is_ascii_digit) {
                    i = j;
                    digits(&mut i);
                }
            }
            out.push((Tok::Num(src[start..i].to_string()), span));
        } else if c == b'\'' || c == b'"' {
            let quote = c;
            i += 1;
            let mut text = String::new();
            loop {
                let Some(ch) = src[i..].chars().next() else {
                    return Err(SyntaxError {
                        msg: "unterminated string".into(),
                        span,
                    });
                };
                i += ch.len_utf8();
                if ch as u32 == quote as u32 {
                    break;
                }
                if ch == '\\' {
                    let Some(esc) = src[i..].chars().next() else { continue };
                    i += esc.len_utf8();
                    text.push(match esc {
                        'n' => '\n',
                        't' => '\t',
                        other => other,
                    });
                } else {
                    if ch == '\n' {
                        line += 1;
                        line_start = i;
                    }
                    text.push(ch);
                }
            }
            out.push((Tok::Str(text), span));
        } else if let Some(p) = PUNCTS.iter().find(|p| src[i..].starts_with(**p)) {
            i += p.len();
            out.push((Tok::Punct(p), span));
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(SyntaxError {
                msg: format!("unexpected character {ch:?}"),
                span,
            });
        }
    }
    out.push((Tok::Eof, span_at(i, line, line_start)));
    Ok(out)
}

/// Cursor over a token vector.
pub struct Tokens {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Tokens {
    pub fn new(src: &str) -> Result<Tokens, SyntaxError> {
        Ok(Tokens {
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    pub fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    pub fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    /// Position for [`Tokens::restore`].
    pub fn save(&self) -> usize {
        self.pos
    }

    pub fn restore(&mut self, pos: usize) {
        self.pos = pos;
    }

    pub fn error<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            msg: msg.into(),
            span: self.span(),
        })
    }

    pub fn unexpected<T>(&self, wanted: &str) -> Result<T, SyntaxError> {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, p: &str) -> Result<(), SyntaxError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.unexpected(&format!("`{p}`"))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    pub fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Tok::Ident(s) if !is_reserved(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => self.unexpected("identifier"),
        }
    }

    pub fn expect_eof(&self) -> Result<(), SyntaxError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }
}

pub const RESERVED: &[&str] = &[
    "exists", "true", "let", "forall", "sum", "weight", "num", "maximize", "minimize", "subject",
    "to",
];

pub fn is_reserved(s: &str) -> bool {
    RESERVED.contains(&s)
}

/// Renders a constant so that [`tokenize`] reads it back as the same value.
pub fn render_value(v: &Value) -> String {
    let t = v.text();
    let plain_number = v.numeric().is_some() && !t.starts_with('+');
    if plain_number {
        return t.to_string();
    }
    let mut s = String::with_capacity(t.len() + 2);
    s.push('\'');
    for ch in t.chars() {
        match ch {
            '\'' | '\\' => {
                s.push('\\');
                s.push(ch);
            }
            '\n' => s.push_str("\\n"),
            '\t' => s.push_str("\\t"),
            _ => s.push(ch),
        }
    }
    s.push('\'');
    s
}
