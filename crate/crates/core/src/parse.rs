//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | atom ('^' NAT)?
//! atom   := NAT | IDENT | '(' expr ')'
//! ```
//!
//! Identifiers may carry trailing primes (`x2'`). Whitespace, including
//! newlines, is ignored between tokens.

use crate::error::{Error, Result};
use crate::ffpoly::{Polynomial, RingRef};

/// Upper bound on the exponent of a non-monomial base.
const MAX_EXPANDED_POWER: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Nat(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Nat(s) => format!("number `{s}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

impl Lexer {
    fn run(src: &str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { toks: Vec::new() };
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            let start = i;
            match c {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    i += 1;
                    continue;
                }
                b'+' => lx.push(Tok::Plus, start),
                b'-' => lx.push(Tok::Minus, start),
                b'*' => lx.push(Tok::Star, start),
                b'^' => lx.push(Tok::Caret, start),
                b'(' => lx.push(Tok::LParen, start),
                b')' => lx.push(Tok::RParen, start),
                b'0'..=b'9' => {
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    lx.toks.push((Tok::Nat(src[start..i].to_string()), start));
                    continue;
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                        i += 1;
                    }
                    while i < bytes.len() && bytes[i] == b'\'' {
                        i += 1;
                    }
                    lx.toks.push((Tok::Ident(src[start..i].to_string()), start));
                    continue;
                }
                _ => {
                    let ch = src[start..].chars().next().unwrap_or('?');
                    return Err(error_at(
                        src,
                        start,
                        format!("unexpected character `{ch}`"),
                        vec!["number".into(), "identifier".into(), "operator".into()],
                    ));
                }
            }
            i += 1;
        }
        lx.toks.push((Tok::End, src.len()));
        Ok(lx.toks)
    }

    fn push(&mut self, t: Tok, at: usize) {
        self.toks.push((t, at));
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn error_at(src: &str, offset: usize, message: String, expected: Vec<String>) -> Error {
    let (line, column) = line_col(src, offset);
    Error::Parse {
        line,
        column,
        message,
        expected,
    }
}

struct Parser<'a> {
    src: &'a str,
    ring: &'a RingRef,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> Error {
        error_at(
            self.src,
            self.offset(),
            format!("unexpected {}", self.peek().describe()),
            expected.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?)?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = acc.mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(self.factor()?.neg());
        }
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let k = match self.peek().clone() {
            Tok::Nat(s) => {
                self.bump();
                s.parse::<u32>().map_err(|_| {
                    error_at(self.src, at, format!("exponent `{s}` is too large"), vec![])
                })?
            }
            other => {
                return Err(error_at(
                    self.src,
                    at,
                    format!("unexpected {} after `^`", other.describe()),
                    vec!["exponent (natural number)".into()],
                ))
            }
        };
        if !base.is_monomial() && !base.is_zero() && k as u64 > MAX_EXPANDED_POWER {
            return Err(Error::OutOfRange(format!(
                "power {k} of a non-monomial exceeds {MAX_EXPANDED_POWER}"
            )));
        }
        base.pow(k as u64)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Nat(s) => {
                self.bump();
                let p = self.ring.p().get();
                let v = s
                    .bytes()
                    .fold(0u64, |acc, d| (acc * 10 + (d - b'0') as u64) % p);
                Ok(Polynomial::constant(self.ring, v as i64))
            }
            Tok::Ident(name) => {
                self.bump();
                match self.ring.index_of(&name) {
                    Some(i) => Ok(Polynomial::var(self.ring, i)),
                    None => Err(error_at(
                        self.src,
                        at,
                        format!("undeclared identifier `{name}`"),
                        (0..self.ring.nvars()).map(|i| self.ring.display_name(i)).collect(),
                    )),
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected(&["`)`", "`+`", "`-`", "`*`", "`^`"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.unexpected(&["number", "identifier", "`(`", "`-`"])),
        }
    }
}

/// Parse `src` as a polynomial over `ring`.
pub fn parse_poly(src: &str, ring: &RingRef) -> Result<Polynomial> {
    let toks = Lexer::run(src)?;
    let mut p = Parser {
        src,
        ring,
        toks,
        pos: 0,
    };
    let f = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected(&["`+`", "`-`", "`*`", "`^`", "end of input"]));
    }
    Ok(f)
}
