//! Concrete syntax.
//!
//! ```text
//! term  ::= \x:type. term | λx:type. term | sum
//! sum   ::= prod (('+' | '-') prod)*
//! prod  ::= unary (('*' | '/') unary)*
//! unary ::= '-' unary | app
//! app   ::= atom atom* [lambda]
//! atom  ::= x | number | {n/d} | phi(term, …) | fst atom | snd atom
//!         | (term) | (term, term)
//! type  ::= factor ('*' factor)* ['->' type]      (also × and ⇒ / =>)
//! ```
//!
//! `+ - * /` stand for the primitives `add sub mul div`; `-t` is `sub(0, t)`
//! unless `t` is a literal. A name ending in `'` is the dotted partner of the
//! name without it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use super::prim::PrimRegistry;
use super::subst::{fresh_name, substitute, substitute_one};
use super::term::{Name, Term};
use super::types::Type;
use crate::scalar::parse_decimal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: primitive `{prim}` expects {expected} argument(s), found {found}")]
    Arity { pos: Pos, prim: String, expected: usize, found: usize },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::Arity { pos, .. } => *pos,
        }
    }

    fn at(pos: Pos, message: impl Into<String>) -> Self {
        ParseError::Syntax { pos, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Lambda,
    Colon,
    Dot,
    Comma,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Arrow,
    Ident(String),
    Num(BigRational),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Lambda => f.write_str("`\\`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(r) => write!(f, "number {r}"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex_line(line: &str, lineno: usize, first_col: usize, out: &mut Vec<(Tok, Pos)>) -> Result<(), ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line: lineno, col: first_col + i };
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let simple = match c {
            '\\' | 'λ' => Some(Tok::Lambda),
            ':' => Some(Tok::Colon),
            ',' => Some(Tok::Comma),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '+' => Some(Tok::Plus),
            '*' | '×' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '⇒' | '→' => Some(Tok::Arrow),
            _ => None,
        };
        if two == "->" || two == "=>" {
            out.push((Tok::Arrow, pos));
            i += 2;
        } else if let Some(t) = simple {
            out.push((t, pos));
            i += 1;
        } else if c == '-' {
            out.push((Tok::Minus, pos));
            i += 1;
        } else if c == '.' && !chars.get(i + 1).is_some_and(char::is_ascii_digit) {
            out.push((Tok::Dot, pos));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = parse_decimal(&text).ok_or_else(|| ParseError::at(pos, format!("malformed number `{text}`")))?;
            out.push((Tok::Num(value), pos));
        } else if c == '{' {
            let end = chars[i..]
                .iter()
                .position(|&ch| ch == '}')
                .ok_or_else(|| ParseError::at(pos, "unterminated exact literal"))?;
            let inner: String = chars[i + 1..i + end].iter().filter(|ch| !ch.is_whitespace()).collect();
            let value = parse_exact(&inner).ok_or_else(|| ParseError::at(pos, format!("malformed exact literal `{{{inner}}}`")))?;
            out.push((Tok::Num(value), pos));
            i += end + 1;
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') && chars[i] != 'λ' {
                i += 1;
            }
            while i < chars.len() && chars[i] == '\'' {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
        } else {
            return Err(ParseError::at(pos, format!("unexpected character `{c}`")));
        }
    }
    Ok(())
}

fn parse_exact(inner: &str) -> Option<BigRational> {
    let (n, d) = match inner.split_once('/') {
        Some((n, d)) => (n, d),
        None => (inner, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    (!d.is_zero()).then(|| BigRational::new(n, d))
}

const KEYWORDS: [&str; 3] = ["fst", "snd", "Real"];

struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    prims: &'a PrimRegistry,
    bound: Vec<Name>,
}

impl<'a> Parser<'a> {
    fn new(toks: Vec<(Tok, Pos)>, end: Pos, prims: &'a PrimRegistry) -> Self {
        let mut toks = toks;
        toks.push((Tok::Eof, end));
        Self { toks, at: 0, prims, bound: Vec::new() }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::at(self.pos(), format!("expected {wanted}, found {}", self.peek()))
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of input")),
        }
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        let mut left = self.ty_factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            left = Type::prod(left, self.ty_factor()?);
        }
        if *self.peek() == Tok::Arrow {
            self.bump();
            return Ok(Type::arrow(left, self.ty()?));
        }
        Ok(left)
    }

    fn ty_factor(&mut self) -> Result<Type, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "Real" => {
                self.bump();
                Ok(Type::Real)
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.unexpected("a type")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Lambda {
            return self.lambda();
        }
        self.sum()
    }

    fn lambda(&mut self) -> Result<Term, ParseError> {
        self.expect(Tok::Lambda, "`\\`")?;
        let pos = self.pos();
        let x = match self.bump().0 {
            Tok::Ident(x) if !KEYWORDS.contains(&x.as_str()) => x,
            _ => return Err(ParseError::at(pos, "expected a variable after `\\`")),
        };
        self.expect(Tok::Colon, "`:`")?;
        let ty = self.ty()?;
        self.expect(Tok::Dot, "`.`")?;
        self.bound.push(x.as_str().into());
        let body = self.term();
        self.bound.pop();
        Ok(Term::lam(&x, ty, body?))
    }

    fn infix(&self, name: &str, pos: Pos, l: Term, r: Term) -> Result<Term, ParseError> {
        let p = self
            .prims
            .resolve(name)
            .ok_or_else(|| ParseError::at(pos, format!("operator needs the primitive `{name}`")))?;
        Ok(Term::prim(p, vec![l, r]))
    }

    fn sum(&mut self) -> Result<Term, ParseError> {
        let mut left = self.product()?;
        loop {
            let name = match self.peek() {
                Tok::Plus => "add",
                Tok::Minus => "sub",
                _ => return Ok(left),
            };
            let pos = self.bump().1;
            let right = self.product()?;
            left = self.infix(name, pos, left, right)?;
        }
    }

    fn product(&mut self) -> Result<Term, ParseError> {
        let mut left = self.unary()?;
        loop {
            let name = match self.peek() {
                Tok::Star => "mul",
                Tok::Slash => "div",
                _ => return Ok(left),
            };
            let pos = self.bump().1;
            let right = self.unary()?;
            left = self.infix(name, pos, left, right)?;
        }
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        if *self.peek() != Tok::Minus {
            return self.app();
        }
        let pos = self.bump().1;
        match self.unary()? {
            Term::Lit(r) => Ok(Term::Lit(-r)),
            t => self.infix("sub", pos, Term::int(0), t),
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::Num(_) | Tok::LParen)
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let mut head = self.atom()?;
        loop {
            if self.starts_atom() {
                let arg = self.atom()?;
                head = Term::app(head, arg);
            } else if *self.peek() == Tok::Lambda {
                let arg = self.lambda()?;
                return Ok(Term::app(head, arg));
            } else {
                return Ok(head);
            }
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(r) => Ok(Term::Lit(r)),
            Tok::LParen => {
                let first = self.term()?;
                if *self.peek() == Tok::Comma {
                    self.bump();
                    let second = self.term()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Term::pair(first, second));
                }
                self.expect(Tok::RParen, "`)` or `,`")?;
                Ok(first)
            }
            Tok::Ident(s) if s == "fst" => Ok(Term::fst(self.atom()?)),
            Tok::Ident(s) if s == "snd" => Ok(Term::snd(self.atom()?)),
            Tok::Ident(s) if s == "Real" => Err(ParseError::at(pos, "`Real` is a type, not a term")),
            Tok::Ident(s) => {
                let shadowed = self.bound.iter().any(|b| **b == *s);
                match self.prims.resolve(&s).filter(|_| !shadowed) {
                    Some(p) => {
                        let args = if *self.peek() == Tok::LParen {
                            self.args()?
                        } else if p.arity() == 0 {
                            Vec::new()
                        } else {
                            return Err(self.unexpected(&format!("`(` after primitive `{s}`")));
                        };
                        if args.len() != p.arity() {
                            return Err(ParseError::Arity { pos, prim: s, expected: p.arity(), found: args.len() });
                        }
                        Ok(Term::prim(p, args))
                    }
                    None => Ok(Term::Var(s.as_str().into())),
                }
            }
            Tok::Eof => Err(ParseError::at(pos, "unexpected end of input")),
            other => {
                self.at -= 1;
                Err(ParseError::at(pos, format!("expected a term, found {other}")))
            }
        }
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            match self.bump() {
                (Tok::Comma, _) => continue,
                (Tok::RParen, _) => return Ok(args),
                (Tok::Eof, pos) => return Err(ParseError::at(pos, "unexpected end of input")),
                (t, pos) => return Err(ParseError::at(pos, format!("expected `,` or `)`, found {t}"))),
            }
        }
    }
}

fn lex(text: &str, first_line: usize) -> Result<(Vec<(Tok, Pos)>, Pos), ParseError> {
    let mut toks = Vec::new();
    let mut end = Pos { line: first_line, col: 1 };
    for (k, line) in text.split('\n').enumerate() {
        lex_line(line, first_line + k, 1, &mut toks)?;
        end = Pos { line: first_line + k, col: line.chars().count() + 1 };
    }
    Ok((toks, end))
}

/// Parses a term against the standard primitives.
pub fn parse(text: &str) -> Result<Term, ParseError> {
    parse_with(text, &PrimRegistry::standard())
}

/// Parses a term; bound variables are renamed apart (see [`freshen`]).
pub fn parse_with(text: &str, prims: &PrimRegistry) -> Result<Term, ParseError> {
    let (toks, end) = lex(text, 1)?;
    let mut p = Parser::new(toks, end, prims);
    let t = p.term()?;
    p.finish()?;
    Ok(freshen(&t))
}

pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let (toks, end) = lex(text, 1)?;
    let prims = PrimRegistry::empty();
    let mut p = Parser::new(toks, end, &prims);
    let t = p.ty()?;
    p.finish()?;
    Ok(t)
}

/// Renames binders so that no two binders share a name and no binder
/// shadows a free variable.
pub fn freshen(t: &Term) -> Term {
    let mut taken: BTreeSet<Name> = t.free_vars();
    let mut avoid: BTreeSet<Name> = t.all_names();
    go(t, &mut taken, &mut avoid)
}

fn go(t: &Term, taken: &mut BTreeSet<Name>, avoid: &mut BTreeSet<Name>) -> Term {
    match t {
        Term::Var(_) | Term::Lit(_) => t.clone(),
        Term::Prim(p, args) => Term::Prim(p.clone(), args.iter().map(|a| go(a, taken, avoid)).collect()),
        Term::App(f, a) => {
            let f = go(f, taken, avoid);
            Term::app(f, go(a, taken, avoid))
        }
        Term::Pair(a, b) => {
            let a = go(a, taken, avoid);
            Term::pair(a, go(b, taken, avoid))
        }
        Term::Fst(a) => Term::fst(go(a, taken, avoid)),
        Term::Snd(a) => Term::snd(go(a, taken, avoid)),
        Term::Lam(x, ty, body) => {
            if taken.insert(x.clone()) {
                return Term::lam(x, ty.clone(), go(body, taken, avoid));
            }
            let y = fresh_name(x, |n| avoid.contains(n) || taken.contains(n));
            avoid.insert(y.clone());
            taken.insert(y.clone());
            let renamed = substitute_one(body, x, &Term::Var(y.clone()));
            Term::lam(&y, ty.clone(), go(&renamed, taken, avoid))
        }
    }
}

/// One `name = term` entry of a definitions file.
#[derive(Debug, Clone)]
pub struct Definition {
    pub name: String,
    pub term: Term,
    pub line: usize,
}

fn definition_head(line: &str) -> Option<(&str, &str)> {
    let (lhs, rhs) = line.split_once('=')?;
    if rhs.starts_with('>') || lhs.ends_with('=') {
        return None;
    }
    let name = lhs.trim();
    let ok = !name.is_empty()
        && name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_alphanumeric() || c == '_');
    ok.then_some((name, rhs))
}

/// Parses a definitions file: one `name = term` per entry, `#` starts a
/// comment, and a line without `=` at its head continues the previous entry.
/// Earlier names are inlined into later bodies.
pub fn parse_definitions(text: &str, prims: &PrimRegistry) -> Result<Vec<Definition>, ParseError> {
    // (name, line, [(line, first column, text)])
    let mut raw: Vec<(String, usize, Vec<(usize, usize, String)>)> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let lineno = k + 1;
        let code = line.split('#').next().unwrap_or("");
        if code.trim().is_empty() {
            continue;
        }
        if let Some((name, rhs)) = definition_head(code) {
            let col = code.chars().count() - rhs.chars().count() + 1;
            raw.push((name.to_string(), lineno, vec![(lineno, col, rhs.to_string())]));
        } else if let Some(last) = raw.last_mut() {
            last.2.push((lineno, 1, code.to_string()));
        } else {
            let col = code.len() - code.trim_start().len() + 1;
            return Err(ParseError::at(Pos { line: lineno, col }, "expected `name = term`"));
        }
    }
    let mut defs: Vec<Definition> = Vec::new();
    let mut known: BTreeMap<Name, Term> = BTreeMap::new();
    for (name, line, body) in raw {
        let head = Pos { line, col: 1 };
        if KEYWORDS.contains(&name.as_str()) || prims.resolve(&name).is_some() {
            return Err(ParseError::at(head, format!("`{name}` is reserved")));
        }
        if known.contains_key(name.as_str()) {
            return Err(ParseError::at(head, format!("`{name}` is defined twice")));
        }
        let mut toks = Vec::new();
        let mut end = head;
        for (lineno, first_col, text) in &body {
            lex_line(text, *lineno, *first_col, &mut toks)?;
            end = Pos { line: *lineno, col: first_col + text.chars().count() };
        }
        let mut p = Parser::new(toks, end, prims);
        let raw_term = p.term()?;
        p.finish()?;
        let used: BTreeMap<Name, Term> =
            known.iter().filter(|(n, _)| raw_term.free_vars().contains(*n)).map(|(n, t)| (n.clone(), t.clone())).collect();
        let term = freshen(&substitute(&raw_term, &used));
        known.insert(name.as_str().into(), term.clone());
        defs.push(Definition { name, term, line });
    }
    Ok(defs)
}
