use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Signed;

use super::prim::{PrimKind, PrimRef};
use super::types::Type;
use crate::scalar::render_exact;

pub type Name = Arc<str>;

/// Terms of the calculus. Variables whose name ends in `'` are the dotted
/// partners of the undotted ones.
#[derive(Clone, PartialEq)]
pub enum Term {
    Var(Name),
    Lit(BigRational),
    Prim(PrimRef, Vec<Term>),
    App(Arc<Term>, Arc<Term>),
    Lam(Name, Type, Arc<Term>),
    Pair(Arc<Term>, Arc<Term>),
    Fst(Arc<Term>),
    Snd(Arc<Term>),
}

/// `ẋ`, written `x'`.
pub fn dot(name: &str) -> Name {
    format!("{name}'").into()
}

pub fn is_dotted(name: &str) -> bool {
    name.ends_with('\'')
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.into())
    }

    pub fn lit(r: BigRational) -> Self {
        Term::Lit(r)
    }

    pub fn int(n: i64) -> Self {
        Term::Lit(BigRational::from_integer(n.into()))
    }

    pub fn prim(p: PrimRef, args: Vec<Term>) -> Self {
        Term::Prim(p, args)
    }

    pub fn app(t: Term, s: Term) -> Self {
        Term::App(Arc::new(t), Arc::new(s))
    }

    /// `t s₁ … sₙ`
    pub fn apps(t: Term, args: impl IntoIterator<Item = Term>) -> Self {
        args.into_iter().fold(t, Term::app)
    }

    pub fn lam(x: &str, ty: Type, body: Term) -> Self {
        Term::Lam(x.into(), ty, Arc::new(body))
    }

    pub fn pair(t: Term, s: Term) -> Self {
        Term::Pair(Arc::new(t), Arc::new(s))
    }

    pub fn fst(t: Term) -> Self {
        Term::Fst(Arc::new(t))
    }

    pub fn snd(t: Term) -> Self {
        Term::Snd(Arc::new(t))
    }

    pub fn as_lit(&self) -> Option<&BigRational> {
        match self {
            Term::Lit(r) => Some(r),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Lit(_) => {}
            Term::Prim(_, args) => args.iter().for_each(|a| a.collect_free(bound, out)),
            Term::App(t, s) | Term::Pair(t, s) => {
                t.collect_free(bound, out);
                s.collect_free(bound, out);
            }
            Term::Lam(x, _, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Term::Fst(t) | Term::Snd(t) => t.collect_free(bound, out),
        }
    }

    /// Every variable name occurring in the term, bound or free.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| match t {
            Term::Var(x) | Term::Lam(x, _, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self {
            Term::Var(_) | Term::Lit(_) => {}
            Term::Prim(_, args) => args.iter().for_each(|a| a.visit(f)),
            Term::App(t, s) | Term::Pair(t, s) => {
                t.visit(f);
                s.visit(f);
            }
            Term::Lam(_, _, body) => body.visit(f),
            Term::Fst(t) | Term::Snd(t) => t.visit(f),
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        alpha(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

fn alpha(a: &Term, b: &Term, ea: &mut Vec<Name>, eb: &mut Vec<Name>) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            let ix = ea.iter().rposition(|n| n == x);
            let iy = eb.iter().rposition(|n| n == y);
            match (ix, iy) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (Term::Lit(r), Term::Lit(s)) => r == s,
        (Term::Prim(p, xs), Term::Prim(q, ys)) => {
            p == q && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| alpha(x, y, ea, eb))
        }
        (Term::App(t1, s1), Term::App(t2, s2)) | (Term::Pair(t1, s1), Term::Pair(t2, s2)) => {
            alpha(t1, t2, ea, eb) && alpha(s1, s2, ea, eb)
        }
        (Term::Lam(x, tx, b1), Term::Lam(y, ty, b2)) => {
            if tx != ty {
                return false;
            }
            ea.push(x.clone());
            eb.push(y.clone());
            let r = alpha(b1, b2, ea, eb);
            ea.pop();
            eb.pop();
            r
        }
        (Term::Fst(t), Term::Fst(s)) | (Term::Snd(t), Term::Snd(s)) => alpha(t, s, ea, eb),
        _ => false,
    }
}

// Printing precedences: 0 anything, 1 left of `+`, 2 right of `+` / left of
// `*`, 3 right of `*` / under unary minus, 4 function position, 5 argument.
fn infix(p: &PrimRef) -> Option<(&'static str, u8)> {
    if p.is_modulus() {
        return None;
    }
    match p.decl().kind() {
        PrimKind::Add => Some(("+", 1)),
        PrimKind::Sub => Some(("-", 1)),
        PrimKind::Mul => Some(("*", 2)),
        PrimKind::Div => Some(("/", 2)),
        _ => None,
    }
}

fn write_term(t: &Term, ctx: u8, out: &mut String) {
    let paren = |level: u8, out: &mut String, body: &dyn Fn(&mut String)| {
        if ctx > level {
            out.push('(');
            body(out);
            out.push(')');
        } else {
            body(out);
        }
    };
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Lit(r) => {
            let text = render_exact(r);
            if r.is_negative() {
                paren(3, out, &|o| o.push_str(&text));
            } else {
                out.push_str(&text);
            }
        }
        Term::Prim(p, args) => match infix(p) {
            Some((op, level)) if args.len() == 2 => paren(level, out, &|o| {
                write_term(&args[0], level, o);
                o.push_str(&format!(" {op} "));
                write_term(&args[1], level + 1, o);
            }),
            _ => {
                out.push_str(&p.name());
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_term(a, 0, out);
                }
                out.push(')');
            }
        },
        Term::App(f, a) => paren(4, out, &|o| {
            write_term(f, 4, o);
            o.push(' ');
            write_term(a, 5, o);
        }),
        Term::Lam(x, ty, body) => paren(0, out, &|o| {
            o.push_str(&format!("\\{x}:{}.", ty.ascii()));
            if !matches!(**body, Term::Lam(..)) {
                o.push(' ');
            }
            write_term(body, 0, o);
        }),
        Term::Pair(a, b) => {
            out.push('(');
            write_term(a, 0, out);
            out.push_str(", ");
            write_term(b, 0, out);
            out.push(')');
        }
        Term::Fst(a) | Term::Snd(a) => {
            out.push_str(if matches!(t, Term::Fst(_)) { "fst(" } else { "snd(" });
            write_term(a, 0, out);
            out.push(')');
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_term(self, 0, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An ordered list of typed variables. Later entries shadow earlier ones.
#[derive(Clone, Default, PartialEq)]
pub struct TypingContext {
    entries: Vec<(Name, Type)>,
}

impl TypingContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<(Name, Type)>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[(Name, Type)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.entries.iter().rev().find(|(n, _)| &**n == x).map(|(_, t)| t)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.lookup(x).is_some()
    }

    pub fn extended(&self, x: &str, ty: Type) -> Self {
        let mut entries = self.entries.clone();
        entries.push((x.into(), ty));
        Self { entries }
    }

    pub fn push(&mut self, x: &str, ty: Type) {
        self.entries.push((x.into(), ty));
    }

    pub fn has_duplicates(&self) -> bool {
        let names: BTreeSet<&Name> = self.entries.iter().map(|(n, _)| n).collect();
        names.len() != self.entries.len()
    }

    /// `∂Γ`: each variable dotted, each type sent to `∂A`.
    pub fn partial(&self) -> Self {
        Self { entries: self.entries.iter().map(|(n, t)| (dot(n), t.partial())).collect() }
    }

    /// `Γ, ∂Γ`
    pub fn with_partial(&self) -> Self {
        let mut entries = self.entries.clone();
        entries.extend(self.partial().entries);
        Self { entries }
    }
}

impl fmt::Display for TypingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(n, t)| format!("{n}:{}", t.ascii())).collect();
        f.write_str(&parts.join(", "))
    }
}

impl fmt::Debug for TypingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}
