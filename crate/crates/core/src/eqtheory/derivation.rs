use std::fmt;

use num_traits::Signed;
use serde::Serialize;

use super::{Derivation, DistanceJudgment, Rule};
use crate::syntax::{dot, is_dotted, term_equal, typecheck, Term, Type};

/// The first node, in pre-order, that fails its rule. `path` lists premise
/// indices from the root.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvalidNode {
    pub path: Vec<usize>,
    pub rule: String,
    pub reason: String,
}

impl fmt::Display for InvalidNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(usize::to_string).collect();
        write!(f, "invalid `{}` node at [{}]: {}", self.rule, path.join("."), self.reason)
    }
}

pub fn check_derivation(d: &Derivation) -> Result<(), InvalidNode> {
    let mut path = Vec::new();
    walk(d, &mut path)
}

fn walk(d: &Derivation, path: &mut Vec<usize>) -> Result<(), InvalidNode> {
    check_node(d).map_err(|reason| InvalidNode { path: path.clone(), rule: d.rule.to_string(), reason })?;
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        walk(p, path)?;
        path.pop();
    }
    Ok(())
}

type Check = Result<(), String>;

fn ensure(cond: bool, reason: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(reason())
    }
}

fn check_typing(j: &DistanceJudgment) -> Check {
    if let Some((x, _)) = j.ctx.entries().iter().find(|(x, _)| is_dotted(x)) {
        return Err(format!("context variable `{x}` is dotted"));
    }
    ensure(!j.ctx.has_duplicates(), || "context has duplicate variables".into())?;
    for (label, t, ctx, want) in [
        ("t", &j.t, j.ctx.clone(), j.ty.clone()),
        ("t'", &j.t2, j.ctx.clone(), j.ty.clone()),
        ("a", &j.a, j.ctx.with_partial(), j.ty.partial()),
    ] {
        match typecheck(&ctx, t) {
            Ok(found) if found == want => {}
            Ok(found) => return Err(format!("`{label}` has type {found}, expected {want}")),
            Err(e) => return Err(format!("`{label}` is ill-typed: {e}")),
        }
    }
    Ok(())
}

fn arity(d: &Derivation, n: usize) -> Check {
    ensure(d.premises.len() == n, || format!("expects {n} premise(s), found {}", d.premises.len()))
}

fn same(what: &str, found: &Term, expected: &Term) -> Check {
    ensure(found.alpha_eq(expected), || format!("{what} is `{found}`, expected `{expected}`"))
}

/// The three subjects of a conclusion must match `(t, a, t′)`.
fn shape(j: &DistanceJudgment, t: &Term, a: &Term, t2: &Term) -> Check {
    same("t", &j.t, t)?;
    same("a", &j.a, a)?;
    same("t'", &j.t2, t2)
}

fn same_ctx(d: &Derivation) -> Check {
    for (i, p) in d.premises.iter().enumerate() {
        ensure(p.conclusion.ctx == d.conclusion.ctx, || {
            format!("premise {i} has context [{}], expected [{}]", p.conclusion.ctx, d.conclusion.ctx)
        })?;
    }
    Ok(())
}

fn premise_type(d: &Derivation, i: usize, ty: &Type) -> Check {
    let found = &d.premises[i].conclusion.ty;
    ensure(found == ty, || format!("premise {i} has type {found}, expected {ty}"))
}

fn check_node(d: &Derivation) -> Check {
    let j = &d.conclusion;
    check_typing(j)?;
    if d.rule != Rule::Abs {
        same_ctx(d)?;
    }
    match d.rule {
        Rule::Lit => {
            arity(d, 0)?;
            ensure(j.ty == Type::Real, || "literal rule concludes at Real".into())?;
            let (Some(r), Some(s), Some(r2)) = (j.t.as_lit(), j.a.as_lit(), j.t2.as_lit()) else {
                return Err("all three subjects must be literals".into());
            };
            ensure((r - r2).abs() <= *s, || format!("|{} - {}| exceeds {}", j.t, j.t2, j.a))
        }
        Rule::Prim => {
            let Term::Prim(p, ts) = &j.t else {
                return Err("`t` is not a primitive application".into());
            };
            let pd = p.modulus().ok_or_else(|| format!("`{}` has no modulus", p.name()))?;
            arity(d, ts.len())?;
            for i in 0..ts.len() {
                premise_type(d, i, &Type::Real)?;
            }
            let cs: Vec<&DistanceJudgment> = d.premises.iter().map(|p| &p.conclusion).collect();
            let t = Term::Prim(p.clone(), cs.iter().map(|c| c.t.clone()).collect());
            let t2 = Term::Prim(p.clone(), cs.iter().map(|c| c.t2.clone()).collect());
            let args = cs.iter().map(|c| c.t.clone()).chain(cs.iter().map(|c| c.a.clone())).collect();
            shape(j, &t, &Term::Prim(pd, args), &t2)
        }
        Rule::Var => {
            arity(d, 0)?;
            let Term::Var(x) = &j.t else {
                return Err("`t` is not a variable".into());
            };
            let ty = j.ctx.lookup(x).ok_or_else(|| format!("`{x}` is not in the context"))?;
            ensure(*ty == j.ty, || format!("`{x}` has type {ty}, not {}", j.ty))?;
            shape(j, &j.t, &Term::Var(dot(x)), &j.t)
        }
        Rule::TransReal => {
            arity(d, 2)?;
            ensure(j.ty == Type::Real, || "transitivity concludes at Real".into())?;
            premise_type(d, 0, &Type::Real)?;
            premise_type(d, 1, &Type::Real)?;
            let (l, r) = (&d.premises[0].conclusion, &d.premises[1].conclusion);
            ensure(l.t2.alpha_eq(&r.t), || format!("middle terms differ: `{}` and `{}`", l.t2, r.t))?;
            let Term::Prim(p, args) = &j.a else {
                return Err("`a` is not a sum".into());
            };
            ensure(p.name() == "add" && args.len() == 2, || "`a` is not a sum".into())?;
            shape(j, &l.t, &Term::Prim(p.clone(), vec![l.a.clone(), r.a.clone()]), &r.t2)
        }
        Rule::QuasiReflReal => {
            arity(d, 1)?;
            ensure(j.ty == Type::Real, || "quasi-reflexivity concludes at Real".into())?;
            premise_type(d, 0, &Type::Real)?;
            let p = &d.premises[0].conclusion;
            shape(j, &p.t, &p.a, &p.t)
        }
        Rule::Abs => {
            arity(d, 1)?;
            let Type::Arrow(dom, cod) = &j.ty else {
                return Err("abstraction concludes at an arrow type".into());
            };
            let (Term::Lam(x, xty, body), Term::Lam(x2, x2ty, body2)) = (&j.t, &j.t2) else {
                return Err("`t` and `t'` must be abstractions".into());
            };
            let Term::Lam(y, yty, inner) = &j.a else {
                return Err("`a` must be an abstraction".into());
            };
            let Term::Lam(ydot, ydty, a) = &**inner else {
                return Err("`a` must abstract the point and then its error".into());
            };
            ensure(x == x2 && x == y, || format!("binders `{x}`, `{y}`, `{x2}` differ"))?;
            ensure(*ydot == dot(x), || format!("error binder is `{ydot}`, expected `{}`", dot(x)))?;
            ensure(**dom == *xty && xty == x2ty && xty == yty, || "binder types disagree".into())?;
            ensure(*ydty == dom.partial(), || format!("error binder has type {ydty}, expected {}", dom.partial()))?;
            ensure(!is_dotted(x), || format!("binder `{x}` is dotted"))?;
            ensure(!j.ctx.contains(x), || format!("binder `{x}` already occurs in the context"))?;
            let p = &d.premises[0].conclusion;
            let want = j.ctx.extended(x, (**dom).clone());
            ensure(p.ctx == want, || format!("premise context is [{}], expected [{want}]", p.ctx))?;
            premise_type(d, 0, cod)?;
            shape(p, body, a, body2)
        }
        Rule::App => {
            arity(d, 2)?;
            let (f, s) = (&d.premises[0].conclusion, &d.premises[1].conclusion);
            premise_type(d, 0, &Type::arrow(s.ty.clone(), j.ty.clone()))?;
            shape(
                j,
                &Term::app(f.t.clone(), s.t.clone()),
                &Term::apps(f.a.clone(), [s.t.clone(), s.a.clone()]),
                &Term::app(f.t2.clone(), s.t2.clone()),
            )
        }
        Rule::Fst | Rule::Snd => {
            arity(d, 1)?;
            let p = &d.premises[0].conclusion;
            let Type::Prod(l, r) = &p.ty else {
                return Err("premise is not at a product type".into());
            };
            let (want, proj): (&Type, fn(Term) -> Term) =
                if d.rule == Rule::Fst { (l, Term::fst) } else { (r, Term::snd) };
            ensure(j.ty == *want, || format!("projection has type {}, expected {want}", j.ty))?;
            shape(j, &proj(p.t.clone()), &proj(p.a.clone()), &proj(p.t2.clone()))
        }
        Rule::Pair => {
            arity(d, 2)?;
            let (l, r) = (&d.premises[0].conclusion, &d.premises[1].conclusion);
            ensure(j.ty == Type::prod(l.ty.clone(), r.ty.clone()), || "pair type disagrees with premises".into())?;
            shape(
                j,
                &Term::pair(l.t.clone(), r.t.clone()),
                &Term::pair(l.a.clone(), r.a.clone()),
                &Term::pair(l.t2.clone(), r.t2.clone()),
            )
        }
        Rule::Conv => {
            arity(d, 1)?;
            let p = &d.premises[0].conclusion;
            premise_type(d, 0, &j.ty)?;
            let eq = |what: &str, ctx, l: &Term, r: &Term| match term_equal(ctx, l, r) {
                Ok(true) => Ok(()),
                Ok(false) => Err(format!("`{l}` and `{r}` are not equal ({what})")),
                Err(e) => Err(format!("cannot compare {what}: {e}")),
            };
            eq("t", &j.ctx, &p.t, &j.t)?;
            eq("t'", &j.ctx, &p.t2, &j.t2)?;
            eq("a", &j.ctx.with_partial(), &p.a, &j.a)
        }
    }
}
