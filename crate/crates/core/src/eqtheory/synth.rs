use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{Derivation, DistanceJudgment, Rule};
use crate::syntax::{
    dot, fresh_name, is_dotted, term_equal, typecheck, Name, PrimRegistry, Term, Type, TypeError, TypingContext,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("expected {expected} component derivation(s), found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("component for `{var}` is at type {found}, expected {expected}")]
    ComponentType { var: Name, expected: Type, found: Type },
    #[error("component derivations do not share one context")]
    ContextMismatch,
    #[error("no component for `{0}`")]
    MissingComponent(Name),
    #[error("dotted variable `{0}` is reserved for derivatives")]
    DottedName(Name),
    #[error("the modulus `{0}` has no modulus of its own")]
    ModulusOfModulus(String),
    #[error("cannot chain derivations: {0}")]
    NotComposable(String),
}

/// `add_A : A ⇒ A ⇒ A`, addition at `Real` extended pointwise through arrows
/// and componentwise through products.
pub fn add_term(ty: &Type) -> Term {
    let (x, y) = (Term::var("x"), Term::var("y"));
    let body = match ty {
        Type::Real => Term::prim(PrimRegistry::standard().prim("add"), vec![x, y]),
        Type::Arrow(a, b) => {
            let z = Term::var("z");
            Term::lam(
                "z",
                (**a).clone(),
                Term::apps(add_term(b), [Term::app(x, z.clone()), Term::app(y, z)]),
            )
        }
        Type::Prod(a, b) => Term::pair(
            Term::apps(add_term(a), [Term::fst(x.clone()), Term::fst(y.clone())]),
            Term::apps(add_term(b), [Term::snd(x), Term::snd(y)]),
        ),
    };
    Term::lam("x", ty.clone(), Term::lam("y", ty.clone(), body))
}

/// Replaces the subjects of `d`'s conclusion by convertible ones.
pub fn conv(d: Derivation, t: Term, a: Term, t2: Term) -> Derivation {
    let j = DistanceJudgment::new(d.conclusion.ctx.clone(), t, a, t2, d.conclusion.ty.clone());
    Derivation::new(Rule::Conv, j, vec![d])
}

/// Every name mentioned anywhere in the trees, contexts included.
fn names_in<'a>(ds: impl IntoIterator<Item = &'a Derivation>, out: &mut BTreeSet<Name>) {
    for d in ds {
        let j = &d.conclusion;
        out.extend(j.ctx.entries().iter().map(|(x, _)| x.clone()));
        for t in [&j.t, &j.a, &j.t2] {
            out.extend(t.all_names());
        }
        names_in(&d.premises, out);
    }
}

fn fresh_for<'a>(base: &str, ds: impl IntoIterator<Item = &'a Derivation>, extra: &BTreeSet<Name>) -> Name {
    let mut taken = extra.clone();
    names_in(ds, &mut taken);
    fresh_name(base, |n| taken.contains(n))
}

/// Adds `x : ty` after the conclusion context of `d`, in every node. `x`
/// must not occur anywhere in `d`.
pub fn weaken(d: &Derivation, x: &str, ty: &Type) -> Derivation {
    weaken_at(d, d.conclusion.ctx.len(), x, ty)
}

fn weaken_at(d: &Derivation, at: usize, x: &str, ty: &Type) -> Derivation {
    let mut entries = d.conclusion.ctx.entries().to_vec();
    entries.insert(at.min(entries.len()), (x.into(), ty.clone()));
    let conclusion = DistanceJudgment { ctx: TypingContext::from_entries(entries), ..d.conclusion.clone() };
    Derivation::new(d.rule, conclusion, d.premises.iter().map(|p| weaken_at(p, at, x, ty)).collect())
}

fn var_leaf(ctx: &TypingContext, x: &str, ty: &Type) -> Derivation {
    let v = Term::var(x);
    Derivation::leaf(Rule::Var, DistanceJudgment::new(ctx.clone(), v.clone(), Term::Var(dot(x)), v, ty.clone()))
}

fn app_node(f: Derivation, s: Derivation) -> Result<Derivation, SynthError> {
    let Type::Arrow(_, cod) = &f.conclusion.ty else {
        return Err(SynthError::NotComposable(format!("`{}` is not at an arrow type", f.conclusion.t)));
    };
    let (fj, sj) = (&f.conclusion, &s.conclusion);
    let j = DistanceJudgment::new(
        fj.ctx.clone(),
        Term::app(fj.t.clone(), sj.t.clone()),
        Term::apps(fj.a.clone(), [sj.t.clone(), sj.a.clone()]),
        Term::app(fj.t2.clone(), sj.t2.clone()),
        (**cod).clone(),
    );
    Ok(Derivation::new(Rule::App, j, vec![f, s]))
}

fn abs_node(ctx: &TypingContext, x: &str, dom: &Type, body: Derivation) -> Derivation {
    let b = &body.conclusion;
    let j = DistanceJudgment::new(
        ctx.clone(),
        Term::lam(x, dom.clone(), b.t.clone()),
        Term::lam(x, dom.clone(), Term::lam(&dot(x), dom.partial(), b.a.clone())),
        Term::lam(x, dom.clone(), b.t2.clone()),
        Type::arrow(dom.clone(), b.ty.clone()),
    );
    Derivation::new(Rule::Abs, j, vec![body])
}

fn proj_node(d: Derivation, first: bool) -> Result<Derivation, SynthError> {
    let Type::Prod(l, r) = &d.conclusion.ty else {
        return Err(SynthError::NotComposable(format!("`{}` is not at a product type", d.conclusion.t)));
    };
    let (rule, ty, proj): (Rule, &Type, fn(Term) -> Term) =
        if first { (Rule::Fst, l, Term::fst) } else { (Rule::Snd, r, Term::snd) };
    let c = &d.conclusion;
    let j = DistanceJudgment::new(c.ctx.clone(), proj(c.t.clone()), proj(c.a.clone()), proj(c.t2.clone()), ty.clone());
    Ok(Derivation::new(rule, j, vec![d]))
}

fn pair_node(l: Derivation, r: Derivation) -> Derivation {
    let (lj, rj) = (&l.conclusion, &r.conclusion);
    let j = DistanceJudgment::new(
        lj.ctx.clone(),
        Term::pair(lj.t.clone(), rj.t.clone()),
        Term::pair(lj.a.clone(), rj.a.clone()),
        Term::pair(lj.t2.clone(), rj.t2.clone()),
        Type::prod(lj.ty.clone(), rj.ty.clone()),
    );
    Derivation::new(Rule::Pair, j, vec![l, r])
}

/// For `Γ ⊢ t : A` with `Γ = x₁:A₁, …, xₙ:Aₙ` and component derivations
/// `Δ ⊢ (sᵢ, aᵢ, s′ᵢ) : Aᵢ`, derives
/// `Δ ⊢ (t[s/x], ∂t[s/x, a/ẋ], t[s′/x]) : A` by recursion on `t`.
pub fn synthesize_fundamental(
    ctx: &TypingContext,
    t: &Term,
    components: &[Derivation],
) -> Result<Derivation, SynthError> {
    if components.len() != ctx.len() {
        return Err(SynthError::ComponentCount { expected: ctx.len(), found: components.len() });
    }
    let delta = components.first().map(|c| c.conclusion.ctx.clone()).unwrap_or_default();
    if components.iter().any(|c| c.conclusion.ctx != delta) {
        return Err(SynthError::ContextMismatch);
    }
    for (x, _) in ctx.entries().iter().chain(delta.entries()) {
        if is_dotted(x) {
            return Err(SynthError::DottedName(x.clone()));
        }
    }
    if let Some(x) = t.all_names().into_iter().find(|x| is_dotted(x)) {
        return Err(SynthError::DottedName(x));
    }
    typecheck(ctx, t)?;
    let mut env = BTreeMap::new();
    for ((x, ty), c) in ctx.entries().iter().zip(components) {
        if c.conclusion.ty != *ty {
            return Err(SynthError::ComponentType { var: x.clone(), expected: ty.clone(), found: c.conclusion.ty.clone() });
        }
        env.insert(x.clone(), c.clone());
    }
    let mut taken = t.all_names();
    names_in(components, &mut taken);
    taken.extend(delta.entries().iter().map(|(x, _)| x.clone()));
    Synth { taken }.go(&env, &delta, t)
}

struct Synth {
    taken: BTreeSet<Name>,
}

impl Synth {
    fn go(&mut self, env: &BTreeMap<Name, Derivation>, ctx: &TypingContext, t: &Term) -> Result<Derivation, SynthError> {
        Ok(match t {
            Term::Var(x) => env.get(x).cloned().ok_or_else(|| SynthError::MissingComponent(x.clone()))?,
            Term::Lit(_) => {
                Derivation::leaf(Rule::Lit, DistanceJudgment::new(ctx.clone(), t.clone(), Term::int(0), t.clone(), Type::Real))
            }
            Term::Prim(p, args) => {
                let pd = p.modulus().ok_or_else(|| SynthError::ModulusOfModulus(p.name()))?;
                let ps = args.iter().map(|a| self.go(env, ctx, a)).collect::<Result<Vec<_>, _>>()?;
                let cs: Vec<&DistanceJudgment> = ps.iter().map(|p| &p.conclusion).collect();
                let j = DistanceJudgment::new(
                    ctx.clone(),
                    Term::Prim(p.clone(), cs.iter().map(|c| c.t.clone()).collect()),
                    Term::Prim(pd, cs.iter().map(|c| c.t.clone()).chain(cs.iter().map(|c| c.a.clone())).collect()),
                    Term::Prim(p.clone(), cs.iter().map(|c| c.t2.clone()).collect()),
                    Type::Real,
                );
                Derivation::new(Rule::Prim, j, ps)
            }
            Term::App(f, a) => {
                let df = self.go(env, ctx, f)?;
                let da = self.go(env, ctx, a)?;
                app_node(df, da)?
            }
            Term::Lam(y, dom, body) => {
                let y2 = fresh_name(y, |n| self.taken.contains(n));
                self.taken.insert(y2.clone());
                self.taken.insert(dot(&y2));
                let inner = ctx.extended(&y2, dom.clone());
                let mut env2: BTreeMap<Name, Derivation> =
                    env.iter().map(|(x, d)| (x.clone(), weaken(d, &y2, dom))).collect();
                env2.insert(y.clone(), var_leaf(&inner, &y2, dom));
                let db = self.go(&env2, &inner, body)?;
                abs_node(ctx, &y2, dom, db)
            }
            Term::Pair(a, b) => {
                let l = self.go(env, ctx, a)?;
                let r = self.go(env, ctx, b)?;
                pair_node(l, r)
            }
            Term::Fst(a) => proj_node(self.go(env, ctx, a)?, true)?,
            Term::Snd(a) => proj_node(self.go(env, ctx, a)?, false)?,
        })
    }
}

/// From `Γ ⊢ (t, a, t′) : A`, a derivation of `Γ ⊢ (t, a, t) : A`: the
/// Real rule at `Real`, η-expansion around it elsewhere.
pub fn quasi_reflexive(d: &Derivation) -> Result<Derivation, SynthError> {
    let c = d.conclusion.clone();
    match &c.ty {
        Type::Real => {
            let j = DistanceJudgment::new(c.ctx.clone(), c.t.clone(), c.a.clone(), c.t.clone(), Type::Real);
            Ok(Derivation::new(Rule::QuasiReflReal, j, vec![d.clone()]))
        }
        Type::Arrow(dom, _) => {
            let z = fresh_for("z", [d], &BTreeSet::new());
            let inner = c.ctx.extended(&z, (**dom).clone());
            let applied = app_node(weaken(d, &z, dom), var_leaf(&inner, &z, dom))?;
            let abs = abs_node(&c.ctx, &z, dom, quasi_reflexive(&applied)?);
            Ok(conv(abs, c.t.clone(), c.a, c.t))
        }
        Type::Prod(..) => {
            let l = quasi_reflexive(&proj_node(d.clone(), true)?)?;
            let r = quasi_reflexive(&proj_node(d.clone(), false)?)?;
            Ok(conv(pair_node(l, r), c.t.clone(), c.a, c.t))
        }
    }
}

/// From `Γ ⊢ (t, a, t′) : A` and `Γ ⊢ (t′, a′, t″) : A`, a derivation of
/// `Γ ⊢ (t, add_∂A a a′, t″) : A`. The middle terms need only be convertible.
pub fn transitive(d1: &Derivation, d2: &Derivation) -> Result<Derivation, SynthError> {
    let (c1, c2) = (&d1.conclusion, &d2.conclusion);
    if c1.ctx != c2.ctx {
        return Err(SynthError::ContextMismatch);
    }
    if c1.ty != c2.ty {
        return Err(SynthError::NotComposable(format!("types {} and {} differ", c1.ty, c2.ty)));
    }
    let d2 = if c1.t2.alpha_eq(&c2.t) {
        d2.clone()
    } else if term_equal(&c1.ctx, &c1.t2, &c2.t).unwrap_or(false) {
        conv(d2.clone(), c1.t2.clone(), c2.a.clone(), c2.t2.clone())
    } else {
        return Err(SynthError::NotComposable(format!("`{}` and `{}` are not equal", c1.t2, c2.t)));
    };
    let c2 = &d2.conclusion;
    let sum = Term::apps(add_term(&c1.ty.partial()), [c1.a.clone(), c2.a.clone()]);
    let chained = match &c1.ty {
        Type::Real => {
            let add = PrimRegistry::standard().prim("add");
            let j = DistanceJudgment::new(
                c1.ctx.clone(),
                c1.t.clone(),
                Term::prim(add, vec![c1.a.clone(), c2.a.clone()]),
                c2.t2.clone(),
                Type::Real,
            );
            Derivation::new(Rule::TransReal, j, vec![d1.clone(), d2.clone()])
        }
        Type::Arrow(dom, _) => {
            let z = fresh_for("z", [d1, &d2], &BTreeSet::new());
            let inner = c1.ctx.extended(&z, (**dom).clone());
            let l = app_node(weaken(d1, &z, dom), var_leaf(&inner, &z, dom))?;
            let r = app_node(weaken(&d2, &z, dom), var_leaf(&inner, &z, dom))?;
            abs_node(&c1.ctx, &z, dom, transitive(&l, &r)?)
        }
        Type::Prod(..) => {
            let l = transitive(&proj_node(d1.clone(), true)?, &proj_node(d2.clone(), true)?)?;
            let r = transitive(&proj_node(d1.clone(), false)?, &proj_node(d2.clone(), false)?)?;
            pair_node(l, r)
        }
    };
    Ok(conv(chained, c1.t.clone(), sum, c2.t2.clone()))
}
