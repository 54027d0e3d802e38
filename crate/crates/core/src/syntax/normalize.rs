//! βη-long normal forms by normalization by evaluation, with δ-folding of
//! primitives whose arguments are all literals.

use std::collections::BTreeSet;
use std::rc::Rc;

use num_rational::BigRational;
use thiserror::Error;

use super::subst::fresh_name;
use super::term::{Name, Term, TypingContext};
use super::types::Type;
use super::typing::{typecheck, TypeError};
use crate::semantics::prim::prim_eval;

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("type mismatch: {left} versus {right}")]
    TypeMismatch { left: Type, right: Type },
    #[error("normalization ran out of fuel")]
    OutOfFuel,
}

type FunSem = Rc<dyn Fn(Sem, &mut Supply) -> Result<Sem, NormError>>;

// Neutral terms only ever occur at `Real`: neutrals of other types are
// reflected into functions and pairs as soon as they appear.
#[derive(Clone)]
enum Sem {
    Lit(BigRational),
    Ne(Term),
    Fun(Name, FunSem),
    Pair(Rc<Sem>, Rc<Sem>),
}

struct Supply {
    fuel: u64,
    taken: BTreeSet<Name>,
}

impl Supply {
    fn tick(&mut self) -> Result<(), NormError> {
        if self.fuel == 0 {
            return Err(NormError::OutOfFuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn fresh(&mut self, hint: &str) -> Name {
        let taken = &self.taken;
        let name = if taken.contains(hint) || taken.contains(&*super::term::dot(hint)) {
            fresh_name(hint, |n| taken.contains(n))
        } else {
            hint.into()
        };
        self.taken.insert(name.clone());
        name
    }
}

#[derive(Clone)]
enum Env {
    Nil,
    Cons(Name, Sem, Rc<Env>),
}

impl Env {
    fn lookup(&self, x: &str) -> Option<&Sem> {
        let mut cur = self;
        while let Env::Cons(n, v, rest) = cur {
            if &**n == x {
                return Some(v);
            }
            cur = rest;
        }
        None
    }

    fn extend(&self, x: Name, v: Sem) -> Env {
        Env::Cons(x, v, Rc::new(self.clone()))
    }
}

fn reflect(ty: &Type, t: Term) -> Sem {
    match ty {
        Type::Real => Sem::Ne(t),
        Type::Prod(a, b) => Sem::Pair(
            Rc::new(reflect(a, Term::fst(t.clone()))),
            Rc::new(reflect(b, Term::snd(t))),
        ),
        Type::Arrow(a, b) => {
            let (a, b) = ((**a).clone(), (**b).clone());
            Sem::Fun(
                "v".into(),
                Rc::new(move |arg, supply| Ok(reflect(&b, Term::app(t.clone(), reify(&a, &arg, supply)?)))),
            )
        }
    }
}

fn reify(ty: &Type, v: &Sem, supply: &mut Supply) -> Result<Term, NormError> {
    supply.tick()?;
    Ok(match (ty, v) {
        (_, Sem::Lit(r)) => Term::Lit(r.clone()),
        (_, Sem::Ne(t)) => t.clone(),
        (Type::Prod(a, b), Sem::Pair(x, y)) => Term::pair(reify(a, x, supply)?, reify(b, y, supply)?),
        (Type::Arrow(a, b), Sem::Fun(hint, f)) => {
            let x = supply.fresh(hint);
            let arg = reflect(a, Term::Var(x.clone()));
            let body = f(arg, supply)?;
            Term::lam(&x, (**a).clone(), reify(b, &body, supply)?)
        }
        _ => unreachable!("reify at a type the value does not inhabit"),
    })
}

fn eval(env: &Env, t: &Term, supply: &mut Supply) -> Result<Sem, NormError> {
    supply.tick()?;
    match t {
        Term::Var(x) => Ok(env.lookup(x).cloned().unwrap_or_else(|| Sem::Ne(t.clone()))),
        Term::Lit(r) => Ok(Sem::Lit(r.clone())),
        Term::Prim(p, args) => {
            let vals = args.iter().map(|a| eval(env, a, supply)).collect::<Result<Vec<_>, _>>()?;
            let lits: Option<Vec<BigRational>> = vals
                .iter()
                .map(|v| match v {
                    Sem::Lit(r) => Some(r.clone()),
                    _ => None,
                })
                .collect();
            if let Some(r) = lits.and_then(|ls| prim_eval(p, &ls).ok()) {
                return Ok(Sem::Lit(r));
            }
            let args = vals.iter().map(|v| reify(&Type::Real, v, supply)).collect::<Result<Vec<_>, _>>()?;
            Ok(Sem::Ne(Term::Prim(p.clone(), args)))
        }
        Term::App(f, a) => {
            let fv = eval(env, f, supply)?;
            let av = eval(env, a, supply)?;
            apply(fv, av, supply)
        }
        Term::Lam(x, _, body) => {
            let (env, x2, body) = (env.clone(), x.clone(), body.clone());
            Ok(Sem::Fun(
                x.clone(),
                Rc::new(move |arg, supply| eval(&env.extend(x2.clone(), arg), &body, supply)),
            ))
        }
        Term::Pair(a, b) => Ok(Sem::Pair(Rc::new(eval(env, a, supply)?), Rc::new(eval(env, b, supply)?))),
        Term::Fst(p) | Term::Snd(p) => match eval(env, p, supply)? {
            Sem::Pair(a, b) => Ok(if matches!(t, Term::Fst(_)) { (*a).clone() } else { (*b).clone() }),
            _ => unreachable!("projection of a non-pair in a well-typed term"),
        },
    }
}

fn apply(f: Sem, a: Sem, supply: &mut Supply) -> Result<Sem, NormError> {
    match f {
        Sem::Fun(_, f) => f(a, supply),
        _ => unreachable!("application of a non-function in a well-typed term"),
    }
}

fn initial_env(ctx: &TypingContext) -> Env {
    ctx.entries().iter().fold(Env::Nil, |env, (x, ty)| env.extend(x.clone(), reflect(ty, Term::Var(x.clone()))))
}

fn supply_for<'a>(ctx: &TypingContext, terms: impl IntoIterator<Item = &'a Term>, fuel: u64) -> Supply {
    let mut taken: BTreeSet<Name> = ctx.entries().iter().map(|(x, _)| x.clone()).collect();
    for t in terms {
        taken.extend(t.all_names());
    }
    Supply { fuel, taken }
}

/// The βη-long δ-normal form of `t`.
pub fn normalize(ctx: &TypingContext, t: &Term) -> Result<Term, NormError> {
    normalize_with_fuel(ctx, t, DEFAULT_FUEL)
}

pub fn normalize_with_fuel(ctx: &TypingContext, t: &Term, fuel: u64) -> Result<Term, NormError> {
    let ty = typecheck(ctx, t)?;
    let mut supply = supply_for(ctx, [t], fuel);
    let v = eval(&initial_env(ctx), t, &mut supply)?;
    reify(&ty, &v, &mut supply)
}

/// Decides `Γ ⊢ t = s` in the βη theory extended with literal folding.
pub fn term_equal(ctx: &TypingContext, t: &Term, s: &Term) -> Result<bool, NormError> {
    let left = typecheck(ctx, t)?;
    let right = typecheck(ctx, s)?;
    if left != right {
        return Err(NormError::TypeMismatch { left, right });
    }
    let mut supply = supply_for(ctx, [t, s], DEFAULT_FUEL);
    let env = initial_env(ctx);
    let tv = eval(&env, t, &mut supply)?;
    let nt = reify(&left, &tv, &mut supply)?;
    let sv = eval(&env, s, &mut supply)?;
    let ns = reify(&left, &sv, &mut supply)?;
    Ok(nt.alpha_eq(&ns))
}
