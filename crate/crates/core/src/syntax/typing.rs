use thiserror::Error;

use super::term::{Name, Term, TypingContext};
use super::types::Type;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(Name),
    #[error("application of non-arrow: `{term}` has type {found}")]
    NotAFunction { term: Term, found: Type },
    #[error("argument mismatch: `{term}` has type {found}, expected {expected}")]
    ArgumentMismatch { term: Term, expected: Type, found: Type },
    #[error("projection of non-product: `{term}` has type {found}")]
    NotAProduct { term: Term, found: Type },
    #[error("primitive argument not Real: argument {index} of `{prim}` has type {found}")]
    PrimArgNotReal { prim: String, index: usize, found: Type },
    #[error("arity mismatch: `{prim}` expects {expected} argument(s), found {found}")]
    Arity { prim: String, expected: usize, found: usize },
}

/// The type of `t` under `ctx`.
pub fn typecheck(ctx: &TypingContext, t: &Term) -> Result<Type, TypeError> {
    let mut scope: Vec<(Name, Type)> = ctx.entries().to_vec();
    infer(&mut scope, t)
}

fn infer(scope: &mut Vec<(Name, Type)>, t: &Term) -> Result<Type, TypeError> {
    match t {
        Term::Var(x) => scope
            .iter()
            .rev()
            .find(|(n, _)| n == x)
            .map(|(_, ty)| ty.clone())
            .ok_or_else(|| TypeError::UnboundVariable(x.clone())),
        Term::Lit(_) => Ok(Type::Real),
        Term::Prim(p, args) => {
            if args.len() != p.arity() {
                return Err(TypeError::Arity { prim: p.name(), expected: p.arity(), found: args.len() });
            }
            for (index, a) in args.iter().enumerate() {
                let found = infer(scope, a)?;
                if found != Type::Real {
                    return Err(TypeError::PrimArgNotReal { prim: p.name(), index, found });
                }
            }
            Ok(Type::Real)
        }
        Term::App(f, a) => {
            let ft = infer(scope, f)?;
            let Type::Arrow(dom, cod) = &ft else {
                return Err(TypeError::NotAFunction { term: (**f).clone(), found: ft });
            };
            let at = infer(scope, a)?;
            if at != **dom {
                return Err(TypeError::ArgumentMismatch { term: (**a).clone(), expected: (**dom).clone(), found: at });
            }
            Ok((**cod).clone())
        }
        Term::Lam(x, ty, body) => {
            scope.push((x.clone(), ty.clone()));
            let bt = infer(scope, body);
            scope.pop();
            Ok(Type::arrow(ty.clone(), bt?))
        }
        Term::Pair(a, b) => Ok(Type::prod(infer(scope, a)?, infer(scope, b)?)),
        Term::Fst(p) | Term::Snd(p) => match infer(scope, p)? {
            Type::Prod(l, r) => Ok(if matches!(t, Term::Fst(_)) { (*l).clone() } else { (*r).clone() }),
            found => Err(TypeError::NotAProduct { term: (**p).clone(), found }),
        },
    }
}
