use thiserror::Error;

use super::term::{dot, is_dotted, Name, Term, TypingContext};
use super::typing::{typecheck, TypeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeriveError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("dotted variable `{0}` is reserved for derivatives")]
    DottedName(Name),
    #[error("the modulus `{0}` has no derivative")]
    ModulusOfModulus(String),
}

/// The derivative term `∂t`, typed `Γ, ∂Γ ⊢ ∂t : ∂A` whenever `Γ ⊢ t : A`.
///
/// Dotted names anywhere in `ctx` or `t` are refused: they would collide with
/// the partners that `∂` introduces.
pub fn derivative_term(ctx: &TypingContext, t: &Term) -> Result<Term, DeriveError> {
    if let Some((x, _)) = ctx.entries().iter().find(|(x, _)| is_dotted(x)) {
        return Err(DeriveError::DottedName(x.clone()));
    }
    if let Some(x) = t.all_names().into_iter().find(|x| is_dotted(x)) {
        return Err(DeriveError::DottedName(x));
    }
    typecheck(ctx, t)?;
    partial(t)
}

fn partial(t: &Term) -> Result<Term, DeriveError> {
    Ok(match t {
        Term::Var(x) => Term::Var(dot(x)),
        Term::Lit(_) => Term::int(0),
        Term::Prim(p, args) => {
            let pd = p.modulus().ok_or_else(|| DeriveError::ModulusOfModulus(p.name()))?;
            let mut all = args.clone();
            for a in args {
                all.push(partial(a)?);
            }
            Term::Prim(pd, all)
        }
        Term::App(f, a) => Term::apps(partial(f)?, [(**a).clone(), partial(a)?]),
        Term::Lam(x, ty, body) => Term::lam(x, ty.clone(), Term::lam(&dot(x), ty.partial(), partial(body)?)),
        Term::Pair(a, b) => Term::pair(partial(a)?, partial(b)?),
        Term::Fst(a) => Term::fst(partial(a)?),
        Term::Snd(a) => Term::snd(partial(a)?),
    })
}
