use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::term::{dot, is_dotted, Name, Term};

/// A name built from `base` that `taken` rejects neither for itself nor, for
/// undotted names, for its dotted partner. `y` becomes `y1`, `y2`, …; `y'`
/// becomes `y1'`.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    let dotted = is_dotted(base);
    let stem = base.trim_end_matches('\'').trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    (1..)
        .map(|k| {
            let core = format!("{stem}{k}");
            (if dotted { format!("{core}'") } else { core.clone() }, core)
        })
        .find(|(name, core)| !taken(name) && (dotted || !taken(&dot(core))))
        .map(|(name, _)| name.into())
        .expect("unbounded supply of names")
}

/// Capture-avoiding simultaneous substitution `t[σ]`.
pub fn substitute(t: &Term, sigma: &BTreeMap<Name, Term>) -> Term {
    if sigma.is_empty() {
        return t.clone();
    }
    let mut avoid: BTreeSet<Name> = t.all_names();
    for (x, s) in sigma {
        avoid.insert(x.clone());
        avoid.extend(s.all_names());
    }
    subst(t, sigma, &mut avoid)
}

/// `t[s/x]`
pub fn substitute_one(t: &Term, x: &str, s: &Term) -> Term {
    substitute(t, &BTreeMap::from([(Name::from(x), s.clone())]))
}

fn subst(t: &Term, sigma: &BTreeMap<Name, Term>, avoid: &mut BTreeSet<Name>) -> Term {
    match t {
        Term::Var(x) => sigma.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Lit(_) => t.clone(),
        Term::Prim(p, args) => Term::Prim(p.clone(), args.iter().map(|a| subst(a, sigma, avoid)).collect()),
        Term::App(f, a) => Term::app(subst(f, sigma, avoid), subst(a, sigma, avoid)),
        Term::Pair(a, b) => Term::pair(subst(a, sigma, avoid), subst(b, sigma, avoid)),
        Term::Fst(a) => Term::fst(subst(a, sigma, avoid)),
        Term::Snd(a) => Term::snd(subst(a, sigma, avoid)),
        Term::Lam(x, ty, body) => {
            let mut inner = sigma.clone();
            inner.remove(x);
            if inner.is_empty() {
                return t.clone();
            }
            let body_free = body.free_vars();
            let captures = inner.iter().any(|(y, s)| body_free.contains(y) && s.free_vars().contains(x));
            if !captures {
                return Term::Lam(x.clone(), ty.clone(), Arc::new(subst(body, &inner, avoid)));
            }
            let y = fresh_name(x, |n| avoid.contains(n));
            avoid.insert(y.clone());
            inner.insert(x.clone(), Term::Var(y.clone()));
            Term::Lam(y, ty.clone(), Arc::new(subst(body, &inner, avoid)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::types::Type;

    #[test]
    fn replaces_free_occurrences() {
        assert_eq!(substitute_one(&Term::var("x"), "x", &Term::int(5)), Term::int(5));
        let shadow = Term::lam("x", Type::Real, Term::var("x"));
        assert_eq!(substitute_one(&shadow, "x", &Term::int(5)), shadow);
    }

    #[test]
    fn avoids_capture() {
        let t = Term::lam("y", Type::Real, Term::var("x"));
        let out = substitute_one(&t, "x", &Term::var("y"));
        assert_eq!(out, Term::lam("y1", Type::Real, Term::var("y")));
        assert!(out.alpha_eq(&Term::lam("z", Type::Real, Term::var("y"))));
    }

    #[test]
    fn fresh_names_keep_dottedness() {
        let taken = ["y1", "x1'"];
        assert_eq!(&*fresh_name("y", |n| taken.contains(&n)), "y2");
        assert_eq!(&*fresh_name("x'", |n| taken.contains(&n)), "x2'");
        // an undotted name also reserves its dotted partner
        assert_eq!(&*fresh_name("x", |n| taken.contains(&n)), "x2");
    }
}
