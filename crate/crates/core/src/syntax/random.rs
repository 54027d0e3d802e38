//! Random well-typed terms, for probe libraries and property tests.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

use super::prim::PrimRef;
use super::subst::fresh_name;
use super::term::{Name, Term, TypingContext};
use super::types::Type;

/// What the generator may use.
#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Primitives of any arity; arguments are generated at `Real`.
    pub prims: Vec<PrimRef>,
    /// Literals are `n / 10` with `n` drawn from this range.
    pub literal_tenths: (i64, i64),
    pub max_depth: usize,
    /// Allow `(λx. t) s` redexes.
    pub redexes: bool,
}

impl GenConfig {
    pub fn new(prims: Vec<PrimRef>) -> Self {
        Self { prims, literal_tenths: (-20, 20), max_depth: 3, redexes: true }
    }
}

struct Gen<'a, R> {
    rng: &'a mut R,
    cfg: &'a GenConfig,
    scope: Vec<(Name, Type)>,
    counter: usize,
}

fn reaches(ty: &Type, target: &Type) -> bool {
    ty == target
        || match ty {
            Type::Real => false,
            Type::Arrow(_, b) => reaches(b, target),
            Type::Prod(a, b) => reaches(a, target) || reaches(b, target),
        }
}

impl<R: Rng> Gen<'_, R> {
    fn fresh(&mut self) -> Name {
        let taken: Vec<Name> = self.scope.iter().map(|(n, _)| n.clone()).collect();
        let base = ["x", "y", "z", "u", "w"][self.counter % 5];
        self.counter += 1;
        if taken.iter().any(|n| &**n == base) {
            fresh_name(base, |n| taken.iter().any(|t| &**t == n))
        } else {
            base.into()
        }
    }

    fn literal(&mut self) -> Term {
        let (lo, hi) = self.cfg.literal_tenths;
        let n = self.rng.gen_range(lo..=hi);
        Term::Lit(BigRational::new(BigInt::from(n), BigInt::from(10)))
    }

    fn term(&mut self, ty: &Type, depth: usize) -> Term {
        let usable: Vec<(Name, Type)> = self.scope.iter().filter(|(_, t)| reaches(t, ty)).cloned().collect();
        if depth == 0 {
            if let Some((x, _)) = usable.iter().filter(|(_, t)| t == ty).collect::<Vec<_>>().choose(self.rng) {
                return Term::Var(x.clone());
            }
            return self.intro(ty, 0);
        }
        let roll = self.rng.gen_range(0..10);
        if roll < 4 && !usable.is_empty() {
            let (x, t) = usable.choose(self.rng).expect("non-empty").clone();
            return self.eliminate(Term::Var(x), &t, ty, depth - 1);
        }
        if *ty == Type::Real && roll >= 4 && self.cfg.redexes && self.rng.gen_bool(0.1) {
            let x = self.fresh();
            let arg = self.term(&Type::Real, depth - 1);
            self.scope.push((x.clone(), Type::Real));
            let body = self.term(&Type::Real, depth - 1);
            self.scope.pop();
            return Term::app(Term::lam(&x, Type::Real, body), arg);
        }
        self.intro(ty, depth)
    }

    fn intro(&mut self, ty: &Type, depth: usize) -> Term {
        match ty {
            Type::Real => {
                if depth == 0 || self.cfg.prims.is_empty() || self.rng.gen_bool(0.25) {
                    return self.literal();
                }
                let p = self.cfg.prims.choose(self.rng).expect("non-empty").clone();
                let args = (0..p.arity()).map(|_| self.term(&Type::Real, depth - 1)).collect();
                Term::prim(p, args)
            }
            Type::Prod(a, b) => {
                let d = depth.saturating_sub(1);
                Term::pair(self.term(a, d), self.term(b, d))
            }
            Type::Arrow(a, b) => {
                let x = self.fresh();
                self.scope.push((x.clone(), (**a).clone()));
                let body = self.term(b, depth);
                self.scope.pop();
                Term::lam(&x, (**a).clone(), body)
            }
        }
    }

    // Applies or projects `head : ty` until it has type `target`.
    fn eliminate(&mut self, head: Term, ty: &Type, target: &Type, depth: usize) -> Term {
        if ty == target {
            return head;
        }
        match ty {
            Type::Arrow(a, b) => {
                let arg = self.term(a, depth);
                self.eliminate(Term::app(head, arg), b, target, depth)
            }
            Type::Prod(a, b) => {
                let go_left = reaches(a, target) && (!reaches(b, target) || self.rng.gen_bool(0.5));
                if go_left {
                    self.eliminate(Term::fst(head), a, target, depth)
                } else {
                    self.eliminate(Term::snd(head), b, target, depth)
                }
            }
            Type::Real => unreachable!("only called on types that reach the target"),
        }
    }
}

/// A random term with `ctx ⊢ t : ty`.
pub fn random_term<R: Rng>(rng: &mut R, ctx: &TypingContext, ty: &Type, cfg: &GenConfig) -> Term {
    let mut g = Gen { rng, cfg, scope: ctx.entries().to_vec(), counter: 0 };
    let depth = g.rng.gen_range(1..=cfg.max_depth.max(1));
    g.term(ty, depth)
}

/// A random closed term of type `ty`.
pub fn random_closed<R: Rng>(rng: &mut R, ty: &Type, cfg: &GenConfig) -> Term {
    random_term(rng, &TypingContext::new(), ty, cfg)
}
