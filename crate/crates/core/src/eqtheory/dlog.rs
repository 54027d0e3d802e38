use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::relations::{Image, Relation, Step, Verdict, Witness};
use crate::syntax::random::{random_closed, GenConfig};
use crate::syntax::{
    derivative_term, normalize, parse, typecheck, DeriveError, NormError, PrimRegistry, Term, Type, TypeError,
    TypingContext,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DlogError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error("`{term}` should have type {expected}, found {found}")]
    Mismatch { term: Term, expected: Type, found: Type },
    #[error("`{0}` does not normalize to a literal")]
    Blocked(Term),
    #[error("no δ^log probes at type {0}")]
    MissingProbes(Type),
}

/// A closed triple `(s, b, s′)` assumed in δ^log at its type.
#[derive(Clone, Debug)]
pub struct DlogProbe {
    pub label: String,
    pub s: Term,
    pub b: Term,
    pub s2: Term,
}

/// Syntactic probe triples per type: literal triples `(r, s, r′)` with
/// `|r − r′| ≤ s` at `Real`, pairs of those at products, and fundamental
/// self-triples `(f, ∂f, f)` at arrows.
#[derive(Clone, Debug)]
pub struct DlogProbes {
    real_count: usize,
    function_count: usize,
    seed: u64,
    at: BTreeMap<String, Vec<DlogProbe>>,
}

impl Default for DlogProbes {
    fn default() -> Self {
        Self::new(24, 8, 42)
    }
}

impl DlogProbes {
    pub fn new(real_count: usize, function_count: usize, seed: u64) -> Self {
        Self { real_count, function_count, seed, at: BTreeMap::new() }
    }

    /// Probes for every domain reached from `ty`.
    pub fn for_type(ty: &Type, real_count: usize, function_count: usize, seed: u64) -> Self {
        let mut p = Self::new(real_count, function_count, seed);
        p.ensure_domains(ty);
        p
    }

    pub fn ensure_domains(&mut self, ty: &Type) {
        match ty {
            Type::Real => {}
            Type::Prod(a, b) => {
                self.ensure_domains(a);
                self.ensure_domains(b);
            }
            Type::Arrow(a, b) => {
                self.ensure(a);
                self.ensure_domains(b);
            }
        }
    }

    pub fn ensure(&mut self, ty: &Type) {
        if self.at.contains_key(&ty.ascii()) {
            return;
        }
        self.ensure_domains(ty);
        let probes = match ty {
            Type::Real => self.reals(),
            Type::Prod(a, b) => {
                self.ensure(a);
                self.ensure(b);
                let (l, r) = (&self.at[&a.ascii()], &self.at[&b.ascii()]);
                let k = (self.real_count as f64).sqrt().ceil() as usize;
                l.iter()
                    .take(k)
                    .flat_map(|p| r.iter().take(k).map(move |q| (p, q)))
                    .map(|(p, q)| DlogProbe {
                        label: format!("({}, {})", p.label, q.label),
                        s: Term::pair(p.s.clone(), q.s.clone()),
                        b: Term::pair(p.b.clone(), q.b.clone()),
                        s2: Term::pair(p.s2.clone(), q.s2.clone()),
                    })
                    .collect()
            }
            Type::Arrow(..) => self.functions(ty),
        };
        self.at.insert(ty.ascii(), probes);
    }

    pub fn at(&self, ty: &Type) -> Result<&[DlogProbe], DlogError> {
        self.at.get(&ty.ascii()).map(Vec::as_slice).ok_or_else(|| DlogError::MissingProbes(ty.clone()))
    }

    pub fn insert(&mut self, ty: &Type, probe: DlogProbe) {
        self.at.entry(ty.ascii()).or_default().push(probe);
    }

    fn rng(&self, ty: &Type) -> ChaCha8Rng {
        let h = ty.ascii().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
        ChaCha8Rng::seed_from_u64(self.seed ^ h)
    }

    fn reals(&self) -> Vec<DlogProbe> {
        let tenths = |n: i64| Term::lit(BigRational::new(n.into(), 10.into()));
        let triple = |r: i64, s: i64, r2: i64| DlogProbe {
            label: format!("({}, {}, {})", tenths(r), tenths(s), tenths(r2)),
            s: tenths(r),
            b: tenths(s),
            s2: tenths(r2),
        };
        let mut out = vec![triple(0, 0, 0), triple(0, 1, 1), triple(10, 5, 5), triple(-15, 10, -5)];
        let mut rng = self.rng(&Type::Real);
        while out.len() < self.real_count {
            let r = rng.gen_range(-30..=30);
            let s = rng.gen_range(0..=20);
            let r2 = r + rng.gen_range(-s..=s);
            out.push(triple(r, s, r2));
        }
        out.truncate(self.real_count.max(1));
        out
    }

    fn functions(&self, ty: &Type) -> Vec<DlogProbe> {
        let mut terms: Vec<(String, Term)> = Vec::new();
        if *ty == Type::real_fn() {
            for (label, src) in [
                ("id", "\\x:Real. x"),
                ("sin", "\\x:Real. sin(x)"),
                ("const", "\\x:Real. 1.5"),
                ("square", "\\x:Real. mul(x, x)"),
                ("shift", "\\x:Real. add(x, 1)"),
            ] {
                terms.push((label.into(), parse(src).expect("library term")));
            }
        }
        let reg = PrimRegistry::standard();
        let cfg = GenConfig { max_depth: 2, ..GenConfig::new(["add", "mul", "sin", "cos"].map(|p| reg.prim(p)).to_vec()) };
        let mut rng = self.rng(ty);
        let mut k = 0;
        while terms.len() < self.function_count.max(1) {
            terms.push((format!("random {k}"), random_closed(&mut rng, ty, &cfg)));
            k += 1;
        }
        terms
            .into_iter()
            .map(|(label, f)| {
                let df = derivative_term(&TypingContext::new(), &f).expect("closed generated term");
                DlogProbe { label: format!("{label} = {f}"), s: f.clone(), b: df, s2: f }
            })
            .collect()
    }
}

enum Out {
    Pass(usize),
    Fail(Witness),
}

/// δ^log membership of closed terms: exact at `Real` by normalization,
/// componentwise at products, and at arrows both application images over
/// the probe triples of the domain.
pub fn check_dlog(ty: &Type, t: &Term, a: &Term, t2: &Term, probes: &DlogProbes) -> Result<Verdict, DlogError> {
    let empty = TypingContext::new();
    for (term, want) in [(t, ty.clone()), (t2, ty.clone()), (a, ty.partial())] {
        let found = typecheck(&empty, term)?;
        if found != want {
            return Err(DlogError::Mismatch { term: term.clone(), expected: want, found });
        }
    }
    let mut trail = Vec::new();
    Ok(match go(ty, t, a, t2, probes, &mut trail)? {
        Out::Pass(checks) => Verdict::Consistent { checks, depth: ty.arrow_depth() },
        Out::Fail(w) => Verdict::Falsified { witness: Box::new(w) },
    })
}

fn literal(t: &Term) -> Result<BigRational, DlogError> {
    let n = normalize(&TypingContext::new(), t)?;
    n.as_lit().cloned().ok_or(DlogError::Blocked(n))
}

fn go(ty: &Type, t: &Term, a: &Term, t2: &Term, probes: &DlogProbes, trail: &mut Vec<Step>) -> Result<Out, DlogError> {
    match ty {
        Type::Real => {
            let (r, s, r2) = (literal(t)?, literal(a)?, literal(t2)?);
            if !s.is_negative() && (&r - &r2).abs() <= s {
                return Ok(Out::Pass(1));
            }
            let f = |q: &BigRational| q.to_f64().unwrap_or(f64::NAN);
            Ok(Out::Fail(Witness {
                relation: Relation::Dlog,
                trail: trail.clone(),
                left: f(&r),
                bound: f(&s),
                right: f(&r2),
                slack: 0.0,
                exact: Some([r, s, r2].map(|q| Term::lit(q).to_string())),
            }))
        }
        Type::Prod(l, r) => {
            let mut n = 0;
            for (step, ty, proj) in [(Step::Fst, l, Term::fst as fn(Term) -> Term), (Step::Snd, r, Term::snd)] {
                trail.push(step);
                let out = go(ty, &proj(t.clone()), &proj(a.clone()), &proj(t2.clone()), probes, trail)?;
                trail.pop();
                match out {
                    Out::Pass(k) => n += k,
                    fail => return Ok(fail),
                }
            }
            Ok(Out::Pass(n))
        }
        Type::Arrow(dom, cod) => {
            let mut n = 0;
            for (i, p) in probes.at(dom)?.iter().enumerate() {
                let fs = Term::app(t.clone(), p.s.clone());
                let d = Term::apps(a.clone(), [p.s.clone(), p.b.clone()]);
                for (image, other) in [(Image::Cross, t2), (Image::Left, t)] {
                    trail.push(Step::Apply { domain: dom.ascii(), probe: i, label: p.label.clone(), image });
                    let out = go(cod, &fs, &d, &Term::app(other.clone(), p.s2.clone()), probes, trail)?;
                    trail.pop();
                    match out {
                        Out::Pass(k) => n += k,
                        fail => return Ok(fail),
                    }
                }
            }
            Ok(Out::Pass(n))
        }
    }
}
