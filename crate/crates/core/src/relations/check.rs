use rayon::prelude::*;

use super::probes::{Probe, ProbeSet};
use super::selfdist::{estimate_self_distance, vertical_distance};
use super::verdict::{within, Image, Relation, Step, Verdict, Witness};
use super::RelError;
use crate::semantics::{diff_eval_closed, eval_closed, Diff, EvalError, Value};
use crate::syntax::{typecheck, Term, Type, TypingContext};

/// A split `(a₁, a₂)` of an η distance.
#[derive(Clone)]
pub struct Decomposition {
    pub first: Diff<f64>,
    pub second: Diff<f64>,
}

impl Decomposition {
    pub fn new(first: Diff<f64>, second: Diff<f64>) -> Self {
        Self { first, second }
    }

    fn fst(&self) -> Result<Decomposition, EvalError> {
        Ok(Self::new(self.first.fst()?.clone(), self.second.fst()?.clone()))
    }

    fn snd(&self) -> Result<Decomposition, EvalError> {
        Ok(Self::new(self.first.snd()?.clone(), self.second.snd()?.clone()))
    }
}

/// Self-distance probes `(f′, b, f′)` for γ, or `(f, b, f)` for δ.
#[derive(Clone)]
pub enum SelfProbes {
    /// One probe, from [`estimate_self_distance`].
    Estimated,
    /// Caller-supplied distances, each assumed to be a self-distance.
    Given(Vec<Diff<f64>>),
    /// Skip the self-distance clause; γ then checks the vertical clause
    /// only.
    VerticalOnly,
}

impl SelfProbes {
    fn project(&self, f: impl Fn(&Diff<f64>) -> Result<&Diff<f64>, EvalError>) -> Result<SelfProbes, EvalError> {
        Ok(match self {
            SelfProbes::Given(ds) => SelfProbes::Given(ds.iter().map(|d| f(d).cloned()).collect::<Result<_, _>>()?),
            other => other.clone(),
        })
    }

    fn inner(&self) -> SelfProbes {
        match self {
            SelfProbes::VerticalOnly => SelfProbes::VerticalOnly,
            _ => SelfProbes::Estimated,
        }
    }
}

enum Out {
    Pass(usize),
    Fail(Witness),
    Unknown(String, usize),
}

impl Out {
    fn step(mut self, step: Step) -> Out {
        if let Out::Fail(w) = &mut self {
            w.trail.insert(0, step);
        }
        self
    }

    fn checks(&self) -> usize {
        match self {
            Out::Pass(n) | Out::Unknown(_, n) => *n,
            Out::Fail(_) => 0,
        }
    }
}

type Res = Result<Out, RelError>;

// First failure (or error) in order wins; otherwise the first reason for
// inconclusiveness is kept and checks are summed.
fn combine(outs: impl IntoIterator<Item = Res>) -> Res {
    let mut total = 0;
    let mut unknown = None;
    for o in outs {
        match o? {
            Out::Pass(n) => total += n,
            Out::Fail(w) => return Ok(Out::Fail(w)),
            Out::Unknown(r, n) => {
                total += n;
                unknown.get_or_insert(r);
            }
        }
    }
    Ok(match unknown {
        Some(r) => Out::Unknown(r, total),
        None => Out::Pass(total),
    })
}

fn step_apply(domain: &Type, i: usize, p: &Probe, image: Image) -> Step {
    Step::Apply { domain: domain.to_string(), probe: i, label: p.label.clone(), image }
}

struct Checker<'p> {
    probes: &'p ProbeSet,
    slack: f64,
}

impl Checker<'_> {
    fn real(&self, rel: Relation, x: &Value<f64>, a: &Diff<f64>, x2: &Value<f64>) -> Res {
        let (x, x2) = (*x.as_real()?, *x2.as_real()?);
        let a = a.as_real()?.to_float();
        Ok(if within(x, a, x2, self.slack) {
            Out::Pass(1)
        } else {
            Out::Fail(Witness { relation: rel, trail: vec![], left: x, bound: a, right: x2, slack: self.slack, exact: None })
        })
    }

    // numerically `lhs ≤ rhs` pointwise at the probes
    fn leq(&self, ty: &Type, lhs: &Diff<f64>, rhs: &Diff<f64>) -> Res {
        match ty {
            Type::Real => {
                let (l, r) = (lhs.as_real()?.to_float(), rhs.as_real()?.to_float());
                let ok = r == f64::INFINITY || l <= r + self.slack * (1.0 + l.abs() + r.abs());
                Ok(if ok {
                    Out::Pass(1)
                } else {
                    Out::Fail(Witness {
                        relation: Relation::Eta,
                        trail: vec![Step::Rebase { triple: "a₁ ⊗ a₂ ⊒ a, as (a₁ ⊗ a₂, a, 0)".into() }],
                        left: l,
                        bound: r,
                        right: 0.0,
                        slack: self.slack,
                        exact: None,
                    })
                })
            }
            Type::Prod(a, b) => combine([
                self.leq(a, lhs.fst()?, rhs.fst()?).map(|o| o.step(Step::Fst)),
                self.leq(b, lhs.snd()?, rhs.snd()?).map(|o| o.step(Step::Snd)),
            ]),
            Type::Arrow(dom, cod) => {
                let ps = self.probes.at(dom)?;
                combine(ps.par_iter().enumerate().map(|(i, p)| {
                    let (l, r) = (lhs.apply(&p.x, &p.b)?, rhs.apply(&p.x, &p.b)?);
                    Ok(self.leq(cod, &l, &r)?.step(step_apply(dom, i, p, Image::Cross)))
                }).collect::<Vec<_>>())
            }
        }
    }

    fn rho(&self, ty: &Type, x: &Value<f64>, a: &Diff<f64>, x2: &Value<f64>) -> Res {
        match ty {
            Type::Real => self.real(Relation::Rho, x, a, x2),
            Type::Prod(l, r) => combine([
                self.rho(l, x.fst()?, a.fst()?, x2.fst()?).map(|o| o.step(Step::Fst)),
                self.rho(r, x.snd()?, a.snd()?, x2.snd()?).map(|o| o.step(Step::Snd)),
            ]),
            Type::Arrow(dom, cod) => {
                let ps = self.probes.at(dom)?;
                combine(ps.par_iter().enumerate().map(|(i, p)| {
                    let fy = x.apply(&p.x)?;
                    let d = a.apply(&p.x, &p.b)?;
                    let cross = self.rho(cod, &fy, &d, &x2.apply(&p.x2)?)?.step(step_apply(dom, i, p, Image::Cross));
                    if let Out::Fail(_) = cross {
                        return Ok(cross);
                    }
                    let left = self.rho(cod, &fy, &d, &x.apply(&p.x2)?)?.step(step_apply(dom, i, p, Image::Left));
                    combine([Ok(cross), Ok(left)])
                }).collect::<Vec<_>>())
            }
        }
    }

    fn gamma(&self, ty: &Type, x: &Value<f64>, a: &Diff<f64>, x2: &Value<f64>, selfp: &SelfProbes) -> Res {
        match ty {
            Type::Real => self.real(Relation::Gamma, x, a, x2),
            Type::Prod(l, r) => combine([
                self.gamma(l, x.fst()?, a.fst()?, x2.fst()?, &selfp.project(Diff::fst)?).map(|o| o.step(Step::Fst)),
                self.gamma(r, x.snd()?, a.snd()?, x2.snd()?, &selfp.project(Diff::snd)?).map(|o| o.step(Step::Snd)),
            ]),
            Type::Arrow(dom, cod) => {
                let ps = self.probes.at(dom)?;
                let inner = selfp.inner();
                let vertical = combine(ps.par_iter().enumerate().map(|(i, p)| {
                    let out = self.gamma(cod, &x.apply(&p.x)?, &a.apply(&p.x, &p.b)?, &x2.apply(&p.x)?, &inner)?;
                    Ok(out.step(step_apply(dom, i, p, Image::Vertical)))
                }).collect::<Vec<_>>())?;
                if let Out::Fail(_) = vertical {
                    return Ok(vertical);
                }
                let selfs = match selfp {
                    SelfProbes::Estimated => vec![estimate_self_distance(ty, x2, self.probes)?.diff],
                    SelfProbes::Given(ds) => ds.clone(),
                    SelfProbes::VerticalOnly => vec![],
                };
                let mut outs = vec![Ok(vertical)];
                for (j, s) in selfs.iter().enumerate() {
                    let triple = format!("(f, a ⊗ b{j}, f) for self-distance probe #{j} of f′");
                    outs.push(self.rho(ty, x, &a.tensor(s)?, x).map(|o| o.step(Step::Rebase { triple })));
                }
                combine(outs)
            }
        }
    }

    fn eta(&self, ty: &Type, x: &Value<f64>, a: &Diff<f64>, x2: &Value<f64>, dec: Option<&Decomposition>) -> Res {
        match ty {
            Type::Real => self.real(Relation::Eta, x, a, x2),
            Type::Prod(l, r) => {
                let (dl, dr) = match dec {
                    Some(d) => (Some(d.fst()?), Some(d.snd()?)),
                    None => (None, None),
                };
                combine([
                    self.eta(l, x.fst()?, a.fst()?, x2.fst()?, dl.as_ref()).map(|o| o.step(Step::Fst)),
                    self.eta(r, x.snd()?, a.snd()?, x2.snd()?, dr.as_ref()).map(|o| o.step(Step::Snd)),
                ])
            }
            Type::Arrow(..) => {
                let candidates = match dec {
                    Some(d) => vec![("supplied".to_string(), d.clone())],
                    None => self.candidates(ty, x, a, x2)?,
                };
                let mut checks = 0;
                let mut rejected = Vec::new();
                for (name, d) in &candidates {
                    match self.eta_split(ty, x, a, x2, d)? {
                        Out::Pass(n) => return Ok(Out::Pass(checks + n)),
                        Out::Fail(w) => rejected.push(format!("{name}: {w}")),
                        Out::Unknown(r, n) => {
                            checks += n;
                            rejected.push(format!("{name}: {r}"));
                        }
                    }
                }
                let reason = if dec.is_some() {
                    format!("supplied decomposition rejected ({})", rejected.join("; "))
                } else {
                    format!("no decomposition found among {} candidates", candidates.len())
                };
                Ok(Out::Unknown(reason, checks))
            }
        }
    }

    // checks one decomposition of `(f, a, f′)` at the η probes of the domain
    fn eta_split(&self, ty: &Type, f: &Value<f64>, a: &Diff<f64>, f2: &Value<f64>, d: &Decomposition) -> Res {
        let Type::Arrow(dom, cod) = ty else { unreachable!("eta_split at an arrow type") };
        let ps = self.probes.at(dom)?;
        let eta_probes: Vec<(usize, &Probe)> = ps.iter().enumerate().filter(|(_, p)| p.in_eta).collect();
        if eta_probes.is_empty() {
            return Ok(Out::Unknown(format!("no η probes at {dom}"), 0));
        }
        let sum = d.first.tensor(&d.second)?;
        let bound = self.leq(ty, &sum, a)?;
        if !matches!(bound, Out::Pass(_)) {
            return Ok(bound);
        }
        let probes = combine(eta_probes.par_iter().map(|&(i, p)| {
            let first = self
                .eta(cod, &f.apply(&p.x)?, &d.first.apply(&p.x, &p.b)?, &f.apply(&p.x2)?, None)?
                .step(step_apply(dom, i, p, Image::EtaFirst));
            if let Out::Fail(_) = first {
                return Ok(first);
            }
            let second = self
                .eta(cod, &f.apply(&p.x2)?, &d.second.apply(&p.x, &p.b)?, &f2.apply(&p.x2)?, None)?
                .step(step_apply(dom, i, p, Image::EtaSecond));
            combine([Ok(first), Ok(second)])
        }).collect::<Vec<_>>())?;
        combine([Ok(bound), Ok(probes)])
    }

    fn candidates(&self, ty: &Type, f: &Value<f64>, a: &Diff<f64>, f2: &Value<f64>) -> Result<Vec<(String, Decomposition)>, RelError> {
        let top = Diff::zero(ty);
        let mut out = vec![
            ("(a, ⊤)".to_string(), Decomposition::new(a.clone(), top.clone())),
            ("(⊤, a)".to_string(), Decomposition::new(top, a.clone())),
        ];
        let s = estimate_self_distance(ty, f, self.probes)?.diff;
        out.push(("(s, s ⊸ a)".into(), Decomposition::new(s.clone(), residual(ty, &s, a))));
        if let Some(v) = vertical_distance(ty, f, f2, self.probes) {
            out.push(("(v ⊸ a, v)".into(), Decomposition::new(residual(ty, &v, a), v.clone())));
            out.push(("(s, v)".into(), Decomposition::new(s, v)));
        }
        Ok(out)
    }

    fn delta(&self, ty: &Type, x: &Value<f64>, a: &Diff<f64>, x2: &Value<f64>, selfp: &SelfProbes) -> Res {
        match ty {
            Type::Real => self.real(Relation::Delta, x, a, x2),
            Type::Prod(l, r) => combine([
                self.delta(l, x.fst()?, a.fst()?, x2.fst()?, &selfp.project(Diff::fst)?).map(|o| o.step(Step::Fst)),
                self.delta(r, x.snd()?, a.snd()?, x2.snd()?, &selfp.project(Diff::snd)?).map(|o| o.step(Step::Snd)),
            ]),
            Type::Arrow(..) => {
                let selfs = match selfp {
                    SelfProbes::Given(ds) => ds.clone(),
                    _ => vec![estimate_self_distance(ty, x, self.probes)?.diff],
                };
                let outs: Vec<Res> = selfs
                    .iter()
                    .enumerate()
                    .map(|(j, s)| {
                        let triple = format!("(f, a ⊗ b{j}, f′) for self-distance probe #{j} of f");
                        Ok(self.eta(ty, x, &a.tensor(s)?, x2, None)?.step(Step::Rebase { triple }))
                    })
                    .collect();
                combine(outs)
            }
        }
    }
}

/// Pointwise `s ⊸ a`.
fn residual(ty: &Type, s: &Diff<f64>, a: &Diff<f64>) -> Diff<f64> {
    match ty {
        Type::Real => match (s.as_real(), a.as_real()) {
            (Ok(s), Ok(a)) => Diff::Real(s.residual(a)),
            _ => Diff::infinite(ty),
        },
        _ => {
            let (ty, s, a) = (ty.clone(), s.clone(), a.clone());
            match ty {
                Type::Prod(l, r) => match (s.fst(), s.snd(), a.fst(), a.snd()) {
                    (Ok(s1), Ok(s2), Ok(a1), Ok(a2)) => Diff::pair(residual(&l, s1, a1), residual(&r, s2, a2)),
                    _ => Diff::infinite(&Type::Prod(l, r)),
                },
                Type::Arrow(_, cod) => Diff::fun(move |x, b| Ok(residual(&cod, &s.apply(x, b)?, &a.apply(x, b)?))),
                Type::Real => unreachable!(),
            }
        }
    }
}

fn finish(rel: Relation, ty: &Type, out: Out) -> Verdict {
    match out {
        Out::Pass(checks) => Verdict::Consistent { checks, depth: ty.arrow_depth() },
        Out::Fail(mut w) => {
            w.relation = rel;
            Verdict::Falsified { witness: Box::new(w) }
        }
        Out::Unknown(reason, checks) => Verdict::Inconclusive { reason, checks },
    }
}

fn checker(probes: &ProbeSet) -> Checker<'_> {
    Checker { probes, slack: probes.slack() }
}

/// ρ membership of `(x, a, x′)` at `ty`.
pub fn check_rho(ty: &Type, x: &Value<f64>, a: &Diff<f64>, x2: &Value<f64>, probes: &ProbeSet) -> Result<Verdict, RelError> {
    Ok(finish(Relation::Rho, ty, checker(probes).rho(ty, x, a, x2)?))
}

/// γ membership. The self-distance clause is instantiated at
/// `self_probes`.
pub fn check_gamma(
    ty: &Type,
    x: &Value<f64>,
    a: &Diff<f64>,
    x2: &Value<f64>,
    probes: &ProbeSet,
    self_probes: &SelfProbes,
) -> Result<Verdict, RelError> {
    Ok(finish(Relation::Gamma, ty, checker(probes).gamma(ty, x, a, x2, self_probes)?))
}

/// η membership, with a supplied decomposition or a candidate search.
pub fn check_eta(
    ty: &Type,
    x: &Value<f64>,
    a: &Diff<f64>,
    x2: &Value<f64>,
    probes: &ProbeSet,
    decomposition: Option<&Decomposition>,
) -> Result<Verdict, RelError> {
    Ok(finish(Relation::Eta, ty, checker(probes).eta(ty, x, a, x2, decomposition)?))
}

/// δ membership; the arrow clause ranges over `self_probes` of `x`
/// (`Estimated` and `VerticalOnly` both use the estimate).
pub fn check_delta(
    ty: &Type,
    x: &Value<f64>,
    a: &Diff<f64>,
    x2: &Value<f64>,
    probes: &ProbeSet,
    self_probes: &SelfProbes,
) -> Result<Verdict, RelError> {
    Ok(finish(Relation::Delta, ty, checker(probes).delta(ty, x, a, x2, self_probes)?))
}

/// Checks `(⟦t⟧, ⟦t⟧•, ⟦t⟧)` in ρ for a closed term.
pub fn check_fundamental(t: &Term, probes: &ProbeSet) -> Result<Verdict, RelError> {
    let ty = typecheck(&TypingContext::new(), t)?;
    let v = eval_closed::<f64>(t)?;
    let d = diff_eval_closed::<f64>(t)?;
    check_rho(&ty, &v, &d, &v, probes)
}

/// The over-approximation theorem for `f, f′ : A ⇒ Real`: from the vertical
/// bound `|f·x − f′·x| ≤ a·x·b` and the self-distances `(f, a′, f)`,
/// `(f′, a′, f′)`, conclude `(f, a ⊗ a′, f′)` in ρ. A hypothesis that fails
/// at the probes is an error; a falsified verdict means the conclusion
/// failed while every hypothesis held.
pub fn check_theorem_approx(
    domain: &Type,
    f: &Value<f64>,
    f2: &Value<f64>,
    a: &Diff<f64>,
    a2: &Diff<f64>,
    probes: &ProbeSet,
) -> Result<Verdict, RelError> {
    let ty = Type::arrow(domain.clone(), Type::Real);
    let c = checker(probes);
    let hyp = |name: &str, out: Out| match out {
        Out::Fail(w) => Err(RelError::Hypothesis { hypothesis: name.into(), witness: Box::new(w) }),
        other => Ok(other),
    };
    let ps = probes.at(domain)?;
    let vertical = combine(ps.par_iter().enumerate().map(|(i, p)| {
        Ok(c.real(Relation::Rho, &f.apply(&p.x)?, &a.apply(&p.x, &p.b)?, &f2.apply(&p.x)?)?
            .step(step_apply(domain, i, p, Image::Vertical)))
    }).collect::<Vec<_>>())?;
    let vertical = hyp("|f·x − f′·x| ≤ a·x·b", vertical)?;
    let left = hyp("(f, a′, f) ∈ ρ", c.rho(&ty, f, a2, f)?)?;
    let right = hyp("(f′, a′, f′) ∈ ρ", c.rho(&ty, f2, a2, f2)?)?;
    let conclusion = c.rho(&ty, f, &a.tensor(a2)?, f2)?;
    let checks = vertical.checks() + left.checks() + right.checks();
    Ok(match finish(Relation::Rho, &ty, conclusion) {
        Verdict::Consistent { checks: n, depth } => Verdict::Consistent { checks: n + checks, depth },
        other => other,
    })
}

/// The transitivity witness `(c₁, c₂) = φ(a, b)` for η, together with
/// decompositions of `c₁` and `c₂` at arrow types. `decompositions` are
/// those of `a` and `b`, required at arrow types.
///
/// At `Real`, `φ(a, b) = (0, a + b)`. At `B ⇒ C` with greatest
/// decompositions `(a₁, a₂)`, `(b₁, b₂)` and `(k, l) = φ_C(a₂·w·d, b₂·w·d)`,
/// the witness is `c₁ = b₁ ⊗ k` (decomposed as `(b₁, k)`) and
/// `c₂ = a₁ ⊗ l` (decomposed as `(a₁, l)`). Codomains must be built from
/// `Real` and `×`, where `φ_C` is `(0, sum)` componentwise.
pub fn eta_transitivity_split(
    ty: &Type,
    a: &Diff<f64>,
    b: &Diff<f64>,
    decompositions: Option<(&Decomposition, &Decomposition)>,
) -> Result<(Diff<f64>, Diff<f64>, Option<Decomposition>, Option<Decomposition>), RelError> {
    match ty {
        Type::Real | Type::Prod(..) if ty.arrow_depth() == 0 => Ok((Diff::zero(ty), a.tensor(b)?, None, None)),
        Type::Arrow(_, cod) if cod.arrow_depth() == 0 => {
            let (da, db) = decompositions
                .ok_or_else(|| RelError::Config("η transitivity at arrow types needs decompositions of a and b".into()))?;
            let k = Diff::zero(ty);
            let l = da.second.tensor(&db.second)?;
            let c1 = db.first.tensor(&k)?;
            let c2 = da.first.tensor(&l)?;
            Ok((c1, c2, Some(Decomposition::new(db.first.clone(), k)), Some(Decomposition::new(da.first.clone(), l))))
        }
        _ => Err(RelError::UnsupportedDepth { ty: ty.clone(), depth: ty.arrow_depth() }),
    }
}

/// Checks the η transitivity witness for `(x, a, z)` and `(z, b, y)`: the
/// premises with the supplied decompositions, `a ⊗ b ⊑ c₁ ⊗ c₂`,
/// `(z, c₁, z)` and `(x, c₂, y)`.
#[allow(clippy::too_many_arguments)]
pub fn check_eta_transitivity(
    ty: &Type,
    x: &Value<f64>,
    z: &Value<f64>,
    y: &Value<f64>,
    a: &Diff<f64>,
    b: &Diff<f64>,
    decompositions: Option<(&Decomposition, &Decomposition)>,
    probes: &ProbeSet,
) -> Result<Verdict, RelError> {
    let c = checker(probes);
    let premise = |name: &str, out: Out| match out {
        Out::Pass(n) => Ok(n),
        Out::Fail(w) => Err(RelError::Hypothesis { hypothesis: name.into(), witness: Box::new(w) }),
        Out::Unknown(r, _) => Err(RelError::Config(format!("premise {name} not established: {r}"))),
    };
    let n1 = premise("(x, a, z) ∈ η", c.eta(ty, x, a, z, decompositions.map(|d| d.0))?)?;
    let n2 = premise("(z, b, y) ∈ η", c.eta(ty, z, b, y, decompositions.map(|d| d.1))?)?;
    let (c1, c2, d1, d2) = eta_transitivity_split(ty, a, b, decompositions)?;
    let bound = c.leq(ty, &c1.tensor(&c2)?, &a.tensor(b)?)?;
    let out = combine([
        Ok(bound),
        c.eta(ty, z, &c1, z, d1.as_ref()).map(|o| o.step(Step::Rebase { triple: "(z, c₁, z)".into() })),
        c.eta(ty, x, &c2, y, d2.as_ref()).map(|o| o.step(Step::Rebase { triple: "(x, c₂, y)".into() })),
    ])?;
    Ok(match finish(Relation::Eta, ty, out) {
        Verdict::Consistent { checks, depth } => Verdict::Consistent { checks: checks + n1 + n2, depth },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::ExtNonNegReal;
    use crate::relations::{generate_probes, ProbeConfig};
    use crate::syntax::parse;
    use std::f64::consts::FRAC_PI_2;

    fn cfg() -> ProbeConfig {
        ProbeConfig { real_count: 200, ..ProbeConfig::default() }
    }

    fn rr() -> Type {
        Type::real_fn()
    }

    fn closed(src: &str) -> Value<f64> {
        eval_closed(&parse(src).unwrap()).unwrap()
    }

    fn dfun(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Diff<f64> {
        Diff::fun(move |x, b| {
            let (x, b) = (*x.as_real()?, b.as_real()?.to_float());
            Ok(Diff::Real(ExtNonNegReal::from_float(f(x, b)).unwrap_or_else(ExtNonNegReal::infinity)))
        })
    }

    fn d(x: f64) -> Diff<f64> {
        Diff::Real(ExtNonNegReal::from_float(x).unwrap())
    }

    #[test]
    fn real_membership_is_exact() {
        let set = generate_probes(&Type::Real, cfg()).unwrap();
        let r = |x: f64| Value::Real(x);
        assert!(check_rho(&Type::Real, &r(3.0), &d(1.0), &r(3.5), &set).unwrap().is_consistent());
        assert!(check_rho(&Type::Real, &r(3.0), &d(0.4), &r(3.5), &set).unwrap().is_falsified());
        assert!(check_gamma(&Type::Real, &r(0.0), &d(0.5), &r(0.3), &set, &SelfProbes::Estimated).unwrap().is_consistent());
    }

    #[test]
    fn id_versus_sin() {
        let set = generate_probes(&rr(), cfg()).unwrap();
        let (id, sin) = (closed("\\x:Real. x"), closed("\\x:Real. sin(x)"));
        let a = dfun(|x, b| (x - x.sin()).abs() + b);
        assert!(check_rho(&rr(), &id, &a, &sin, &set).unwrap().is_consistent());

        let zero = Diff::zero(&rr());
        let v = check_rho(&rr(), &id, &zero, &sin, &set).unwrap();
        let w = v.witness().expect("falsified");
        assert_eq!(w.left, FRAC_PI_2);
        assert!(w.violates());
        assert!(w.recheck(&rr(), &id, &zero, &sin, &set).unwrap().unwrap());
    }

    #[test]
    fn gamma_vertical_clause_for_id_and_sin() {
        let set = generate_probes(&rr(), cfg()).unwrap();
        let (id, sin) = (closed("\\x:Real. x"), closed("\\x:Real. sin(x)"));
        let a = dfun(|x, _| (x - x.sin()).abs());
        assert!(check_gamma(&rr(), &id, &a, &sin, &set, &SelfProbes::VerticalOnly).unwrap().is_consistent());
        // with the self-distance b of sin the second clause holds too
        let b = dfun(|_, b| b);
        assert!(check_gamma(&rr(), &id, &a, &sin, &set, &SelfProbes::Given(vec![b])).unwrap().is_consistent());
        // the tightest self-distance of sin is not enough at x = 0
        assert!(check_gamma(&rr(), &id, &a, &sin, &set, &SelfProbes::Estimated).unwrap().is_falsified());
    }

    #[test]
    fn fundamental_lemma_instances() {
        let set = ProbeSet::for_checking(&rr(), cfg()).unwrap();
        for src in ["\\x:Real. sin(x)", "\\x:Real. x * x", "\\x:Real. cos(x) * x - 3"] {
            assert!(check_fundamental(&parse(src).unwrap(), &set).unwrap().is_consistent(), "{src}");
        }
        let deps = parse("\\f:Real->Real. \\x:Real. (f (x + 0.1) - f x) / 0.1").unwrap();
        let ty = typecheck(&TypingContext::new(), &deps).unwrap();
        let set = ProbeSet::for_checking(&ty, ProbeConfig { real_count: 100, ..cfg() }).unwrap();
        assert!(check_fundamental(&deps, &set).unwrap().is_consistent());
    }

    #[test]
    fn theorem_approx_for_id_and_sin() {
        let set = generate_probes(&rr(), cfg()).unwrap();
        let (id, sin) = (closed("\\x:Real. x"), closed("\\x:Real. sin(x)"));
        let a = dfun(|x, _| (x - x.sin()).abs());
        let a2 = dfun(|_, b| b);
        assert!(check_theorem_approx(&Type::Real, &id, &sin, &a, &a2, &set).unwrap().is_consistent());
        let bad = dfun(|_, _| 0.0);
        let err = check_theorem_approx(&Type::Real, &id, &sin, &bad, &a2, &set).unwrap_err();
        assert!(matches!(err, RelError::Hypothesis { .. }));
    }

    #[test]
    fn eta_decompositions() {
        let set = generate_probes(&rr(), cfg()).unwrap();
        let sin = closed("\\x:Real. sin(x)");
        let s = dfun(|_, b| b);
        let dec = Decomposition::new(s.clone(), Diff::zero(&rr()));
        assert!(check_eta(&rr(), &sin, &s, &sin, &set, Some(&dec)).unwrap().is_consistent());
        let (id, a) = (closed("\\x:Real. x"), dfun(|x, b| (x - x.sin()).abs() + 3.0 * b));
        assert!(check_eta(&rr(), &id, &a, &sin, &set, None).unwrap().is_consistent());
        let tiny = dfun(|_, _| 0.0);
        assert!(matches!(check_eta(&rr(), &id, &tiny, &sin, &set, None).unwrap(), Verdict::Inconclusive { .. }));
    }

    #[test]
    fn eta_transitivity_through_a_middle_function() {
        let set = generate_probes(&rr(), cfg()).unwrap();
        let (x, z, y) = (closed("\\x:Real. x"), closed("\\x:Real. sin(x)"), closed("\\x:Real. 0"));
        // a₂ and b₂ bound the vertical gaps over the ball: t − sin t is
        // 2-Lipschitz and |sin| is 1-Lipschitz and at most 1
        let da = Decomposition::new(dfun(|_, b| b), dfun(|x, b| (x - x.sin()).abs() + 2.0 * b));
        let db = Decomposition::new(dfun(|_, b| b), dfun(|x, b| (x.sin().abs() + b).min(1.0)));
        let a = da.first.tensor(&da.second).unwrap();
        let b = db.first.tensor(&db.second).unwrap();
        let v = check_eta_transitivity(&rr(), &x, &z, &y, &a, &b, Some((&da, &db)), &set).unwrap();
        assert!(v.is_consistent(), "{v}");
    }

    #[test]
    fn delta_reduces_to_eta_under_the_top_probe() {
        let set = generate_probes(&rr(), cfg()).unwrap();
        let (id, sin) = (closed("\\x:Real. x"), closed("\\x:Real. sin(x)"));
        let a = dfun(|x, b| (x - x.sin()).abs() + 2.0 * b);
        let top = SelfProbes::Given(vec![Diff::zero(&rr())]);
        let delta = check_delta(&rr(), &id, &a, &sin, &set, &top).unwrap();
        let eta = check_eta(&rr(), &id, &a, &sin, &set, None).unwrap();
        assert_eq!(delta.is_consistent(), eta.is_consistent());
        assert!(check_delta(&rr(), &id, &a, &sin, &set, &SelfProbes::Estimated).unwrap().is_consistent());
    }

    #[test]
    fn self_distance_estimates() {
        let set = generate_probes(&rr(), cfg()).unwrap();
        let seven = estimate_self_distance(&Type::Real, &Value::Real(7.0), &set).unwrap();
        assert!(seven.diff.as_real().unwrap().is_zero());
        let c = closed("\\x:Real. 2");
        let top = Diff::zero(&rr());
        assert!(check_rho(&rr(), &c, &top, &c, &set).unwrap().is_consistent());
        let sin = closed("\\x:Real. sin(x)");
        assert!(check_rho(&rr(), &sin, &dfun(|_, b| b), &sin, &set).unwrap().is_consistent());
        let native = Value::real_fn("sq", |x: &f64| x * x);
        let est = estimate_self_distance(&rr(), &native, &set).unwrap();
        assert_eq!(est.provenance, crate::relations::Provenance::Sampled);
        assert!(check_rho(&rr(), &native, &est.diff, &native, &set).unwrap().is_consistent());
    }
}
