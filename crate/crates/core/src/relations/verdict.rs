use std::fmt;

use num_traits::Signed;
use serde::Serialize;

use super::probes::ProbeSet;
use super::RelError;
use crate::semantics::{distance, Diff, Value};
use crate::syntax::Type;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Rho,
    Gamma,
    Eta,
    Delta,
    /// The syntactic family over closed terms, decided by normalization at
    /// `Real`.
    Dlog,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Rho => "ρ",
            Relation::Gamma => "γ",
            Relation::Eta => "η",
            Relation::Delta => "δ",
            Relation::Dlog => "δ^log",
        })
    }
}

/// Which image of an input probe `(y, b, y′)` a step descends into, for a
/// triple `(f, a, f′)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Image {
    /// `(f·y, a·y·b, f′·y′)`
    Cross,
    /// `(f·y, a·y·b, f·y′)`
    Left,
    /// `(f·y, a·y·b, f′·y)`
    Vertical,
    /// `(f·y, a₁·y·b, f·y′)`
    EtaFirst,
    /// `(f·y′, a₂·y·b, f′·y′)`
    EtaSecond,
}

impl Image {
    pub fn describe(self) -> &'static str {
        match self {
            Image::Cross => "(f·y, a·y·b, f′·y′)",
            Image::Left => "(f·y, a·y·b, f·y′)",
            Image::Vertical => "(f·y, a·y·b, f′·y)",
            Image::EtaFirst => "(f·y, a₁·y·b, f·y′)",
            Image::EtaSecond => "(f·y′, a₂·y·b, f′·y′)",
        }
    }
}

/// One step from the checked triple down to the Real-level violation.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Step {
    Apply { domain: String, probe: usize, label: String, image: Image },
    Fst,
    Snd,
    /// The check moved to another triple, e.g. `(f, a ⊗ b, f)` for a
    /// self-distance probe `b`.
    Rebase { triple: String },
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Apply { domain, probe, label, image } => {
                write!(f, "probe #{probe} at {domain} [{label}], image {}", image.describe())
            }
            Step::Fst => f.write_str("first component"),
            Step::Snd => f.write_str("second component"),
            Step::Rebase { triple } => write!(f, "triple {triple}"),
        }
    }
}

/// A Real-level violation `|left − right| > bound`, with the path that
/// reached it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub relation: Relation,
    pub trail: Vec<Step>,
    pub left: f64,
    #[serde(serialize_with = "distance")]
    pub bound: f64,
    pub right: f64,
    pub slack: f64,
    /// Exact renderings of `(left, bound, right)` when the comparison was
    /// made over rationals.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<[String; 3]>,
}

/// `|x − x′| ≤ a` up to the relative slack.
pub(crate) fn within(x: f64, a: f64, x2: f64, slack: f64) -> bool {
    if x.is_nan() || x2.is_nan() || a.is_nan() {
        return false;
    }
    a == f64::INFINITY || (x - x2).abs() <= a + slack * (1.0 + x.abs() + x2.abs())
}

impl Witness {
    /// Re-evaluates the final inequality, exactly when the witness carries
    /// exact values.
    pub fn violates(&self) -> bool {
        if let Some([l, b, r]) = &self.exact {
            let lit = |s: &str| crate::syntax::parse(s).ok().and_then(|t| t.as_lit().cloned());
            if let (Some(l), Some(b), Some(r)) = (lit(l), lit(b), lit(r)) {
                return (l - r).abs() > b;
            }
        }
        !within(self.left, self.bound, self.right, self.slack)
    }

    /// Replays the trail from `(x, a, x′) : ty`, re-running every
    /// application, and reports whether the end point is still a violation.
    /// `None` when the trail leaves the ρ clauses (decompositions, rebased
    /// triples), which cannot be replayed from the root triple alone.
    pub fn recheck(
        &self,
        ty: &Type,
        x: &Value<f64>,
        a: &Diff<f64>,
        x2: &Value<f64>,
        probes: &ProbeSet,
    ) -> Option<Result<bool, RelError>> {
        let mut state = (ty.clone(), x.clone(), a.clone(), x2.clone());
        for step in &self.trail {
            let next = match (step, &state.0) {
                (Step::Fst, Type::Prod(l, _)) => {
                    let (_, x, a, x2) = &state;
                    x.fst().and_then(|x| Ok(((**l).clone(), x.clone(), a.fst()?.clone(), x2.fst()?.clone())))
                }
                (Step::Snd, Type::Prod(_, r)) => {
                    let (_, x, a, x2) = &state;
                    x.snd().and_then(|x| Ok(((**r).clone(), x.clone(), a.snd()?.clone(), x2.snd()?.clone())))
                }
                (Step::Apply { probe, image, .. }, Type::Arrow(dom, cod)) => {
                    let p = match probes.at(dom) {
                        Ok(ps) => ps.get(*probe)?,
                        Err(e) => return Some(Err(e)),
                    };
                    let (_, f, a, f2) = &state;
                    let go = || {
                        let fy = f.apply(&p.x)?;
                        let d = a.apply(&p.x, &p.b)?;
                        let other = match image {
                            Image::Cross => f2.apply(&p.x2)?,
                            Image::Left => f.apply(&p.x2)?,
                            Image::Vertical => f2.apply(&p.x)?,
                            _ => unreachable!(),
                        };
                        Ok(((**cod).clone(), fy, d, other))
                    };
                    match image {
                        Image::Cross | Image::Left | Image::Vertical => go(),
                        _ => return None,
                    }
                }
                _ => return None,
            };
            state = match next {
                Ok(s) => s,
                Err(e) => return Some(Err(RelError::Eval(e))),
            };
        }
        let (ty, x, a, x2) = state;
        if ty != Type::Real {
            return None;
        }
        let go = || -> Result<bool, RelError> {
            let (x, x2) = (*x.as_real()?, *x2.as_real()?);
            let a = a.as_real()?.to_float();
            Ok(!within(x, a, x2, self.slack))
        };
        Some(go())
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated", self.relation)?;
        for s in &self.trail {
            write!(f, "; {s}")?;
        }
        write!(
            f,
            "; |{} − {}| = {} exceeds {}",
            self.left,
            self.right,
            (self.left - self.right).abs(),
            self.bound
        )
    }
}

/// The outcome of a probe-based membership check.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Falsified { witness: Box<Witness> },
    /// No probe refutes membership; `checks` Real-level comparisons passed.
    Consistent { checks: usize, depth: usize },
    /// Neither refuted nor supported, e.g. no η decomposition was found.
    Inconclusive { reason: String, checks: usize },
}

impl Verdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::Consistent { .. })
    }

    pub fn is_falsified(&self) -> bool {
        matches!(self, Verdict::Falsified { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Falsified { witness } => Some(witness),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Falsified { witness } => write!(f, "falsified: {witness}"),
            Verdict::Consistent { checks, depth } => {
                write!(f, "consistent up to probes ({checks} checks, depth {depth})")
            }
            Verdict::Inconclusive { reason, checks } => write!(f, "inconclusive after {checks} checks: {reason}"),
        }
    }
}
