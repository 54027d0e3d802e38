use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use super::probes::ProbeSet;
use super::RelError;
use crate::quantale::ExtNonNegReal;
use crate::semantics::{diff_eval, Diff, EvalError, Value};
use crate::syntax::Type;

/// Where a self-distance estimate comes from, from most to least trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Exactly `0`, at `Real`.
    Exact,
    /// `⟦t⟧•` of the term a closure was built from; valid everywhere.
    FundamentalLemma,
    /// Sup of the observed gaps over sample points and the probe partners;
    /// valid at the probes, possibly an over-claim elsewhere.
    Sampled,
    /// The bottom element, `∞` everywhere.
    Trivial,
}

/// A self-distance `a` with `(x, a, x)` in ρ at the probes.
#[derive(Clone)]
pub struct SelfDistanceEstimate {
    pub ty: Type,
    pub diff: Diff<f64>,
    pub provenance: Provenance,
}

/// Interior sample points per ball used by sampled estimates.
const SAMPLES: usize = 33;

pub fn estimate_self_distance(ty: &Type, x: &Value<f64>, probes: &ProbeSet) -> Result<SelfDistanceEstimate, RelError> {
    let (diff, provenance) = match ty {
        Type::Real => {
            x.as_real()?;
            (Diff::Real(ExtNonNegReal::zero()), Provenance::Exact)
        }
        Type::Prod(a, b) => {
            let l = estimate_self_distance(a, x.fst()?, probes)?;
            let r = estimate_self_distance(b, x.snd()?, probes)?;
            (Diff::pair(l.diff, r.diff), l.provenance.max(r.provenance))
        }
        Type::Arrow(a, b) => {
            if let Some(d) = closure_self_diff(x) {
                (d, Provenance::FundamentalLemma)
            } else if **a == Type::Real && **b == Type::Real {
                let partners = partners(probes);
                let f = x.clone();
                let d = Diff::fun(move |y, c| {
                    let y = *y.as_real()?;
                    let c = c.as_real()?.to_float();
                    let fy = *f.apply(&Value::Real(y))?.as_real()?;
                    sup_over_ball(y, c, &partners, |z| Ok((fy - f.apply(&Value::Real(z))?.as_real()?).abs()))
                });
                (d, Provenance::Sampled)
            } else {
                (Diff::infinite(ty), Provenance::Trivial)
            }
        }
    };
    Ok(SelfDistanceEstimate { ty: ty.clone(), diff, provenance })
}

/// The vertical distance `v·y·b = sup |f·z − f′·z|` over `z` in the ball
/// around `y`, sampled and including the probe partners of `(y, b)`.
/// Only first-order `Real ⇒ Real` functions are supported.
pub fn vertical_distance(ty: &Type, f: &Value<f64>, f2: &Value<f64>, probes: &ProbeSet) -> Option<Diff<f64>> {
    if *ty != Type::real_fn() {
        return None;
    }
    let partners = partners(probes);
    let (f, f2) = (f.clone(), f2.clone());
    Some(Diff::fun(move |y, c| {
        let y = *y.as_real()?;
        let c = c.as_real()?.to_float();
        sup_over_ball(y, c, &partners, |z| {
            let z = Value::Real(z);
            Ok((f.apply(&z)?.as_real()? - f2.apply(&z)?.as_real()?).abs())
        })
    }))
}

type Partners = Arc<HashMap<(u64, u64), Vec<f64>>>;

fn partners(probes: &ProbeSet) -> Partners {
    let mut map: HashMap<(u64, u64), Vec<f64>> = HashMap::new();
    if let Ok(ps) = probes.at(&Type::Real) {
        for p in ps {
            if let (Ok(x), Ok(b), Ok(x2)) = (p.x.as_real(), p.b.as_real(), p.x2.as_real()) {
                map.entry((x.to_bits(), b.to_float().to_bits())).or_default().push(*x2);
            }
        }
    }
    Arc::new(map)
}

fn sup_over_ball(
    y: f64,
    c: f64,
    partners: &Partners,
    gap: impl Fn(f64) -> Result<f64, EvalError>,
) -> Result<Diff<f64>, EvalError> {
    if c.is_infinite() {
        return Ok(Diff::Real(ExtNonNegReal::infinity()));
    }
    let mut sup = gap(y)?;
    for i in 0..SAMPLES {
        let z = (y - c) + 2.0 * c * i as f64 / (SAMPLES - 1) as f64;
        sup = sup.max(gap(z.clamp(y - c, y + c))?);
    }
    if let Some(zs) = partners.get(&(y.to_bits(), c.to_bits())) {
        for &z in zs {
            sup = sup.max(gap(z)?);
        }
    }
    Ok(Diff::Real(ExtNonNegReal::from_float(sup).unwrap_or_else(ExtNonNegReal::infinity)))
}

/// `⟦λx.t⟧•` for a closure, with every captured value paired with its own
/// self-distance. Native functions have no term and give `None`.
fn closure_self_diff(v: &Value<f64>) -> Option<Diff<f64>> {
    match v {
        Value::Closure { env, param, body } => {
            let denv = env.try_map(value_self_diff)?;
            let (env, param, body) = (env.clone(), param.clone(), body.clone());
            Some(Diff::fun(move |x, b| {
                diff_eval(&env.bind(param.clone(), x.clone()), &denv.bind(param.clone(), b.clone()), &body)
            }))
        }
        _ => None,
    }
}

fn value_self_diff(v: &Value<f64>) -> Option<Diff<f64>> {
    match v {
        Value::Real(_) => Some(Diff::Real(ExtNonNegReal::zero())),
        Value::Pair(a, b) => Some(Diff::pair(value_self_diff(a)?, value_self_diff(b)?)),
        Value::Closure { .. } => closure_self_diff(v),
        Value::Native { .. } => None,
    }
}
