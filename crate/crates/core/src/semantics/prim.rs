//! Primitive evaluation and the modulus `φ^d(y, b) = sup { |φ(y) - φ(z)| : |z_i - y_i| <= b_i }`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::EvalError;
use crate::interval::Interval;
use crate::quantale::ExtNonNegReal;
use crate::scalar::Scalar;
use crate::syntax::prim::{ModulusRule, PrimKind, PrimRef, PrimitiveDecl};

fn domain(p: &str, message: impl Into<String>) -> EvalError {
    EvalError::Domain { prim: p.to_string(), message: message.into() }
}

/// `φ(args)`, or `φ^d(y, b)` when `p` is a modulus. A modulus whose value is
/// `∞`, or whose error arguments are negative, has no real value.
pub fn prim_eval<S: Scalar>(p: &PrimRef, args: &[S]) -> Result<S, EvalError> {
    if args.len() != p.arity() {
        return Err(EvalError::Arity { prim: p.name(), expected: p.arity(), found: args.len() });
    }
    let decl = p.decl();
    if p.is_modulus() {
        let n = decl.arity();
        let (y, b) = args.split_at(n);
        let b: Vec<ExtNonNegReal<S>> = b
            .iter()
            .map(|v| ExtNonNegReal::new(v.clone()).ok_or_else(|| domain(&p.name(), "negative error argument")))
            .collect::<Result<_, _>>()?;
        return prim_modulus(decl, y, &b).finite().cloned().ok_or_else(|| domain(&p.name(), "unbounded modulus"));
    }
    let name = decl.name();
    Ok(match decl.kind() {
        PrimKind::Add => args[0].clone() + args[1].clone(),
        PrimKind::Sub => args[0].clone() - args[1].clone(),
        PrimKind::Mul => args[0].clone() * args[1].clone(),
        PrimKind::Div => {
            if args[1].is_zero() {
                return Err(domain(name, "division by zero"));
            }
            args[0].clone() / args[1].clone()
        }
        PrimKind::Sin => args[0].sin(),
        PrimKind::Cos => args[0].cos(),
        PrimKind::Abs => args[0].abs(),
        PrimKind::Const(r) => S::from_rational(r),
        PrimKind::Custom { eval, .. } => {
            let xs: Vec<f64> = args.iter().map(Scalar::to_float).collect();
            let y = eval(&xs).ok_or_else(|| domain(name, "argument outside the domain"))?;
            S::from_float(y).ok_or_else(|| domain(name, "non-finite result"))?
        }
    })
}

/// The modulus of `decl` at `y` with error radii `b`. Exact for the built-in
/// primitives and for analytic user moduli; a sound over-approximation for
/// Lipschitz and interval rules.
pub fn prim_modulus<S: Scalar>(decl: &PrimitiveDecl, y: &[S], b: &[ExtNonNegReal<S>]) -> ExtNonNegReal<S> {
    if b.iter().all(ExtNonNegReal::is_zero) {
        return ExtNonNegReal::zero();
    }
    match decl.kind() {
        PrimKind::Add | PrimKind::Sub => b[0].add(&b[1]),
        PrimKind::Mul => {
            let a0 = ExtNonNegReal::abs_of(y[0].clone());
            let a1 = ExtNonNegReal::abs_of(y[1].clone());
            a0.mul(&b[1]).add(&a1.mul(&b[0])).add(&b[0].mul(&b[1]))
        }
        PrimKind::Div => div_modulus(y, b),
        PrimKind::Sin => trig_modulus(&y[0], &b[0], FRAC_PI_2, -FRAC_PI_2, S::sin),
        PrimKind::Cos => trig_modulus(&y[0], &b[0], 0.0, PI, S::cos),
        PrimKind::Abs => b[0].clone(),
        PrimKind::Const(_) => ExtNonNegReal::zero(),
        PrimKind::Custom { eval, modulus } => custom_modulus(eval.as_ref(), modulus, y, b),
    }
}

fn div_modulus<S: Scalar>(y: &[S], b: &[ExtNonNegReal<S>]) -> ExtNonNegReal<S> {
    let (Some(b0), Some(b1)) = (b[0].finite(), b[1].finite()) else {
        return ExtNonNegReal::infinity();
    };
    if *b1 >= y[1].abs() {
        return ExtNonNegReal::infinity();
    }
    // z₁/z₂ is monotone in each argument on a box avoiding z₂ = 0
    let f = y[0].clone() / y[1].clone();
    let mut best = ExtNonNegReal::zero();
    for z0 in [y[0].clone() - b0.clone(), y[0].clone() + b0.clone()] {
        for z1 in [y[1].clone() - b1.clone(), y[1].clone() + b1.clone()] {
            best = best.num_max(ExtNonNegReal::abs_of(f.clone() - z0.clone() / z1));
        }
    }
    best
}

// sin and cos: the image of [y - b, y + b] is bounded by the endpoint values
// and by ±1 at any critical point inside; `max_at`/`min_at` are the phases of
// the maxima and minima modulo 2π.
fn trig_modulus<S: Scalar>(
    y: &S,
    b: &ExtNonNegReal<S>,
    max_at: f64,
    min_at: f64,
    f: impl Fn(&S) -> S,
) -> ExtNonNegReal<S> {
    let fy = f(y);
    let Some(b) = b.finite() else {
        return ExtNonNegReal::abs_of(fy).add(&ExtNonNegReal::new(S::one()).expect("positive"));
    };
    let lo = y.clone() - b.clone();
    let hi = y.clone() + b.clone();
    let mut best = ExtNonNegReal::abs_of(fy.clone() - f(&lo)).num_max(ExtNonNegReal::abs_of(fy.clone() - f(&hi)));
    let (lo_f, hi_f) = (lo.to_float(), hi.to_float());
    let slack = 1e-12 * (1.0 + lo_f.abs().max(hi_f.abs()));
    let hits = |phase: f64| {
        let k = ((lo_f - slack - phase) / TAU).ceil();
        phase + k * TAU <= hi_f + slack
    };
    if hits(max_at) {
        best = best.num_max(ExtNonNegReal::abs_of(S::one() - fy.clone()));
    }
    if hits(min_at) {
        best = best.num_max(ExtNonNegReal::abs_of(fy + S::one()));
    }
    best
}

fn custom_modulus<S: Scalar>(
    eval: &(dyn Fn(&[f64]) -> Option<f64> + Send + Sync),
    rule: &ModulusRule,
    y: &[S],
    b: &[ExtNonNegReal<S>],
) -> ExtNonNegReal<S> {
    match rule {
        ModulusRule::Analytic(m) => {
            let yf: Vec<f64> = y.iter().map(Scalar::to_float).collect();
            let bf: Vec<f64> = b.iter().map(ExtNonNegReal::to_float).collect();
            ExtNonNegReal::from_float(m(&yf, &bf)).unwrap_or_else(ExtNonNegReal::infinity)
        }
        ModulusRule::Lipschitz(ls) => ls.iter().zip(b).fold(ExtNonNegReal::zero(), |acc, (l, bi)| {
            let l = ExtNonNegReal::from_float(l.abs()).unwrap_or_else(ExtNonNegReal::infinity);
            acc.add(&l.mul(bi))
        }),
        ModulusRule::Interval(ext) => {
            if b.iter().any(ExtNonNegReal::is_infinite) {
                return ExtNonNegReal::infinity();
            }
            let boxes: Vec<Interval> =
                y.iter().zip(b).map(|(yi, bi)| Interval::ball(yi.to_float(), bi.to_float())).collect();
            let yf: Vec<f64> = y.iter().map(Scalar::to_float).collect();
            let (Some(range), Some(fy)) = (ext(&boxes), eval(&yf)) else {
                return ExtNonNegReal::infinity();
            };
            let spread = (range.hi() - fy).max(fy - range.lo()).next_up();
            ExtNonNegReal::from_float(spread.max(0.0)).unwrap_or_else(ExtNonNegReal::infinity)
        }
        ModulusRule::Unknown => ExtNonNegReal::infinity(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::prim::PrimRegistry;
    use num_rational::BigRational;

    fn d(x: f64) -> ExtNonNegReal<f64> {
        ExtNonNegReal::from_float(x).unwrap()
    }

    // sup over a fine grid of the box, the independent oracle for the moduli
    fn grid_sup(f: impl Fn(&[f64]) -> Option<f64>, y: &[f64], b: &[f64], steps: usize) -> f64 {
        let fy = f(y).unwrap();
        let mut best: f64 = 0.0;
        let n = y.len();
        let total = (steps + 1).pow(n as u32);
        for idx in 0..total {
            let mut rest = idx;
            let z: Vec<f64> = (0..n)
                .map(|i| {
                    let k = rest % (steps + 1);
                    rest /= steps + 1;
                    y[i] - b[i] + 2.0 * b[i] * k as f64 / steps as f64
                })
                .collect();
            if let Some(fz) = f(&z) {
                best = best.max((fy - fz).abs());
            }
        }
        best
    }

    #[test]
    fn add_modulus_matches_grid() {
        let r = PrimRegistry::standard();
        let m = prim_modulus(r.get("add").unwrap(), &[1.0, -2.0], &[d(0.3), d(0.2)]);
        assert!((m.to_float() - 0.5).abs() < 1e-12);
        let g = grid_sup(|z| Some(z[0] + z[1]), &[1.0, -2.0], &[0.3, 0.2], 20);
        assert!((g - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sin_modulus_at_zero() {
        let r = PrimRegistry::standard();
        let m = prim_modulus(r.get("sin").unwrap(), &[0.0], &[d(0.1)]).to_float();
        assert!((m - 0.1f64.sin()).abs() < 1e-15);
        let g = grid_sup(|z| Some(z[0].sin()), &[0.0], &[0.1], 2000);
        assert!((m - g).abs() < 1e-12);
    }

    #[test]
    fn zero_radius_gives_zero() {
        let r = PrimRegistry::standard();
        for name in ["add", "mul", "div", "sin", "cos", "abs"] {
            let decl = r.get(name).unwrap();
            let y = vec![1.5; decl.arity()];
            let b = vec![d(0.0); decl.arity()];
            assert!(prim_modulus(decl, &y, &b).is_zero(), "{name}");
        }
    }

    #[test]
    fn unbounded_radius() {
        let r = PrimRegistry::standard();
        let inf = ExtNonNegReal::<f64>::infinity();
        assert!(prim_modulus(r.get("add").unwrap(), &[0.0, 0.0], &[inf.clone(), d(0.0)]).is_infinite());
        let s = prim_modulus(r.get("sin").unwrap(), &[1.0], std::slice::from_ref(&inf)).to_float();
        assert!((s - (1.0 + 1f64.sin())).abs() < 1e-15);
        assert!(prim_modulus(r.get("div").unwrap(), &[1.0, 0.5], &[d(0.0), d(0.5)]).is_infinite());
    }

    #[test]
    fn exact_modulus_in_rationals() {
        let r = PrimRegistry::standard();
        let q = |x: f64| BigRational::from_float(x).unwrap();
        let b = ExtNonNegReal::new(q(0.25)).unwrap();
        let m = prim_modulus(r.get("mul").unwrap(), &[q(2.0), q(-3.0)], &[b.clone(), b]);
        assert_eq!(m.finite().cloned(), Some(q(2.0 * 0.25 + 3.0 * 0.25 + 0.0625)));
    }

    #[test]
    fn modulus_as_term_level_primitive() {
        let r = PrimRegistry::standard();
        let sd = r.prim("sin_d");
        assert!((prim_eval(&sd, &[0.0, 0.1]).unwrap() - 0.1f64.sin()).abs() < 1e-15);
        assert!(prim_eval(&sd, &[0.0, -0.1]).is_err());
        assert!(prim_eval(&r.prim("div"), &[1.0, 0.0]).is_err());
    }

    #[test]
    fn custom_rules() {
        let sq = PrimitiveDecl::custom("sq", 1, |x| Some(x[0] * x[0]), ModulusRule::Interval(std::sync::Arc::new(|b: &[Interval]| Some(b[0] * b[0]))));
        let m = prim_modulus(&sq, &[1.0], &[d(0.5)]).to_float();
        let g = grid_sup(|z| Some(z[0] * z[0]), &[1.0], &[0.5], 1000);
        assert!(m >= g && m < g + 1e-9);
        let lip = PrimitiveDecl::custom("half", 1, |x| Some(x[0] / 2.0), ModulusRule::Lipschitz(vec![0.5]));
        assert_eq!(prim_modulus(&lip, &[3.0], &[d(1.0)]).to_float(), 0.5);
        let unk = PrimitiveDecl::custom("u", 1, |x| Some(x[0]), ModulusRule::Unknown);
        assert!(prim_modulus(&unk, &[3.0], &[d(1.0)]).is_infinite());
    }
}
