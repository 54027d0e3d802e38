use std::sync::Arc;

use super::prim::{prim_eval, prim_modulus};
use super::value::{Diff, Env, Value};
use super::EvalError;
use crate::quantale::ExtNonNegReal;
use crate::scalar::Scalar;
use crate::syntax::Term;

/// `⟦t⟧` under `env`, call by value.
pub fn eval<S: Scalar>(env: &Env<Value<S>>, t: &Term) -> Result<Value<S>, EvalError> {
    match t {
        Term::Var(x) => env.lookup(x).cloned().ok_or_else(|| EvalError::Unbound(x.clone())),
        Term::Lit(r) => Ok(Value::Real(S::from_rational(r))),
        Term::Prim(p, args) => {
            let ys = args.iter().map(|a| eval(env, a)?.as_real().cloned()).collect::<Result<Vec<S>, _>>()?;
            prim_eval(p, &ys).map(Value::Real)
        }
        Term::App(f, a) => {
            let fv = eval(env, f)?;
            let av = eval(env, a)?;
            fv.apply(&av)
        }
        Term::Lam(x, _, body) => Ok(Value::Closure { env: env.clone(), param: x.clone(), body: body.clone() }),
        Term::Pair(a, b) => Ok(Value::pair(eval(env, a)?, eval(env, b)?)),
        Term::Fst(p) => Ok(eval(env, p)?.fst()?.clone()),
        Term::Snd(p) => Ok(eval(env, p)?.snd()?.clone()),
    }
}

/// `⟦t⟧•` at `(env, denv)`: the distance the output of `t` can move when
/// each variable `x` moves within `denv(x)` of `env(x)`.
pub fn diff_eval<S: Scalar>(env: &Env<Value<S>>, denv: &Env<Diff<S>>, t: &Term) -> Result<Diff<S>, EvalError> {
    match t {
        Term::Var(x) => denv.lookup(x).cloned().ok_or_else(|| EvalError::Unbound(x.clone())),
        Term::Lit(_) => Ok(Diff::Real(ExtNonNegReal::zero())),
        Term::Prim(p, args) => {
            let ys = args.iter().map(|a| eval(env, a)?.as_real().cloned()).collect::<Result<Vec<S>, _>>()?;
            let bs = args
                .iter()
                .map(|a| diff_eval(env, denv, a)?.as_real().cloned())
                .collect::<Result<Vec<_>, _>>()?;
            if p.is_modulus() {
                // no closed form for the modulus of a modulus: only the
                // degenerate box is bounded
                let zero = bs.iter().all(ExtNonNegReal::is_zero);
                return Ok(Diff::Real(if zero { ExtNonNegReal::zero() } else { ExtNonNegReal::infinity() }));
            }
            Ok(Diff::Real(prim_modulus(p.decl(), &ys, &bs)))
        }
        Term::App(f, a) => {
            let df = diff_eval(env, denv, f)?;
            let x = eval(env, a)?;
            let b = diff_eval(env, denv, a)?;
            df.apply(&x, &b)
        }
        Term::Lam(x, _, body) => {
            let (env, denv, x, body) = (env.clone(), denv.clone(), x.clone(), Arc::clone(body));
            Ok(Diff::fun(move |v, b| diff_eval(&env.bind(x.clone(), v.clone()), &denv.bind(x.clone(), b.clone()), &body)))
        }
        Term::Pair(a, b) => Ok(Diff::pair(diff_eval(env, denv, a)?, diff_eval(env, denv, b)?)),
        Term::Fst(p) => Ok(diff_eval(env, denv, p)?.fst()?.clone()),
        Term::Snd(p) => Ok(diff_eval(env, denv, p)?.snd()?.clone()),
    }
}

/// `⟦t⟧` of a closed term.
pub fn eval_closed<S: Scalar>(t: &Term) -> Result<Value<S>, EvalError> {
    eval(&Env::new(), t)
}

/// `⟦t⟧•` of a closed term.
pub fn diff_eval_closed<S: Scalar>(t: &Term) -> Result<Diff<S>, EvalError> {
    diff_eval(&Env::new(), &Env::new(), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn d(x: f64) -> Diff<f64> {
        Diff::Real(ExtNonNegReal::from_float(x).unwrap())
    }

    fn real(v: &Value<f64>) -> f64 {
        *v.as_real().unwrap()
    }

    #[test]
    fn evaluates_closed_terms() {
        assert_eq!(real(&eval_closed(&parse("(\\x:Real. x) 3.0").unwrap()).unwrap()), 3.0);
        assert_eq!(real(&eval_closed(&parse("fst (1, 2)").unwrap()).unwrap()), 1.0);
        let deps = parse("(\\f:Real->Real. \\x:Real. (f (x + 0.1) - f x) / 0.1) (\\y:Real. sin(y)) 0").unwrap();
        let v = real(&eval_closed(&deps).unwrap());
        assert!((v - 0.1f64.sin() / 0.1).abs() < 1e-12);
        assert!(eval_closed::<f64>(&parse("1 / 0").unwrap()).is_err());
    }

    #[test]
    fn difference_clauses() {
        let env = Env::new().bind("x", Value::Real(5.0));
        let denv = Env::new().bind("x", d(0.3));
        let v = diff_eval(&env, &denv, &parse("x").unwrap()).unwrap();
        assert_eq!(v.as_real().unwrap().to_float(), 0.3);
        let c = diff_eval(&env, &denv, &parse("7").unwrap()).unwrap();
        assert!(c.as_real().unwrap().is_zero());
    }

    #[test]
    fn derivative_program_difference_matches_closed_form() {
        let eps = 0.1;
        let deps = parse("\\f:Real->Real. \\x:Real. (f (x + 0.1) - f x) / 0.1").unwrap();
        let de = diff_eval_closed::<f64>(&deps).unwrap();
        let a = Diff::fun(|x: &Value<f64>, b: &Diff<f64>| {
            let x = *x.as_real()?;
            Ok(Diff::Real(ExtNonNegReal::abs_of(x - x.sin()).add(b.as_real()?)))
        });
        let sin = Value::real_fn("sin", |x: &f64| x.sin());
        for (x, b) in [(0.0, 0.1), (1.0, 0.5), (-2.0, 0.0)] {
            let got = de.apply(&sin, &a).unwrap().apply(&Value::Real(x), &d(b)).unwrap();
            let ax = |y: f64| (y - y.sin()).abs() + b;
            let expected = (ax(x + eps) + ax(x)) / eps;
            assert!((got.as_real().unwrap().to_float() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_carrier_agrees_with_float() {
        let t = parse("(\\x:Real. x * x + 3 * x) 0.5").unwrap();
        let exact = eval_closed::<num_rational::BigRational>(&t).unwrap();
        assert_eq!(exact.to_string(), "1.75");
        assert_eq!(real(&eval_closed(&t).unwrap()), 1.75);
    }
}
