use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use dlr_core::eqtheory::{check_derivation, conv, random_derivation, DeqConfig};
use dlr_core::quantale::{ClosedTernary, FiniteQuantale, QRel};
use dlr_core::relations::{check_eta, check_rho, generate_probes, ProbeConfig, ProbeSet, Verdict};
use dlr_core::semantics::{diff_eval_closed, eval_closed, prim_eval, prim_modulus, Diff, Value};
use dlr_core::syntax::normalize::normalize_with_fuel;
use dlr_core::syntax::random::{random_closed, random_term, GenConfig};
use dlr_core::syntax::{
    derivative_term, dot, normalize, partial_type, substitute, term_equal, typecheck, PrimRegistry, Term, Type,
    TypingContext,
};
use dlr_core::Distance;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gen(prims: &[&str], depth: usize) -> GenConfig {
    let reg = PrimRegistry::standard();
    GenConfig { max_depth: depth, ..GenConfig::new(prims.iter().map(|p| reg.prim(p)).collect()) }
}

fn closed(seed: u64, ty: &Type, cfg: &GenConfig) -> Term {
    random_closed(&mut ChaCha8Rng::seed_from_u64(seed), ty, cfg)
}

fn d(x: f64) -> Diff<f64> {
    Diff::Real(Distance::from_float(x).unwrap())
}

fn real(v: Value<f64>) -> f64 {
    *v.as_real().unwrap()
}

fn types() -> Vec<Type> {
    let f = Type::real_fn();
    vec![
        Type::Real,
        f.clone(),
        Type::prod(Type::Real, Type::Real),
        Type::arrow(f.clone(), Type::Real),
        Type::arrow(Type::Real, Type::prod(Type::Real, f.clone())),
        Type::arrow(Type::prod(Type::Real, Type::Real), Type::Real),
    ]
}

// ---- relations over a finite quantale -------------------------------------

fn chain4() -> FiniteQuantale {
    FiniteQuantale::builtin("chain4").unwrap()
}

fn qrel(entries: Vec<usize>) -> QRel<usize> {
    let points = Arc::new((0..3).map(|i| i.to_string()).collect::<Vec<_>>());
    QRel::with_points(points, entries).unwrap()
}

fn relation() -> impl Strategy<Value = QRel<usize>> {
    prop::collection::vec(0usize..4, 9).prop_map(qrel)
}

proptest! {
    #[test]
    fn relation_tensor_is_associative_and_unital(s in relation(), t in relation(), u in relation()) {
        let q = chain4();
        let left = s.tensor(&q, &t).unwrap().tensor(&q, &u).unwrap();
        let right = s.tensor(&q, &t.tensor(&q, &u).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        let one = QRel::identity(&q, s.points().clone());
        prop_assert_eq!(&one.tensor(&q, &s).unwrap(), &s);
        prop_assert_eq!(&s.tensor(&q, &one).unwrap(), &s);
    }

    #[test]
    fn observational_quasi_metrics(s in relation()) {
        let q = chain4();
        let (l, r) = (s.obs_quasi_left(&q), s.obs_quasi_right(&q));
        prop_assert!(l.is_reflexive(&q) && l.is_transitive(&q));
        prop_assert!(r.is_reflexive(&q) && r.is_transitive(&q));
        prop_assert!(l.tensor(&q, &s).unwrap().below(&q, &s));
        prop_assert!(s.tensor(&q, &r).unwrap().below(&q, &s));
    }

    #[test]
    fn closed_ternary_relations_are_in_bijection(s in relation()) {
        let q = chain4();
        let rho = ClosedTernary::of_relation(&q, &s);
        prop_assert!(rho.is_down_closed(&q));
        prop_assert!(rho.is_join_closed(&q));
        prop_assert_eq!(rho.hat(&q, s.points().clone()), s);
    }
}

// ---- syntax ----------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn normalization_preserves_types(seed in any::<u64>(), k in 0usize..6) {
        let ty = &types()[k];
        let t = closed(seed, ty, &gen(&["add", "mul", "sin", "cos", "sub"], 4));
        let n = normalize_with_fuel(&TypingContext::new(), &t, 1_000_000).unwrap();
        prop_assert_eq!(&typecheck(&TypingContext::new(), &n).unwrap(), ty);
    }

    #[test]
    fn derivatives_are_well_typed(seed in any::<u64>(), k in 0usize..6) {
        let mut ctx = TypingContext::new();
        ctx.push("x", Type::Real);
        ctx.push("f", Type::real_fn());
        ctx.push("p", Type::prod(Type::Real, Type::Real));
        let ty = &types()[k];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_term(&mut rng, &ctx, ty, &gen(&["add", "mul", "sin", "div", "abs"], 4));
        let dt = derivative_term(&ctx, &t).unwrap();
        prop_assert_eq!(typecheck(&ctx.with_partial(), &dt).unwrap(), partial_type(ty));
    }

    /// `∂(t[s/x]) = (∂t)[s/x, ∂s/ẋ]` on closed first-order instances.
    #[test]
    fn derivative_commutes_with_substitution(seed in any::<u64>(), s_seed in any::<u64>()) {
        let cfg = gen(&["add", "mul", "sin", "cos", "sub", "abs"], 3);
        let ctx = TypingContext::new().extended("x", Type::Real);
        let t = random_term(&mut ChaCha8Rng::seed_from_u64(seed), &ctx, &Type::Real, &cfg);
        let s = closed(s_seed, &Type::Real, &cfg);
        let lhs = derivative_term(&TypingContext::new(), &substitute(&t, &BTreeMap::from([("x".into(), s.clone())]))).unwrap();
        let ds = derivative_term(&TypingContext::new(), &s).unwrap();
        let dt = derivative_term(&ctx, &t).unwrap();
        let rhs = substitute(&dt, &BTreeMap::from([("x".into(), s), (dot("x"), ds)]));
        prop_assert!(term_equal(&TypingContext::new(), &lhs, &rhs).unwrap(), "{} vs {}", lhs, rhs);
        prop_assert!(normalize(&TypingContext::new(), &lhs).unwrap().as_lit().is_some());
    }
}

// ---- semantics -------------------------------------------------------------

fn first_order() -> GenConfig {
    gen(&["add", "mul", "sin", "cos", "sub", "abs", "pi"], 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fundamental_lemma_at_first_order(seed in any::<u64>(), x in -10.0f64..10.0, b in 0.0f64..1.0, u in -1.0f64..1.0) {
        let t = closed(seed, &Type::real_fn(), &first_order());
        let (f, df) = (eval_closed::<f64>(&t).unwrap(), diff_eval_closed::<f64>(&t).unwrap());
        let x2 = x + u * b;
        let (y, y2) = (real(f.apply(&Value::Real(x)).unwrap()), real(f.apply(&Value::Real(x2)).unwrap()));
        let bound = df.apply(&Value::Real(x), &d(b)).unwrap().as_real().unwrap().to_float();
        prop_assert!((y - y2).abs() <= bound + 1e-9 * (1.0 + y.abs() + y2.abs()), "{}: |{} - {}| > {}", t, y, y2, bound);
    }

    #[test]
    fn distances_are_monotone_in_the_input_error(seed in any::<u64>(), x in -10.0f64..10.0, b in 0.0f64..1.0, e in 0.0f64..1.0) {
        let t = closed(seed, &Type::real_fn(), &first_order());
        let df = diff_eval_closed::<f64>(&t).unwrap();
        let at = |b: f64| df.apply(&Value::Real(x), &d(b)).unwrap().as_real().unwrap().to_float();
        prop_assert!(at(b) <= at(b + e), "{}", t);
    }

    #[test]
    fn zero_error_gives_zero_distance(seed in any::<u64>(), x in -10.0f64..10.0) {
        let t = closed(seed, &Type::real_fn(), &first_order());
        let df = diff_eval_closed::<f64>(&t).unwrap();
        prop_assert_eq!(df.apply(&Value::Real(x), &d(0.0)).unwrap().as_real().unwrap().to_float(), 0.0);
    }

    #[test]
    fn primitive_moduli_bound_the_box(k in 0usize..6, y0 in -5.0f64..5.0, y1 in -5.0f64..5.0, b0 in 0.0f64..1.0, b1 in 0.0f64..1.0) {
        let reg = PrimRegistry::standard();
        let name = ["add", "sub", "mul", "div", "sin", "cos"][k];
        let p = reg.prim(name);
        let (y, b) = if p.arity() == 1 { (vec![y0], vec![b0]) } else { (vec![y0, y1], vec![b0, b1]) };
        let Ok(fy) = prim_eval(&p, &y) else { return Ok(()) };
        let m = prim_modulus(p.decl(), &y, &b.iter().map(|&e| Distance::from_float(e).unwrap()).collect::<Vec<_>>());
        let m = m.to_float();
        const STEPS: usize = 16;
        for i in 0..=STEPS {
            for j in 0..=if y.len() == 1 { 0 } else { STEPS } {
                let z: Vec<f64> = [i, j].iter().zip(y.iter().zip(&b)).map(|(&k, (&c, &r))| c - r + 2.0 * r * k as f64 / STEPS as f64).collect();
                if let Ok(fz) = prim_eval(&p, &z) {
                    prop_assert!((fy - fz).abs() <= m + 1e-9 * (1.0 + fy.abs() + fz.abs()), "{} at {:?}: {} > {}", name, z, (fy - fz).abs(), m);
                }
            }
        }
    }
}

// ---- relations -------------------------------------------------------------

fn probes() -> &'static ProbeSet {
    static P: OnceLock<ProbeSet> = OnceLock::new();
    P.get_or_init(|| {
        let cfg = ProbeConfig { real_count: 40, function_count: 4, ..ProbeConfig::default() };
        generate_probes(&Type::real_fn(), cfg).unwrap()
    })
}

/// `(f, ∂f + k, f + c)` for a random first-order `f`.
fn shifted(seed: u64, k: f64, c: f64) -> (Value<f64>, Diff<f64>, Value<f64>) {
    let t = closed(seed, &Type::real_fn(), &first_order());
    let shifted = Term::lam("z", Type::Real, Term::prim(PrimRegistry::standard().prim("add"), vec![
        Term::app(t.clone(), Term::var("z")),
        Term::lit(BigRational::from_float(c).unwrap()),
    ]));
    let df = diff_eval_closed::<f64>(&t).unwrap();
    let a = Diff::fun(move |x, b| {
        let base = df.apply(x, b)?.as_real()?.to_float();
        Ok(d(base + k))
    });
    (eval_closed(&t).unwrap(), a, eval_closed(&shifted).unwrap())
}

fn accepted(v: &Verdict) -> bool {
    v.is_consistent()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rho_is_quasi_reflexive_and_down_closed(seed in any::<u64>(), k in 0.0f64..2.0, c in -2.0f64..2.0, extra in 0.0f64..1.0) {
        let ty = Type::real_fn();
        let (f, a, g) = shifted(seed, k, c);
        let v = check_rho(&ty, &f, &a, &g, probes()).unwrap();
        prop_assert_eq!(accepted(&v), c.abs() <= k, "{}", v);
        if accepted(&v) {
            prop_assert!(accepted(&check_rho(&ty, &f, &a, &f, probes()).unwrap()));
            let a2 = a.tensor(&Diff::fun(move |_, _| Ok(d(extra)))).unwrap();
            prop_assert!(accepted(&check_rho(&ty, &f, &a2, &g, probes()).unwrap()));
        }
    }

    #[test]
    fn falsifications_carry_genuine_witnesses(seed in any::<u64>(), k in 0.0f64..1.0, c in -2.0f64..2.0) {
        let (f, a, g) = shifted(seed, k, c);
        for v in [check_rho(&Type::real_fn(), &f, &a, &g, probes()).unwrap(), check_eta(&Type::real_fn(), &f, &a, &g, probes(), None).unwrap()] {
            if let Some(w) = v.witness() {
                prop_assert!(w.violates(), "{}", w);
            }
        }
    }

    #[test]
    fn eta_self_triples(seed in any::<u64>(), k in 0.0f64..2.0, c in -2.0f64..2.0) {
        let ty = Type::real_fn();
        let (f, a, g) = shifted(seed, k, c);
        if accepted(&check_eta(&ty, &f, &a, &g, probes(), None).unwrap()) {
            prop_assert!(accepted(&check_eta(&ty, &f, &a, &f, probes(), None).unwrap()));
        }
    }

    #[test]
    fn rho_is_transitive_at_real(x in -1e3f64..1e3, y in -1e3f64..1e3, z in -1e3f64..1e3) {
        let (a, b) = ((x - z).abs(), (z - y).abs());
        let r = |u: f64, e: f64, v: f64| check_rho(&Type::Real, &Value::Real(u), &d(e), &Value::Real(v), probes()).unwrap();
        prop_assert!(accepted(&r(x, a, z)) && accepted(&r(z, b, y)));
        prop_assert!(accepted(&r(x, a + b, y)));
    }
}

// ---- derivations -----------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesized_derivations_validate(seed in any::<u64>()) {
        let d = random_derivation(&mut ChaCha8Rng::seed_from_u64(seed), &DeqConfig::default());
        prop_assert!(check_derivation(&d).is_ok(), "{}", d.conclusion);
        let c = &d.conclusion;
        for t in [&c.t, &c.t2] {
            prop_assert_eq!(&typecheck(&c.ctx, t).unwrap(), &c.ty);
        }
        prop_assert_eq!(typecheck(&c.ctx.with_partial(), &c.a).unwrap(), partial_type(&c.ty));
    }

    /// Replacing a subject by a β-expanded copy and converting back is valid.
    #[test]
    fn conversion_accepts_equal_subjects(seed in any::<u64>(), which in 0usize..3) {
        let d = random_derivation(&mut ChaCha8Rng::seed_from_u64(seed), &DeqConfig::default());
        let c = d.conclusion.clone();
        let expand = |t: &Term| Term::app(Term::lam("unused", Type::Real, t.clone()), Term::int(0));
        let (mut t, mut a, mut t2) = (c.t.clone(), c.a.clone(), c.t2.clone());
        match which {
            0 => t = expand(&t),
            1 => a = expand(&a),
            _ => t2 = expand(&t2),
        }
        let e = conv(d, t, a, t2);
        prop_assert!(check_derivation(&e).is_ok());
    }
}
