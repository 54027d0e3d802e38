//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::fs;
use std::panic;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dlr_core::eqtheory::{check_prop_deq, DeqConfig};
use dlr_core::quantale::{check_section3_props, FiniteQuantale, Quantale};
use dlr_core::relations::{check_theorem_approx, generate_probes, ProbeConfig};
use dlr_core::semantics::{diff_eval_closed, eval_closed, Diff, Value};
use dlr_core::syntax::random::{random_closed, GenConfig};
use dlr_core::syntax::{derivative_term, parse_definitions, PrimRegistry, Term, Type, TypingContext};
use dlr_core::{ExactDistance, Lawvere, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn deps(eps: &str) -> Vec<(String, Term)> {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", "deps.lam"].iter().collect();
    let text = fs::read_to_string(path).expect("data/deps.lam");
    let text: String = text
        .lines()
        .map(|l| if l.starts_with("eps =") { format!("eps = {eps}\n") } else { format!("{l}\n") })
        .collect();
    parse_definitions(&text, &PrimRegistry::standard()).expect("deps.lam parses").into_iter().map(|d| (d.name, d.term)).collect()
}

fn def<'a>(defs: &'a [(String, Term)], name: &str) -> &'a Term {
    &defs.iter().find(|(n, _)| n == name).unwrap_or_else(|| panic!("no `{name}`")).1
}

fn real<S: Scalar>(v: &Value<S>) -> S {
    v.as_real().expect("a real").clone()
}

fn diff_real<S: Scalar>(d: &Diff<S>) -> S {
    d.as_real().expect("a real distance").finite().expect("a finite distance").clone()
}

/// `a′` of the finite-difference example: `⟦D⟧•` applied to the id/sine
/// triple, at `(x, b)`.
fn a_prime<S: Scalar>(defs: &[(String, Term)], x: S, b: S) -> S {
    let dd = diff_eval_closed::<S>(def(defs, "D")).unwrap();
    let id = eval_closed::<S>(def(defs, "id")).unwrap();
    let a = Diff::from_value(&Type::real_fn(), &eval_closed::<S>(def(defs, "idsin")).unwrap()).unwrap();
    let at = dd.apply(&id, &a).unwrap();
    diff_real(&at.apply(&Value::Real(x), &Diff::Real(dlr_core::ExtNonNegReal::new(b).unwrap())).unwrap())
}

fn criterion_1() -> Outcome {
    let defs = deps("0.1");
    let got = a_prime::<f64>(&defs, 0.0, 0.1);
    let oracle = ((0.1f64 - 0.1f64.sin()).abs() + (0.0f64 - 0.0f64.sin()).abs() + 0.2) / 0.1;
    ensure((got - oracle).abs() < 1e-9, || format!("a'·0·0.1 = {got}, expected {oracle}"))?;
    ensure((got - 2.0016658335317183).abs() < 1e-9, || format!("a'·0·0.1 = {got}"))?;

    let apply = |f: &str, x: f64| {
        let t = Term::app(def(&defs, f).clone(), Term::lit(BigRational::from_float(x).unwrap()));
        real(&eval_closed::<f64>(&t).unwrap())
    };
    let gap = (apply("Did", 0.0) - apply("Dsin", 0.1)).abs();
    let oracle = (1.0 - (0.2f64.sin() - 0.1f64.sin()) / 0.1).abs();
    ensure((gap - oracle).abs() < 1e-9, || format!("|D id 0 - D sin 0.1| = {gap}, expected {oracle}"))?;
    ensure((gap - 0.011640858517669384).abs() < 1e-9, || format!("gap {gap}"))?;
    Ok(format!("a'·0·0.1 = {got:.12}, |D id 0 - D sin 0.1| = {gap:.12}"))
}

fn criterion_2() -> Outcome {
    let mut shown = Vec::new();
    for eps in ["0.1", "0.01", "0.5"] {
        let defs = deps(eps);
        let e = dlr_core::scalar::parse_decimal(eps).unwrap();
        let zero = BigRational::from_integer(BigInt::from(0));
        let bound = (&e - e.sin()).abs() / &e;
        let reported = a_prime::<BigRational>(&defs, zero.clone(), zero.clone());
        ensure(reported <= bound, || format!("eps {eps}: a'·0·0 = {reported} exceeds {bound}"))?;
        let at0 = |f: &str| real(&eval_closed::<BigRational>(&Term::app(def(&defs, f).clone(), Term::lit(zero.clone()))).unwrap());
        let actual = (at0("Did") - at0("Dsin")).abs();
        ensure(actual <= bound, || format!("eps {eps}: |D id 0 - D sin 0| = {actual} exceeds {bound}"))?;
        shown.push(format!("eps {eps}: {:.3e} <= {:.3e}", reported.to_float(), bound.to_float()));
    }
    Ok(shown.join(", "))
}

fn criterion_3() -> Outcome {
    let cfg = ProbeConfig { real_count: 1000, range: (-10.0, 10.0), max_error: 1.0, ..ProbeConfig::default() };
    let ty = Type::real_fn();
    let probes = generate_probes(&ty, cfg).map_err(|e| e.to_string())?;
    let id = Value::real_fn("id", |x: &f64| *x);
    let sin = Value::real_fn("sin", |x: &f64| x.sin());
    let dist = |f: fn(f64, f64) -> f64| {
        Diff::fun(move |x, b| {
            let (x, b) = (*x.as_real()?, b.as_real()?.to_float());
            Ok(Diff::Real(dlr_core::Distance::from_float(f(x, b)).unwrap()))
        })
    };
    let a = dist(|x, _| (x - x.sin()).abs());
    let a2 = dist(|_, b| b);
    let v = check_theorem_approx(&Type::Real, &id, &sin, &a, &a2, &probes).map_err(|e| e.to_string())?;
    ensure(v.is_consistent(), || format!("theorem check: {v}"))?;

    let reals = probes.at(&Type::Real).map_err(|e| e.to_string())?;
    ensure(reals.len() >= 1000, || format!("only {} probes", reals.len()))?;
    let mut grid_points = 0usize;
    for p in reals {
        let x = *p.x.as_real().unwrap();
        let b = p.b.as_real().unwrap().to_float();
        ensure((-10.0..=10.0).contains(&x) && (0.0..=1.0).contains(&b), || format!("probe ({x}, {b}) out of range"))?;
        let bound = (x - x.sin()).abs() + b;
        for k in 0..=64 {
            let y = x - b + 2.0 * b * k as f64 / 64.0;
            grid_points += 1;
            let gap = (x - y.sin()).abs();
            ensure(gap <= bound + 1e-12, || format!("|{x} - sin {y}| = {gap} exceeds {bound}"))?;
        }
    }
    Ok(format!("{v}; {} probes, {grid_points} grid comparisons", reals.len()))
}

fn first_order_gen(prims: &[&str]) -> GenConfig {
    let reg = PrimRegistry::standard();
    GenConfig::new(prims.iter().map(|p| reg.prim(p)).collect())
}

fn criterion_4() -> Outcome {
    let cfg = first_order_gen(&["add", "mul", "sin", "pi"]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ty = Type::real_fn();
    let mut comparisons = 0;
    for _ in 0..500 {
        let t = random_closed(&mut rng, &ty, &cfg);
        let f = eval_closed::<f64>(&t).map_err(|e| format!("{t}: {e}"))?;
        let df = diff_eval_closed::<f64>(&t).map_err(|e| format!("{t}: {e}"))?;
        for _ in 0..20 {
            let x: f64 = rng.gen_range(-10.0..=10.0);
            let b: f64 = rng.gen_range(0.0..=1.0);
            let x2 = match rng.gen_range(0..4) {
                0 => x - b,
                1 => x + b,
                _ => rng.gen_range(x - b..=x + b),
            };
            let y = real(&f.apply(&Value::Real(x)).unwrap());
            let y2 = real(&f.apply(&Value::Real(x2)).unwrap());
            let bound = df.apply(&Value::Real(x), &Diff::Real(dlr_core::Distance::from_float(b).unwrap())).unwrap();
            let bound = bound.as_real().unwrap().to_float();
            let slack = 1e-9 * (1.0 + y.abs() + y2.abs());
            ensure((y - y2).abs() <= bound + slack, || format!("{t} at ({x}, {b}, {x2}): |{y} - {y2}| > {bound}"))?;
            comparisons += 1;
        }
    }
    Ok(format!("500 terms, {comparisons} probe pairs, 0 violations"))
}

fn criterion_5() -> Outcome {
    let runs = [("bool", 1), ("bool", 2), ("bool", 3), ("chain3", 1), ("chain3", 2), ("chain3", 3), ("chain4", 2), ("chain4", 3)];
    let mut shown = Vec::new();
    for (name, size) in runs {
        let q = FiniteQuantale::builtin(name).unwrap();
        let r = check_section3_props(&q, size).map_err(|e| e.to_string())?;
        let expected = (q.len() as u64).pow((size * size) as u32);
        ensure(r.relations == expected, || format!("{name}/{size}: {} relations", r.relations))?;
        let failures: u64 = r.clauses.iter().map(|c| c.failures).sum();
        ensure(r.passed() && failures == 0, || format!("{name}/{size}:\n{r}"))?;
        shown.push(format!("{name}/{size}: {}", r.relations));
    }
    Ok(shown.join(", "))
}

fn adjunction<Q: Quantale>(q: &Q, a: &Q::Elem, b: &Q::Elem, c: &Q::Elem) -> bool {
    q.leq(c, &q.residual(a, b)) == q.leq(&q.tensor(c, a), b)
}

fn criterion_6() -> Outcome {
    let mut finite = 0;
    for name in ["bool", "chain2", "chain3", "chain4", "chain5", "chain6"] {
        let q = FiniteQuantale::builtin(name).unwrap();
        for a in q.elements() {
            for b in q.elements() {
                for c in q.elements() {
                    ensure(adjunction(&q, &a, &b, &c), || format!("{name}: fails at ({a}, {b}, {c})"))?;
                    finite += 1;
                }
            }
        }
    }
    let q = Lawvere::<BigRational>::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let draw = |rng: &mut ChaCha8Rng| -> ExactDistance {
        if rng.gen_bool(0.05) {
            ExactDistance::infinity()
        } else {
            let r = BigRational::new(rng.gen_range(0..=200i64).into(), rng.gen_range(1..=12i64).into());
            ExactDistance::new(r).unwrap()
        }
    };
    for _ in 0..10_000 {
        let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        ensure(adjunction(&q, &a, &b, &c), || format!("Lawvere: fails at ({a}, {b}, {c})"))?;
        // c ⊑ a ⊸ b with c = a ⊸ b itself
        let r = q.residual(&a, &b);
        ensure(q.leq(&q.tensor(&r, &a), &b), || format!("Lawvere: (a -o b) ⊗ a ⋢ b at ({a}, {b})"))?;
    }
    Ok(format!("{finite} finite triples, 10000 Lawvere triples"))
}

fn criterion_7() -> Outcome {
    let r = check_prop_deq(&DeqConfig { count: 100, ..DeqConfig::default() });
    ensure(r.passed(), || format!("{:#?}", r.failures))?;
    ensure(r.valid == 100 && r.dlog_members == 100, || format!("{r:?}"))?;
    ensure(r.semantically_sound == r.real_conclusions && r.real_conclusions > 0, || format!("{r:?}"))?;
    Ok(format!(
        "{} derivations valid, {} in dlog, {}/{} Real conclusions sound",
        r.valid, r.dlog_members, r.semantically_sound, r.real_conclusions
    ))
}

fn criterion_8() -> Outcome {
    let cfg = first_order_gen(&["add", "sub", "mul", "sin", "cos", "abs", "pi"]);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ctx = TypingContext::new();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let t = random_closed(&mut rng, &Type::real_fn(), &cfg);
        let syntactic = derivative_term(&ctx, &t).map_err(|e| format!("{t}: {e}"))?;
        let syntactic = eval_closed::<f64>(&syntactic).map_err(|e| format!("{t}: {e}"))?;
        let semantic = diff_eval_closed::<f64>(&t).map_err(|e| format!("{t}: {e}"))?;
        for _ in 0..10 {
            let x: f64 = rng.gen_range(-10.0..=10.0);
            let b: f64 = rng.gen_range(0.0..=1.0);
            let s = real(&syntactic.apply(&Value::Real(x)).unwrap().apply(&Value::Real(b)).unwrap());
            let d = semantic.apply(&Value::Real(x), &Diff::Real(dlr_core::Distance::from_float(b).unwrap())).unwrap();
            let d = d.as_real().unwrap().to_float();
            let gap = if s == d { 0.0 } else { (s - d).abs() };
            worst = worst.max(gap);
            ensure(gap <= 1e-9, || format!("{t} at ({x}, {b}): syntactic {s}, semantic {d}"))?;
        }
    }
    Ok(format!("200 terms x 10 points, largest gap {worst:e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("finite-difference example numerics", criterion_1, 1),
        ("finite-difference bound, exact", criterion_2, 1),
        ("approximation theorem for id and sin", criterion_3, 5),
        ("fundamental lemma, first order", criterion_4, 10),
        ("quasi-metric propositions, exhaustive", criterion_5, 30),
        ("residuation adjunction", criterion_6, 2),
        ("derivation round trip", criterion_7, 5),
        ("derivative transform coherence", criterion_8, 5),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &n.to_string()) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > Duration::from_secs(*limit) => Err(format!("took {elapsed:.2?}, limit {limit}s")),
            other => other,
        };
        match result {
            Ok(detail) => println!("criterion {n} PASS ({elapsed:.2?}) {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} FAIL ({elapsed:.2?}) {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
