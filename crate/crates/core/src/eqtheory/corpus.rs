use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::dlog::{check_dlog, DlogProbes};
use super::synth::{conv, quasi_reflexive, synthesize_fundamental, transitive};
use super::{check_derivation, Derivation, DistanceJudgment, Rule};
use crate::semantics::{eval_closed, Value};
use crate::syntax::random::{random_closed, random_term, GenConfig};
use crate::syntax::{normalize, PrimRegistry, Term, Type, TypingContext};

/// Parameters of the randomized corpus behind [`check_prop_deq`].
#[derive(Clone, Debug)]
pub struct DeqConfig {
    pub count: usize,
    pub seed: u64,
    /// At most this many free variables in the generated open term.
    pub max_vars: usize,
    pub max_depth: usize,
    /// Probe sizes for δ^log at arrow types.
    pub dlog_reals: usize,
    pub dlog_functions: usize,
}

impl Default for DeqConfig {
    fn default() -> Self {
        Self { count: 100, seed: 42, max_vars: 2, max_depth: 3, dlog_reals: 12, dlog_functions: 6 }
    }
}

/// One failed obligation.
#[derive(Clone, Debug, Serialize)]
pub struct DeqFailure {
    pub index: usize,
    pub check: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DeqReport {
    pub derivations: usize,
    pub valid: usize,
    pub quasi_reflexive: usize,
    pub transitive: usize,
    pub dlog_members: usize,
    /// Real-typed conclusions checked against the evaluator.
    pub real_conclusions: usize,
    pub semantically_sound: usize,
    pub failures: Vec<DeqFailure>,
}

impl DeqReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn gen_config(max_depth: usize) -> GenConfig {
    let reg = PrimRegistry::standard();
    GenConfig { max_depth, ..GenConfig::new(["add", "mul", "sin", "cos", "sub"].map(|p| reg.prim(p)).to_vec()) }
}

fn tenths(n: i64) -> Term {
    Term::lit(BigRational::new(n.into(), 10.into()))
}

fn lit_leaf(r: i64, s: i64, r2: i64) -> Derivation {
    Derivation::leaf(Rule::Lit, DistanceJudgment::closed(tenths(r), tenths(s), tenths(r2), Type::Real))
}

/// A closed derivation at a first-order type, built by the synthesis over
/// literal components and closed function components, sometimes followed
/// by a conversion to normal forms. Also returns a second derivation whose
/// left subject is the first one's right subject.
fn corpus_pair<R: Rng>(rng: &mut R, cfg: &DeqConfig) -> (Derivation, Derivation) {
    let gen = gen_config(cfg.max_depth);
    let ty = match rng.gen_range(0..4) {
        0 | 1 => Type::Real,
        2 => Type::real_fn(),
        _ => Type::prod(Type::Real, Type::Real),
    };
    let mut ctx = TypingContext::new();
    let (mut first, mut second) = (Vec::new(), Vec::new());
    for i in 0..rng.gen_range(0..=cfg.max_vars) {
        if rng.gen_bool(0.75) {
            ctx.push(&format!("x{i}"), Type::Real);
            let r = rng.gen_range(-20..=20);
            let (s, s2) = (rng.gen_range(0..=10), rng.gen_range(0..=10));
            let r2 = r + rng.gen_range(-s..=s);
            let r3 = r2 + rng.gen_range(-s2..=s2);
            first.push(lit_leaf(r, s, r2));
            second.push(lit_leaf(r2, s2, r3));
        } else {
            ctx.push(&format!("f{i}"), Type::real_fn());
            let f = random_closed(rng, &Type::real_fn(), &gen_config(2));
            let d = synthesize_fundamental(&TypingContext::new(), &f, &[]).expect("closed function term");
            first.push(d.clone());
            second.push(d);
        }
    }
    let t = random_term(rng, &ctx, &ty, &gen);
    let d1 = synthesize_fundamental(&ctx, &t, &first).expect("generated components fit the context");
    let d2 = synthesize_fundamental(&ctx, &t, &second).expect("generated components fit the context");
    let d1 = if rng.gen_bool(0.3) { normalized(d1) } else { d1 };
    (d1, d2)
}

fn normalized(d: Derivation) -> Derivation {
    let c = &d.conclusion;
    let n = |ctx: &TypingContext, t: &Term| normalize(ctx, t).unwrap_or_else(|_| t.clone());
    let (t, a, t2) = (n(&c.ctx, &c.t), n(&c.ctx.with_partial(), &c.a), n(&c.ctx, &c.t2));
    conv(d, t, a, t2)
}

/// One corpus derivation, deterministic in `rng`.
pub fn random_derivation<R: Rng>(rng: &mut R, cfg: &DeqConfig) -> Derivation {
    corpus_pair(rng, cfg).0
}

fn exact_real(t: &Term) -> Result<BigRational, String> {
    match eval_closed::<BigRational>(t) {
        Ok(Value::Real(r)) => Ok(r),
        Ok(v) => Err(format!("`{t}` evaluates to {v}")),
        Err(e) => Err(format!("`{t}`: {e}")),
    }
}

/// Runs the three closure properties of derived distances and their
/// soundness over a seeded corpus of closed first-order derivations:
/// validity, quasi-reflexivity, transitivity through `add`, δ^log
/// membership, and `|⟦t⟧ − ⟦t′⟧| ≤ ⟦a⟧` at `Real` in exact arithmetic.
pub fn check_prop_deq(cfg: &DeqConfig) -> DeqReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs: Vec<(Derivation, Derivation)> = (0..cfg.count).map(|_| corpus_pair(&mut rng, cfg)).collect();
    let mut probes = DlogProbes::new(cfg.dlog_reals, cfg.dlog_functions, cfg.seed);
    for ty in [Type::Real, Type::real_fn(), Type::prod(Type::Real, Type::Real)] {
        probes.ensure_domains(&ty);
    }
    let results: Vec<(DeqReport, Vec<DeqFailure>)> =
        pairs.par_iter().enumerate().map(|(i, (d1, d2))| check_one(i, d1, d2, &probes)).collect();
    let mut report = DeqReport { derivations: cfg.count, ..DeqReport::default() };
    for (r, failures) in results {
        report.valid += r.valid;
        report.quasi_reflexive += r.quasi_reflexive;
        report.transitive += r.transitive;
        report.dlog_members += r.dlog_members;
        report.real_conclusions += r.real_conclusions;
        report.semantically_sound += r.semantically_sound;
        report.failures.extend(failures);
    }
    report
}

fn check_one(i: usize, d1: &Derivation, d2: &Derivation, probes: &DlogProbes) -> (DeqReport, Vec<DeqFailure>) {
    let mut r = DeqReport::default();
    let mut failures = Vec::new();
    let mut fail = |check, detail: String| failures.push(DeqFailure { index: i, check, detail });
    match check_derivation(d1) {
        Ok(()) => r.valid += 1,
        Err(e) => fail("valid", e.to_string()),
    }
    match quasi_reflexive(d1).map_err(|e| e.to_string()).and_then(|q| check_derivation(&q).map_err(|e| e.to_string()))
    {
        Ok(()) => r.quasi_reflexive += 1,
        Err(e) => fail("quasi-reflexive", e),
    }
    match transitive(d1, d2) {
        Ok(t) => match check_derivation(&t) {
            Ok(()) => {
                r.transitive += 1;
                let c = &t.conclusion;
                sound(c, &mut r, &mut fail);
            }
            Err(e) => fail("transitive", e.to_string()),
        },
        Err(e) => fail("transitive", e.to_string()),
    }
    let c = &d1.conclusion;
    match check_dlog(&c.ty, &c.t, &c.a, &c.t2, probes) {
        Ok(v) if v.is_consistent() => r.dlog_members += 1,
        Ok(v) => fail("dlog", format!("{}: {v}", c)),
        Err(e) => fail("dlog", format!("{}: {e}", c)),
    }
    sound(c, &mut r, &mut fail);
    (r, failures)
}

fn sound(c: &DistanceJudgment, r: &mut DeqReport, fail: &mut impl FnMut(&'static str, String)) {
    if c.ty != Type::Real {
        return;
    }
    r.real_conclusions += 1;
    match (exact_real(&c.t), exact_real(&c.a), exact_real(&c.t2)) {
        (Ok(x), Ok(a), Ok(x2)) if (&x - &x2).abs() <= a => {
            r.semantically_sound += 1
        }
        (Ok(x), Ok(a), Ok(x2)) => fail("semantic", format!("{c}: |{x} - {x2}| > {a}")),
        (Err(e), ..) | (_, Err(e), _) | (.., Err(e)) => fail("semantic", e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_corpus_passes() {
        let report = check_prop_deq(&DeqConfig { count: 30, ..DeqConfig::default() });
        assert!(report.passed(), "{:#?}", report.failures);
        assert_eq!(report.valid, 30);
        assert!(report.real_conclusions >= 10);
    }

    #[test]
    fn corpus_is_deterministic() {
        let cfg = DeqConfig::default();
        let a = random_derivation(&mut ChaCha8Rng::seed_from_u64(3), &cfg);
        let b = random_derivation(&mut ChaCha8Rng::seed_from_u64(3), &cfg);
        assert_eq!(a.to_json(), b.to_json());
    }
}
