use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value as Json};

use super::{RelError, MAX_PROBE_DEPTH};
use crate::quantale::ExtNonNegReal;
use crate::semantics::{diff_eval_closed, eval_closed, Diff, Value};
use crate::syntax::random::{random_closed, GenConfig};
use crate::syntax::{parse, PrimRegistry, Term, Type};

/// How probe sets are generated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeConfig {
    /// Number of Real probes.
    pub real_count: usize,
    /// Range of Real probe centres.
    pub range: (f64, f64),
    /// Largest finite input error `b`.
    pub max_error: f64,
    /// Number of function probes per arrow type (self probes; first-order
    /// codomains add the same number again of cross probes).
    pub function_count: usize,
    pub seed: u64,
    /// Relative slack for Real-level comparisons.
    pub slack: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { real_count: 1000, range: (-10.0, 10.0), max_error: 1.0, function_count: 16, seed: 42, slack: 1e-9 }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<(), RelError> {
        let (lo, hi) = self.range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(RelError::Config(format!("probe range {lo}:{hi} must be finite and ordered")));
        }
        if !(self.max_error.is_finite() && self.max_error >= 0.0) {
            return Err(RelError::Config("maximum probe error must be finite and non-negative".into()));
        }
        if !(self.slack.is_finite() && self.slack >= 0.0) {
            return Err(RelError::Config("slack must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// A triple `(x, b, x′)` assumed to lie in ρ at its type.
#[derive(Clone)]
pub struct Probe {
    pub x: Value<f64>,
    pub b: Diff<f64>,
    pub x2: Value<f64>,
    pub label: String,
    /// `x` and `x′` are the same element.
    pub is_self: bool,
    /// Also assumed to lie in η.
    pub in_eta: bool,
}

impl Probe {
    pub fn real(x: f64, b: f64, x2: f64) -> Self {
        let label = format!("x={x}, b={b}, x'={x2}");
        let b = ExtNonNegReal::from_float(b).expect("probe errors are non-negative");
        Probe {
            x: Value::Real(x),
            b: Diff::Real(b),
            x2: Value::Real(x2),
            label,
            is_self: x == x2,
            in_eta: true,
        }
    }

    pub fn to_json(&self) -> Json {
        json!({
            "label": self.label,
            "x": value_json(&self.x),
            "b": diff_json(&self.b),
            "x'": value_json(&self.x2),
        })
    }
}

fn float_json(x: f64) -> Json {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn value_json(v: &Value<f64>) -> Json {
    match v {
        Value::Real(x) => float_json(*x),
        Value::Pair(a, b) => json!([value_json(a), value_json(b)]),
        other => json!(other.to_string()),
    }
}

fn diff_json(d: &Diff<f64>) -> Json {
    match d {
        Diff::Real(r) => float_json(r.to_float()),
        Diff::Pair(a, b) => json!([diff_json(a), diff_json(b)]),
        Diff::Fun(_) => json!("<distance function>"),
    }
}

/// Probes per type, with the configuration that produced them.
#[derive(Clone)]
pub struct ProbeSet {
    config: ProbeConfig,
    by_type: HashMap<Type, Vec<Probe>>,
}

impl ProbeSet {
    pub fn new(config: ProbeConfig) -> Self {
        Self { config, by_type: HashMap::new() }
    }

    /// Probes sufficient to check membership at `ty`: probes at every
    /// domain type that the check descends into.
    pub fn for_checking(ty: &Type, config: ProbeConfig) -> Result<Self, RelError> {
        config.validate()?;
        let mut set = Self::new(config);
        set.ensure_checkable(ty)?;
        Ok(set)
    }

    pub fn config(&self) -> &ProbeConfig {
        &self.config
    }

    pub fn slack(&self) -> f64 {
        self.config.slack
    }

    pub fn at(&self, ty: &Type) -> Result<&[Probe], RelError> {
        self.by_type.get(ty).map(Vec::as_slice).ok_or_else(|| RelError::MissingProbes(ty.clone()))
    }

    /// Replaces the probes at `ty`, e.g. with user-supplied ones.
    pub fn insert(&mut self, ty: Type, probes: Vec<Probe>) {
        self.by_type.insert(ty, probes);
    }

    pub fn types(&self) -> impl Iterator<Item = &Type> {
        self.by_type.keys()
    }

    pub fn len(&self) -> usize {
        self.by_type.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Generates probes at `ty` unless present.
    pub fn ensure(&mut self, ty: &Type) -> Result<(), RelError> {
        if self.by_type.contains_key(ty) {
            return Ok(());
        }
        let probes = match ty {
            Type::Real => real_probes(&self.config, &mut self.rng_for(ty)),
            Type::Prod(a, b) => {
                self.ensure(a)?;
                self.ensure(b)?;
                let k = (self.config.real_count as f64).sqrt().ceil() as usize;
                let (pa, pb) = (self.at(a)?, self.at(b)?);
                let mut out = Vec::new();
                for p in pa.iter().take(k.max(1)) {
                    for q in pb.iter().take(k.max(1)) {
                        out.push(Probe {
                            x: Value::pair(p.x.clone(), q.x.clone()),
                            b: Diff::pair(p.b.clone(), q.b.clone()),
                            x2: Value::pair(p.x2.clone(), q.x2.clone()),
                            label: format!("({}; {})", p.label, q.label),
                            is_self: p.is_self && q.is_self,
                            in_eta: p.in_eta && q.in_eta,
                        });
                    }
                }
                out
            }
            Type::Arrow(_, cod) => {
                let depth = ty.arrow_depth();
                if depth > MAX_PROBE_DEPTH {
                    return Err(RelError::UnsupportedDepth { ty: ty.clone(), depth });
                }
                let terms = if *ty == Type::real_fn() {
                    function_library(&self.config)
                } else {
                    let mut rng = self.rng_for(ty);
                    random_functions(ty, &self.config, &mut rng)
                };
                function_probes(&terms, **cod == Type::Real, cod.arrow_depth() == 0)?
            }
        };
        self.by_type.insert(ty.clone(), probes);
        Ok(())
    }

    /// Generates the probes `check_*` at `ty` will ask for.
    pub fn ensure_checkable(&mut self, ty: &Type) -> Result<(), RelError> {
        match ty {
            Type::Real => Ok(()),
            Type::Prod(a, b) => {
                self.ensure_checkable(a)?;
                self.ensure_checkable(b)
            }
            Type::Arrow(a, b) => {
                self.ensure(a)?;
                self.ensure_checkable(b)
            }
        }
    }

    fn rng_for(&self, ty: &Type) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        // FNV-1a of the type's rendering selects an independent stream
        let stream = ty.ascii().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, c| (h ^ c as u64).wrapping_mul(0x100_0000_01b3));
        rng.set_stream(stream);
        rng
    }

    pub fn to_json(&self) -> Json {
        let mut types: Vec<&Type> = self.by_type.keys().collect();
        types.sort_by_key(|t| t.ascii());
        json!({
            "config": self.config,
            "types": types.iter().map(|t| json!({
                "type": t.ascii(),
                "probes": self.by_type[*t].iter().map(Probe::to_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Probes at `ty` and everything needed to check membership at `ty`.
pub fn generate_probes(ty: &Type, config: ProbeConfig) -> Result<ProbeSet, RelError> {
    let mut set = ProbeSet::for_checking(ty, config)?;
    set.ensure(ty)?;
    Ok(set)
}

fn real_probes(cfg: &ProbeConfig, rng: &mut ChaCha8Rng) -> Vec<Probe> {
    let (lo, hi) = cfg.range;
    let m = cfg.max_error;
    let n = cfg.real_count;
    let mut out = Vec::with_capacity(n);
    let landmarks: Vec<f64> =
        [0.0, FRAC_PI_2, -FRAC_PI_2, PI, 1.0, -1.0].into_iter().filter(|c| (lo..=hi).contains(c)).collect();
    for &c in &landmarks {
        out.push(Probe::real(c, 0.0, c));
    }
    for &c in &landmarks {
        out.push(Probe::real(c, m, c + m));
        out.push(Probe::real(c, m, c - m));
    }
    let grid = n / 4;
    for i in 0..grid {
        let x = if grid > 1 { lo + (hi - lo) * i as f64 / (grid - 1) as f64 } else { lo };
        let b = [0.0, m / 2.0, m][i % 3];
        let x2 = x + b * [-1.0, 1.0, 0.5][(i / 3) % 3];
        out.push(Probe::real(x, b, clamp_partner(x, b, x2)));
    }
    while out.len() < n {
        let x = if lo < hi { rng.gen_range(lo..=hi) } else { lo };
        let b = if m > 0.0 { rng.gen_range(0.0..=m) } else { 0.0 };
        let u: f64 = rng.gen_range(-1.0..=1.0);
        out.push(Probe::real(x, b, clamp_partner(x, b, x + u * b)));
    }
    out.truncate(n);
    out
}

// Rounding in `x + u·b` can leave the ball by an ulp.
fn clamp_partner(x: f64, b: f64, x2: f64) -> f64 {
    if (x - x2).abs() <= b {
        x2
    } else {
        x
    }
}

/// The `Real ⇒ Real` library: named functions, then random polynomials of
/// degree at most two, `function_count` in total.
pub fn function_library(cfg: &ProbeConfig) -> Vec<(String, Term)> {
    let named = [
        ("id", "\\x:Real. x"),
        ("sin", "\\x:Real. sin(x)"),
        ("cos", "\\x:Real. cos(x)"),
        ("const 0", "\\x:Real. 0"),
        ("const 1.5", "\\x:Real. 1.5"),
        ("square", "\\x:Real. x * x"),
        ("shift", "\\x:Real. x + 1"),
        ("affine", "\\x:Real. 2 * x - 3"),
    ];
    let mut out: Vec<(String, Term)> =
        named.iter().map(|(n, src)| (n.to_string(), parse(src).expect("library terms parse"))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_f00d);
    let mut k = 0;
    while out.len() < cfg.function_count {
        let c: Vec<i64> = (0..3).map(|_| rng.gen_range(-20..=20)).collect();
        let src = format!(
            "\\x:Real. {{{}/10}} + {{{}/10}} * x + {{{}/10}} * x * x",
            c[0], c[1], c[2]
        );
        out.push((format!("poly {k}"), parse(&src).expect("polynomial parses")));
        k += 1;
    }
    out.truncate(cfg.function_count.max(1));
    out
}

fn random_functions(ty: &Type, cfg: &ProbeConfig, rng: &mut ChaCha8Rng) -> Vec<(String, Term)> {
    let r = PrimRegistry::standard();
    let gen = GenConfig::new(vec![r.prim("add"), r.prim("sub"), r.prim("mul"), r.prim("sin"), r.prim("cos")]);
    (0..cfg.function_count.max(1))
        .map(|_| {
            let t = random_closed(rng, ty, &gen);
            (t.to_string(), t)
        })
        .collect()
}

fn function_probes(terms: &[(String, Term)], real_codomain: bool, first_order_codomain: bool) -> Result<Vec<Probe>, RelError> {
    let mut selfs = Vec::with_capacity(terms.len());
    for (label, t) in terms {
        let f = eval_closed::<f64>(t)?;
        let s = diff_eval_closed::<f64>(t)?;
        selfs.push(Probe { x: f.clone(), b: s, x2: f, label: label.clone(), is_self: true, in_eta: first_order_codomain });
    }
    let mut out = selfs.clone();
    if real_codomain {
        // (f, a, g) with a·y·b = |f·y − g·y| + max(s_f·y·b, s_g·y·b) is in ρ
        // whenever s_f and s_g are self-distances of f and g
        for w in selfs.windows(2) {
            let (f, sf, g, sg) = (w[0].x.clone(), w[0].b.clone(), w[1].x.clone(), w[1].b.clone());
            let (f2, g2) = (f.clone(), g.clone());
            let b = Diff::fun(move |y, c| {
                let gap = (f2.apply(y)?.as_real()? - g2.apply(y)?.as_real()?).abs();
                let m = sf.apply(y, c)?.as_real()?.clone().num_max(sg.apply(y, c)?.as_real()?.clone());
                Ok(Diff::Real(ExtNonNegReal::abs_of(gap).add(&m)))
            });
            out.push(Probe {
                x: f,
                b,
                x2: g,
                label: format!("{} ~ {}", w[0].label, w[1].label),
                is_self: false,
                in_eta: false,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ProbeConfig {
        ProbeConfig { real_count: 100, ..ProbeConfig::default() }
    }

    fn reals(set: &ProbeSet) -> Vec<(f64, f64, f64)> {
        set.at(&Type::Real)
            .unwrap()
            .iter()
            .map(|p| (*p.x.as_real().unwrap(), p.b.as_real().unwrap().to_float(), *p.x2.as_real().unwrap()))
            .collect()
    }

    #[test]
    fn real_probes_are_deterministic_and_in_relation() {
        let a = generate_probes(&Type::Real, small()).unwrap();
        let b = generate_probes(&Type::Real, small()).unwrap();
        let (ra, rb) = (reals(&a), reals(&b));
        assert_eq!(ra.len(), 100);
        assert_eq!(ra, rb);
        for (x, b, x2) in ra {
            assert!((x - x2).abs() <= b, "{x} {b} {x2}");
            assert!((-10.0..=10.0).contains(&x));
        }
        let other = generate_probes(&Type::Real, ProbeConfig { seed: 7, ..small() }).unwrap();
        assert_ne!(reals(&other), reals(&a));
    }

    #[test]
    fn library_contains_the_named_functions() {
        let set = generate_probes(&Type::real_fn(), small()).unwrap();
        let labels: Vec<&str> = set.at(&Type::real_fn()).unwrap().iter().map(|p| p.label.as_str()).collect();
        for name in ["id", "sin", "const 0", "square", "shift"] {
            assert!(labels.contains(&name), "{name} missing from {labels:?}");
        }
        assert_eq!(labels.len(), 16 + 15);
    }

    #[test]
    fn product_probes_are_component_pairs() {
        let ty = Type::prod(Type::Real, Type::Real);
        let set = generate_probes(&ty, small()).unwrap();
        let comps = reals(&set);
        let pairs = set.at(&ty).unwrap();
        assert_eq!(pairs.len(), 100);
        for p in pairs {
            let (x, y) = (*p.x.fst().unwrap().as_real().unwrap(), *p.x.snd().unwrap().as_real().unwrap());
            assert!(comps.iter().any(|c| c.0 == x));
            assert!(comps.iter().any(|c| c.0 == y));
        }
    }

    #[test]
    fn deep_arrow_libraries_are_refused() {
        let deep = Type::arrow(Type::arrow(Type::real_fn(), Type::Real), Type::Real);
        assert!(matches!(generate_probes(&deep, small()), Err(RelError::UnsupportedDepth { depth: 3, .. })));
    }

    #[test]
    fn second_order_probes_are_generated() {
        let ty = Type::arrow(Type::real_fn(), Type::Real);
        let set = generate_probes(&ty, small()).unwrap();
        assert_eq!(set.at(&ty).unwrap().len(), 31);
        assert!(set.at(&Type::real_fn()).is_ok());
    }
}
