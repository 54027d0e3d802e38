//! Primitive declarations and the registry the parser resolves names against.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;

use crate::interval::Interval;

type CustomEval = Arc<dyn Fn(&[f64]) -> Option<f64> + Send + Sync>;
type AnalyticModulus = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
type IntervalExtension = Arc<dyn Fn(&[Interval]) -> Option<Interval> + Send + Sync>;

/// How the modulus `φ^d` of a user primitive is obtained.
#[derive(Clone)]
pub enum ModulusRule {
    /// Exact `φ^d(y, b)`; `b` entries may be `+∞`. Trusted as given.
    Analytic(AnalyticModulus),
    /// Per-argument Lipschitz constants: `Σ L_i b_i`.
    Lipschitz(Vec<f64>),
    /// An interval extension of `φ`; the modulus is read off the enclosure
    /// of the error box.
    Interval(IntervalExtension),
    /// No information: the modulus is `∞` except on degenerate boxes.
    Unknown,
}

/// Built-in primitives carry exact, scalar-generic semantics.
#[derive(Clone)]
pub enum PrimKind {
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
    Abs,
    /// A nullary constant.
    Const(BigRational),
    /// A user function evaluated in double precision.
    Custom { eval: CustomEval, modulus: ModulusRule },
}

/// Where an argument may range; used when sampling inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArgDomain {
    All,
    NonZero,
    Within(Interval),
}

#[derive(Clone)]
pub struct PrimitiveDecl {
    name: String,
    arity: usize,
    kind: PrimKind,
    domain: Vec<ArgDomain>,
}

impl PrimitiveDecl {
    fn builtin(name: &str, arity: usize, kind: PrimKind) -> Self {
        Self { name: name.into(), arity, kind, domain: vec![ArgDomain::All; arity] }
    }

    pub fn constant(name: &str, value: BigRational) -> Self {
        Self::builtin(name, 0, PrimKind::Const(value))
    }

    pub fn custom(
        name: &str,
        arity: usize,
        eval: impl Fn(&[f64]) -> Option<f64> + Send + Sync + 'static,
        modulus: ModulusRule,
    ) -> Self {
        Self {
            name: name.into(),
            arity,
            kind: PrimKind::Custom { eval: Arc::new(eval), modulus },
            domain: vec![ArgDomain::All; arity],
        }
    }

    pub fn with_domain(mut self, domain: Vec<ArgDomain>) -> Self {
        assert_eq!(domain.len(), self.arity, "one domain per argument");
        self.domain = domain;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kind(&self) -> &PrimKind {
        &self.kind
    }

    pub fn domain(&self) -> &[ArgDomain] {
        &self.domain
    }

    /// Whether the modulus is computed exactly (as opposed to an
    /// over-approximation).
    pub fn has_exact_modulus(&self) -> bool {
        !matches!(
            &self.kind,
            PrimKind::Custom { modulus: ModulusRule::Interval(_) | ModulusRule::Unknown | ModulusRule::Lipschitz(_), .. }
        )
    }
}

impl fmt::Debug for PrimitiveDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// A primitive occurrence in a term: either `φ` itself or its modulus `φ^d`
/// (arity `2n`, rendered `φ_d`).
#[derive(Clone)]
pub struct PrimRef {
    decl: Arc<PrimitiveDecl>,
    modulus: bool,
}

impl PrimRef {
    pub fn new(decl: Arc<PrimitiveDecl>) -> Self {
        Self { decl, modulus: false }
    }

    /// `φ^d`; `None` when `self` already is a modulus.
    pub fn modulus(&self) -> Option<Self> {
        (!self.modulus).then(|| Self { decl: self.decl.clone(), modulus: true })
    }

    pub fn is_modulus(&self) -> bool {
        self.modulus
    }

    pub fn decl(&self) -> &Arc<PrimitiveDecl> {
        &self.decl
    }

    pub fn arity(&self) -> usize {
        if self.modulus {
            2 * self.decl.arity
        } else {
            self.decl.arity
        }
    }

    pub fn name(&self) -> String {
        if self.modulus {
            format!("{}_d", self.decl.name)
        } else {
            self.decl.name.clone()
        }
    }
}

impl PartialEq for PrimRef {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.decl.name == other.decl.name
    }
}

impl Eq for PrimRef {}

impl fmt::Debug for PrimRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Named primitives available to the parser.
#[derive(Clone, Debug)]
pub struct PrimRegistry {
    prims: BTreeMap<String, Arc<PrimitiveDecl>>,
}

impl PrimRegistry {
    pub fn empty() -> Self {
        Self { prims: BTreeMap::new() }
    }

    /// `add sub mul div sin cos abs` and the constant `pi`.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register(PrimitiveDecl::builtin("add", 2, PrimKind::Add));
        r.register(PrimitiveDecl::builtin("sub", 2, PrimKind::Sub));
        r.register(PrimitiveDecl::builtin("mul", 2, PrimKind::Mul));
        r.register(
            PrimitiveDecl::builtin("div", 2, PrimKind::Div).with_domain(vec![ArgDomain::All, ArgDomain::NonZero]),
        );
        r.register(PrimitiveDecl::builtin("sin", 1, PrimKind::Sin));
        r.register(PrimitiveDecl::builtin("cos", 1, PrimKind::Cos));
        r.register(PrimitiveDecl::builtin("abs", 1, PrimKind::Abs));
        let pi = BigRational::from_float(std::f64::consts::PI).expect("finite");
        r.register(PrimitiveDecl::constant("pi", pi));
        r
    }

    /// Replaces any previous declaration of the same name.
    pub fn register(&mut self, decl: PrimitiveDecl) -> Arc<PrimitiveDecl> {
        let decl = Arc::new(decl);
        self.prims.insert(decl.name.clone(), decl.clone());
        decl
    }

    pub fn get(&self, name: &str) -> Option<&Arc<PrimitiveDecl>> {
        self.prims.get(name)
    }

    /// Resolves `name`, or `base_d` as the modulus of `base`.
    pub fn resolve(&self, name: &str) -> Option<PrimRef> {
        if let Some(d) = self.prims.get(name) {
            return Some(PrimRef::new(d.clone()));
        }
        let base = name.strip_suffix("_d")?;
        self.prims.get(base).map(|d| PrimRef { decl: d.clone(), modulus: true })
    }

    /// `φ` by name, panicking if absent. For built-in names in library code.
    pub fn prim(&self, name: &str) -> PrimRef {
        self.resolve(name).unwrap_or_else(|| panic!("primitive `{name}` is not registered"))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.prims.keys().map(String::as_str)
    }
}

impl Default for PrimRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_modulus_names() {
        let r = PrimRegistry::standard();
        let sin = r.resolve("sin").unwrap();
        assert!(!sin.is_modulus());
        let sin_d = r.resolve("sin_d").unwrap();
        assert!(sin_d.is_modulus());
        assert_eq!(sin_d.arity(), 2);
        assert_eq!(sin.modulus().unwrap(), sin_d);
        assert!(sin_d.modulus().is_none());
        assert!(r.resolve("tan").is_none());
    }

    #[test]
    fn exact_name_wins_over_modulus_suffix() {
        let mut r = PrimRegistry::standard();
        r.register(PrimitiveDecl::custom("sin_d", 1, |x| Some(x[0]), ModulusRule::Lipschitz(vec![1.0])));
        assert!(!r.resolve("sin_d").unwrap().is_modulus());
    }
}
