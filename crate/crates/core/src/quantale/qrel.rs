//! Square quantale-valued matrices over a finite point set.
//!
//! # Text format
//!
//! ```text
//! points a b          # point labels
//! a: 0 1              # row a, one entry per point in order
//! b: 2 0
//! ```
//!
//! Entries use the quantale's element syntax (`inf` for the Lawvere `∞`).

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use super::{ElemSyntax, FiniteQuantale, Quantale};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QRelError {
    #[error("domain mismatch: {left} points vs {right} points")]
    DomainMismatch { left: usize, right: usize },
    #[error("matrix has {found} entries, expected {expected}")]
    Shape { expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// A relation `s: X × X → Q` stored row-major.
#[derive(Clone, PartialEq)]
pub struct QRel<E> {
    points: Arc<Vec<String>>,
    entries: Vec<E>,
}

/// The seven metric-law flags of a relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RelationClassification {
    pub reflexive: bool,
    pub quasi_reflexive: bool,
    pub transitive: bool,
    pub quasi_metric: bool,
    pub quasi2_metric: bool,
    pub strongly_transitive: bool,
    pub partial_quasi_metric: bool,
}

impl<E: Clone + PartialEq> QRel<E> {
    pub fn new(points: Vec<String>, entries: Vec<E>) -> Result<Self, QRelError> {
        Self::with_points(Arc::new(points), entries)
    }

    pub fn with_points(points: Arc<Vec<String>>, entries: Vec<E>) -> Result<Self, QRelError> {
        let expected = points.len() * points.len();
        if entries.len() != expected {
            return Err(QRelError::Shape { expected, found: entries.len() });
        }
        Ok(Self { points, entries })
    }

    /// Points labelled `0..n`.
    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self, QRelError> {
        let n = rows.len();
        let points = (0..n).map(|i| i.to_string()).collect();
        let entries: Vec<E> = rows.into_iter().flatten().collect();
        Self::new(points, entries)
    }

    pub fn constant(points: Arc<Vec<String>>, value: E) -> Self {
        let n = points.len();
        Self { points, entries: vec![value; n * n] }
    }

    /// The identity: `⊤` on the diagonal, `⊥` elsewhere.
    pub fn identity<Q: Quantale<Elem = E>>(q: &Q, points: Arc<Vec<String>>) -> Self {
        let n = points.len();
        let entries = (0..n * n).map(|i| if i / n == i % n { q.top() } else { q.bottom() }).collect();
        Self { points, entries }
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &Arc<Vec<String>> {
        &self.points
    }

    pub fn entries(&self) -> &[E] {
        &self.entries
    }

    pub fn get(&self, x: usize, y: usize) -> &E {
        &self.entries[x * self.size() + y]
    }

    fn build(&self, f: impl Fn(usize, usize) -> E) -> Self {
        let n = self.size();
        let entries = (0..n * n).map(|i| f(i / n, i % n)).collect();
        Self { points: self.points.clone(), entries }
    }

    fn same_domain(&self, other: &Self) -> Result<(), QRelError> {
        if self.size() != other.size() {
            return Err(QRelError::DomainMismatch { left: self.size(), right: other.size() });
        }
        Ok(())
    }

    /// `s ⊑ t` pointwise.
    pub fn below<Q: Quantale<Elem = E>>(&self, q: &Q, other: &Self) -> bool {
        self.entries.iter().zip(&other.entries).all(|(a, b)| q.leq(a, b))
    }

    /// `(s ⊗ t)(x, z) = ⋁_y s(x, y) ⊗ t(y, z)`.
    pub fn tensor<Q: Quantale<Elem = E>>(&self, q: &Q, t: &Self) -> Result<Self, QRelError> {
        self.same_domain(t)?;
        let n = self.size();
        Ok(self.build(|x, z| {
            (0..n).fold(q.bottom(), |acc, y| q.join(&acc, &q.tensor(self.get(x, y), t.get(y, z))))
        }))
    }

    /// `(u ⊸ s)(z, y) = ⋀_x u(x, z) ⊸ s(x, y)`, with `self` as `u`.
    pub fn residual_left<Q: Quantale<Elem = E>>(&self, q: &Q, s: &Self) -> Result<Self, QRelError> {
        self.same_domain(s)?;
        let n = self.size();
        Ok(self.build(|z, y| {
            (0..n).fold(q.top(), |acc, x| q.meet(&acc, &q.residual(self.get(x, z), s.get(x, y))))
        }))
    }

    /// `(s ⟜ w)(x, z) = ⋀_y w(z, y) ⊸ s(x, y)`, with `self` as `s`.
    pub fn residual_right<Q: Quantale<Elem = E>>(&self, q: &Q, w: &Self) -> Result<Self, QRelError> {
        self.same_domain(w)?;
        let n = self.size();
        Ok(self.build(|x, z| {
            (0..n).fold(q.top(), |acc, y| q.meet(&acc, &q.residual(w.get(z, y), self.get(x, y))))
        }))
    }

    /// `q^l = s ⟜ s`.
    pub fn obs_quasi_left<Q: Quantale<Elem = E>>(&self, q: &Q) -> Self {
        self.residual_right(q, self).expect("same domain")
    }

    /// `q^r = s ⊸ s`.
    pub fn obs_quasi_right<Q: Quantale<Elem = E>>(&self, q: &Q) -> Self {
        self.residual_left(q, self).expect("same domain")
    }

    /// `Θ^l(x, y) = s(y, y) ⊸ s(x, y)`.
    pub fn theta_left<Q: Quantale<Elem = E>>(&self, q: &Q) -> Self {
        self.build(|x, y| q.residual(self.get(y, y), self.get(x, y)))
    }

    /// `Θ^r(x, y) = s(x, x) ⊸ s(x, y)`.
    pub fn theta_right<Q: Quantale<Elem = E>>(&self, q: &Q) -> Self {
        self.build(|x, y| q.residual(self.get(x, x), self.get(x, y)))
    }

    /// `Δ₁s(x, y) = s(x, x)`.
    pub fn delta1(&self) -> Self {
        self.build(|x, _| self.get(x, x).clone())
    }

    /// `Δ₂s(x, y) = s(y, y)`.
    pub fn delta2(&self) -> Self {
        self.build(|_, y| self.get(y, y).clone())
    }

    pub fn is_reflexive<Q: Quantale<Elem = E>>(&self, q: &Q) -> bool {
        (0..self.size()).all(|x| *self.get(x, x) == q.top())
    }

    /// `s ⊑ Δ₁s`.
    pub fn is_quasi_reflexive<Q: Quantale<Elem = E>>(&self, q: &Q) -> bool {
        let n = self.size();
        (0..n).all(|x| (0..n).all(|y| q.leq(self.get(x, y), self.get(x, x))))
    }

    /// `s ⊑ Δ₂s`.
    pub fn is_quasi_reflexive_left<Q: Quantale<Elem = E>>(&self, q: &Q) -> bool {
        let n = self.size();
        (0..n).all(|x| (0..n).all(|y| q.leq(self.get(x, y), self.get(y, y))))
    }

    /// `s ⊗ s ⊑ s`, checked instance by instance.
    pub fn is_transitive<Q: Quantale<Elem = E>>(&self, q: &Q) -> bool {
        let n = self.size();
        triples(n).all(|(x, z, y)| q.leq(&q.tensor(self.get(x, z), self.get(z, y)), self.get(x, y)))
    }

    /// `s(x, z) ⊗ (s(z, z) ⊸ s(z, y)) ⊑ s(x, y)`.
    pub fn is_strongly_transitive<Q: Quantale<Elem = E>>(&self, q: &Q) -> bool {
        let n = self.size();
        triples(n).all(|(x, z, y)| {
            let step = q.residual(self.get(z, z), self.get(z, y));
            q.leq(&q.tensor(self.get(x, z), &step), self.get(x, y))
        })
    }

    /// `(s(z, z) ⊸ s(x, z)) ⊗ s(z, y) ⊑ s(x, y)`, the mirror image of
    /// [`is_strongly_transitive`](Self::is_strongly_transitive).
    pub fn is_strongly_transitive_left<Q: Quantale<Elem = E>>(&self, q: &Q) -> bool {
        let n = self.size();
        triples(n).all(|(x, z, y)| {
            let step = q.residual(self.get(z, z), self.get(x, z));
            q.leq(&q.tensor(&step, self.get(z, y)), self.get(x, y))
        })
    }

    pub fn classify<Q: Quantale<Elem = E>>(&self, q: &Q) -> RelationClassification {
        let reflexive = self.is_reflexive(q);
        let quasi_reflexive = self.is_quasi_reflexive(q);
        let transitive = self.is_transitive(q);
        let strongly_transitive = self.is_strongly_transitive(q);
        RelationClassification {
            reflexive,
            quasi_reflexive,
            transitive,
            quasi_metric: reflexive && transitive,
            quasi2_metric: quasi_reflexive && transitive,
            strongly_transitive,
            partial_quasi_metric: quasi_reflexive && strongly_transitive,
        }
    }

    pub fn render<Q: ElemSyntax<Elem = E>>(&self, q: &Q) -> String {
        let mut out = format!("points {}\n", self.points.join(" "));
        for x in 0..self.size() {
            let row: Vec<String> = (0..self.size()).map(|y| q.render_elem(self.get(x, y))).collect();
            out.push_str(&format!("{}: {}\n", self.points[x], row.join(" ")));
        }
        out
    }

    pub fn parse<Q: ElemSyntax<Elem = E>>(q: &Q, text: &str) -> Result<Self, QRelError> {
        let mut points: Option<Vec<String>> = None;
        let mut rows: Vec<Option<Vec<E>>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let syntax = |message: String| QRelError::Syntax { line, message };
            if let Some(rest) = content.strip_prefix("points") {
                if points.is_some() {
                    return Err(syntax("points declared twice".into()));
                }
                let names: Vec<String> = rest.split_whitespace().map(String::from).collect();
                rows = vec![None; names.len()];
                points = Some(names);
                continue;
            }
            let names = points.as_ref().ok_or_else(|| syntax("`points` must come first".into()))?;
            let (label, cells) = content.split_once(':').ok_or_else(|| syntax("expected `<point>: <entries>`".into()))?;
            let x = names
                .iter()
                .position(|p| p == label.trim())
                .ok_or_else(|| syntax(format!("unknown point `{}`", label.trim())))?;
            let row = cells
                .split_whitespace()
                .map(|c| q.parse_elem(c).ok_or_else(|| syntax(format!("invalid entry `{c}`"))))
                .collect::<Result<Vec<E>, _>>()?;
            if row.len() != names.len() {
                return Err(syntax(format!("row has {} entries, expected {}", row.len(), names.len())));
            }
            if rows[x].replace(row).is_some() {
                return Err(syntax(format!("row `{}` given twice", label.trim())));
            }
        }
        let names = points.ok_or(QRelError::Syntax { line: 0, message: "missing `points`".into() })?;
        let mut entries = Vec::with_capacity(names.len() * names.len());
        for (name, row) in names.iter().zip(rows) {
            entries.extend(row.ok_or(QRelError::Syntax { line: 0, message: format!("missing row `{name}`") })?);
        }
        Self::new(names, entries)
    }
}

impl<E: fmt::Debug> fmt::Debug for QRel<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.points.len();
        let rows: Vec<&[E]> = (0..n).map(|x| &self.entries[x * n..(x + 1) * n]).collect();
        f.debug_list().entries(rows).finish()
    }
}

fn triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n).flat_map(move |x| (0..n).flat_map(move |z| (0..n).map(move |y| (x, z, y))))
}

/// A Q-closed ternary relation `ρ ⊆ X × Q × X` over a finite quantale,
/// stored as its set of members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedTernary {
    size: usize,
    members: BTreeSet<(usize, usize, usize)>,
}

impl ClosedTernary {
    /// `ρ^s = {(x, a, y) | a ⊑ s(x, y)}`.
    pub fn of_relation(q: &FiniteQuantale, s: &QRel<usize>) -> Self {
        let n = s.size();
        let mut members = BTreeSet::new();
        for x in 0..n {
            for y in 0..n {
                for a in q.elements() {
                    if q.leq(&a, s.get(x, y)) {
                        members.insert((x, a, y));
                    }
                }
            }
        }
        Self { size: n, members }
    }

    pub fn from_members(size: usize, members: BTreeSet<(usize, usize, usize)>) -> Self {
        Self { size, members }
    }

    pub fn contains(&self, x: usize, a: usize, y: usize) -> bool {
        self.members.contains(&(x, a, y))
    }

    /// `(x, a, y) ∈ ρ` and `a' ⊑ a` imply `(x, a', y) ∈ ρ`.
    pub fn is_down_closed(&self, q: &FiniteQuantale) -> bool {
        self.members
            .iter()
            .all(|&(x, a, y)| q.elements().filter(|b| q.leq(b, &a)).all(|b| self.contains(x, b, y)))
    }

    /// Every fibre `{a | (x, a, y) ∈ ρ}` contains its join (including the
    /// empty join `⊥`).
    pub fn is_join_closed(&self, q: &FiniteQuantale) -> bool {
        (0..self.size).all(|x| {
            (0..self.size).all(|y| {
                let fibre: Vec<usize> = q.elements().filter(|&a| self.contains(x, a, y)).collect();
                self.contains(x, q.join_all(&fibre), y)
            })
        })
    }

    /// `ρ̂(x, y) = ⋁{a | (x, a, y) ∈ ρ}`.
    pub fn hat(&self, q: &FiniteQuantale, points: Arc<Vec<String>>) -> QRel<usize> {
        let n = self.size;
        let entries = (0..n * n)
            .map(|i| {
                let fibre: Vec<usize> = q.elements().filter(|&a| self.contains(i / n, a, i % n)).collect();
                q.join_all(&fibre)
            })
            .collect();
        QRel::with_points(points, entries).expect("square")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::{ExtNonNegReal, Lawvere};
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type L = Lawvere<BigRational>;
    type D = ExtNonNegReal<BigRational>;

    fn d(x: i64) -> D {
        D::new(BigRational::from_integer(x.into())).unwrap()
    }

    fn inf() -> D {
        D::infinity()
    }

    fn rel(rows: Vec<Vec<D>>) -> QRel<D> {
        QRel::from_rows(rows).unwrap()
    }

    #[test]
    fn two_point_tensor_is_min_plus() {
        let q = L::new();
        let s = rel(vec![vec![d(0), d(1)], vec![d(2), d(0)]]);
        assert_eq!(s.tensor(&q, &s).unwrap(), s);
        let id = QRel::identity(&q, s.points().clone());
        assert_eq!(id.tensor(&q, &s).unwrap(), s);
        assert_eq!(s.tensor(&q, &id).unwrap(), s);
        let bot = QRel::constant(s.points().clone(), inf());
        assert_eq!(s.tensor(&q, &bot).unwrap(), bot);
    }

    // entrywise brute force of the defining formula for s ⟜ s
    #[test]
    fn right_residual_matches_formula() {
        let q = L::new();
        let s = rel(vec![vec![d(0), d(1)], vec![d(2), d(0)]]);
        let r = s.residual_right(&q, &s).unwrap();
        for x in 0..2 {
            for z in 0..2 {
                let mut best: Option<D> = None;
                for y in 0..2 {
                    let a = s.get(z, y).finite().unwrap().clone();
                    let b = s.get(x, y).finite().unwrap().clone();
                    let v = if b > a { d(0).add(&D::new(b - a).unwrap()) } else { d(0) };
                    best = Some(match best {
                        None => v,
                        Some(prev) => prev.num_max(v),
                    });
                }
                assert_eq!(r.get(x, z), &best.unwrap());
            }
        }
        // s is already a quasi-metric, so q^l = s
        assert_eq!(s.obs_quasi_left(&q), s);
    }

    fn random_rel(rng: &mut ChaCha8Rng, n: usize) -> QRel<D> {
        let rows = (0..n)
            .map(|_| (0..n).map(|_| if rng.gen_bool(0.1) { inf() } else { d(rng.gen_range(0..6)) }).collect())
            .collect();
        rel(rows)
    }

    #[test]
    fn residual_adjunction_on_random_matrices() {
        let q = L::new();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..4);
            let u = random_rel(&mut rng, n);
            let s = random_rel(&mut rng, n);
            let l = u.residual_left(&q, &s).unwrap();
            assert!(u.tensor(&q, &l).unwrap().below(&q, &s));
            let r = s.residual_right(&q, &u).unwrap();
            assert!(r.tensor(&q, &u).unwrap().below(&q, &s));
            // observational quasi-metrics are quasi-metrics and sit below Θ
            for m in [s.obs_quasi_left(&q), s.obs_quasi_right(&q)] {
                assert!(m.classify(&q).quasi_metric, "{m:?}");
            }
            assert!(s.obs_quasi_left(&q).below(&q, &s.theta_left(&q)));
            assert!(s.obs_quasi_right(&q).below(&q, &s.theta_right(&q)));
            assert!(s.obs_quasi_left(&q).tensor(&q, &s).unwrap().below(&q, &s));
            assert!(s.tensor(&q, &s.obs_quasi_right(&q)).unwrap().below(&q, &s));
        }
    }

    #[test]
    fn theta_examples() {
        let q = L::new();
        let s = rel(vec![vec![d(1), d(3)], vec![d(3), d(1)]]);
        assert_eq!(s.theta_right(&q).get(0, 1), &d(2));
        let refl = rel(vec![vec![d(0), d(4)], vec![inf(), d(0)]]);
        assert_eq!(refl.theta_right(&q), refl);
        let one = rel(vec![vec![d(0)]]);
        assert_eq!(one.residual_left(&q, &one).unwrap(), one);
        let zeros = rel(vec![vec![d(0), d(0)], vec![d(0), d(0)]]);
        assert_eq!(zeros.obs_quasi_left(&q), zeros);
    }

    #[test]
    fn classification_examples() {
        let q = L::new();
        let id: QRel<D> = QRel::identity(&q, Arc::new(vec!["a".into(), "b".into()]));
        let c = id.classify(&q);
        assert!(c.reflexive && c.quasi_reflexive && c.transitive && c.quasi_metric);
        assert!(c.quasi2_metric && c.strongly_transitive && c.partial_quasi_metric);

        let s = rel(vec![vec![d(1), d(1)], vec![inf(), d(1)]]);
        let c = s.classify(&q);
        assert!(c.quasi_reflexive && c.transitive && !c.reflexive);

        // s(1,0) = 0 is tighter than s(1,1) = 5
        let s = rel(vec![vec![d(0), d(1)], vec![d(0), d(5)]]);
        let c = s.classify(&q);
        assert!(!c.quasi_reflexive);
        assert!(!c.partial_quasi_metric && !c.quasi2_metric);
    }

    #[test]
    fn text_round_trip() {
        let q = L::new();
        let text = "points a b\na: 0 1\nb: 2.5 inf\n";
        let s = QRel::parse(&q, text).unwrap();
        assert_eq!(s.get(1, 0), &D::new(BigRational::new(5.into(), 2.into())).unwrap());
        assert_eq!(s.render(&q), text);
        assert!(matches!(QRel::parse(&q, "points a\na: 0 1\n"), Err(QRelError::Syntax { line: 2, .. })));
        assert!(matches!(QRel::parse(&q, "points a b\na: 0 1\n"), Err(QRelError::Syntax { .. })));
    }

    #[test]
    fn closure_bijection_on_chain() {
        let q = FiniteQuantale::truncated_chain(1);
        let points = Arc::new(vec!["x".to_string(), "y".to_string()]);
        let total = q.len().pow(4);
        for code in 0..total {
            let mut c = code;
            let entries: Vec<usize> = (0..4)
                .map(|_| {
                    let e = c % q.len();
                    c /= q.len();
                    e
                })
                .collect();
            let s = QRel::with_points(points.clone(), entries).unwrap();
            let rho = ClosedTernary::of_relation(&q, &s);
            assert!(rho.is_down_closed(&q) && rho.is_join_closed(&q));
            assert_eq!(rho.hat(&q, points.clone()), s);
        }
    }

    #[test]
    fn domain_mismatch_is_reported() {
        let q = L::new();
        let a = rel(vec![vec![d(0)]]);
        let b = rel(vec![vec![d(0), d(0)], vec![d(0), d(0)]]);
        assert_eq!(a.tensor(&q, &b), Err(QRelError::DomainMismatch { left: 1, right: 2 }));
    }
}
