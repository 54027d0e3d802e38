//! Exhaustive verification of the metric-law propositions on finite models.
//!
//! Every relation `s: X × X → Q` over an `n`-point set is enumerated and each
//! clause is evaluated as a biconditional (or implication) instance. Clauses
//! quantified existentially over quasi-metrics use the observational
//! quasi-metric as the witness in one direction and the full list of
//! quasi-metrics for the refutation direction.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::{FiniteQuantale, QRel};

/// Default cap on `|Q|^(n²)`.
pub const DEFAULT_BOUND: u64 = 1_000_000;

const KEPT_COUNTEREXAMPLES: usize = 16;
const CHUNK: u64 = 2048;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropsError {
    #[error("{elements}^({size}²) relations exceeds the enumeration bound {bound}")]
    Infeasible { elements: usize, size: usize, bound: u64 },
    #[error("size must be at least 1")]
    EmptyDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Clause {
    LeftObservationalIsQuasiMetric,
    RightObservationalIsQuasiMetric,
    LeftAboveIffTransitive,
    RightAboveIffTransitive,
    LeftBelowIffReflexive,
    RightBelowIffReflexive,
    LeftEqualIffQuasiMetric,
    RightEqualIffQuasiMetric,
    LeftTransitivity,
    RightTransitivity,
    DominatingQuasiMetricExists,
    NoDominatingQuasiMetric,
    LeftObservationalBelowTheta,
    RightObservationalBelowTheta,
    RightThetaEquivalence,
    LeftThetaEquivalence,
}

impl Clause {
    pub const ALL: [Clause; 16] = [
        Clause::LeftObservationalIsQuasiMetric,
        Clause::RightObservationalIsQuasiMetric,
        Clause::LeftAboveIffTransitive,
        Clause::RightAboveIffTransitive,
        Clause::LeftBelowIffReflexive,
        Clause::RightBelowIffReflexive,
        Clause::LeftEqualIffQuasiMetric,
        Clause::RightEqualIffQuasiMetric,
        Clause::LeftTransitivity,
        Clause::RightTransitivity,
        Clause::DominatingQuasiMetricExists,
        Clause::NoDominatingQuasiMetric,
        Clause::LeftObservationalBelowTheta,
        Clause::RightObservationalBelowTheta,
        Clause::RightThetaEquivalence,
        Clause::LeftThetaEquivalence,
    ];

    fn index(self) -> usize {
        Self::ALL.iter().position(|c| *c == self).expect("listed")
    }

    pub fn description(self) -> &'static str {
        match self {
            Clause::LeftObservationalIsQuasiMetric => "q^l is a quasi-metric",
            Clause::RightObservationalIsQuasiMetric => "q^r is a quasi-metric",
            Clause::LeftAboveIffTransitive => "q^l ⊒ s iff s transitive",
            Clause::RightAboveIffTransitive => "q^r ⊒ s iff s transitive",
            Clause::LeftBelowIffReflexive => "q^l ⊑ s iff s reflexive",
            Clause::RightBelowIffReflexive => "q^r ⊑ s iff s reflexive",
            Clause::LeftEqualIffQuasiMetric => "q^l = s iff s quasi-metric",
            Clause::RightEqualIffQuasiMetric => "q^r = s iff s quasi-metric",
            Clause::LeftTransitivity => "q^l ⊗ s ⊑ s",
            Clause::RightTransitivity => "s ⊗ q^r ⊑ s",
            Clause::DominatingQuasiMetricExists => {
                "quasi-reflexive transitive s: q^r or q^l dominates s and absorbs it"
            }
            Clause::NoDominatingQuasiMetric => {
                "quasi-reflexive non-transitive s: no quasi-metric dominates s and absorbs it"
            }
            Clause::LeftObservationalBelowTheta => "q^l ⊑ Θ^l",
            Clause::RightObservationalBelowTheta => "q^r ⊑ Θ^r",
            Clause::RightThetaEquivalence => {
                "s ⊑ Δ₁s: Θ^r ⊑ q^r iff Θ^r quasi-metric iff s partial quasi-metric"
            }
            Clause::LeftThetaEquivalence => {
                "s ⊑ Δ₂s: Θ^l ⊑ q^l iff Θ^l quasi-metric iff s left partial quasi-metric"
            }
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.description())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Enumeration index of the relation.
    pub index: u64,
    /// Rows of element names.
    pub relation: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClauseReport {
    pub clause: Clause,
    /// Relations the clause applied to (its hypothesis held).
    pub instances: u64,
    pub failures: u64,
    /// The first failures in enumeration order.
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropsReport {
    pub elements: usize,
    pub size: usize,
    pub relations: u64,
    pub quasi_metrics: usize,
    pub clauses: Vec<ClauseReport>,
}

impl PropsReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.failures == 0)
    }
}

impl fmt::Display for PropsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} relations over {} points ({} elements, {} quasi-metrics)",
            self.relations, self.size, self.elements, self.quasi_metrics
        )?;
        for c in &self.clauses {
            let status = if c.failures == 0 { "pass" } else { "FAIL" };
            writeln!(f, "  [{status}] {} ({} instances, {} failures)", c.clause, c.instances, c.failures)?;
            for ce in &c.counterexamples {
                let rows: Vec<String> = ce.relation.iter().map(|r| r.join(" ")).collect();
                writeln!(f, "      #{}: [{}]", ce.index, rows.join(" | "))?;
            }
        }
        Ok(())
    }
}

pub fn check_section3_props(q: &FiniteQuantale, size: usize) -> Result<PropsReport, PropsError> {
    check_section3_props_with_bound(q, size, DEFAULT_BOUND)
}

pub fn check_section3_props_with_bound(
    q: &FiniteQuantale,
    size: usize,
    bound: u64,
) -> Result<PropsReport, PropsError> {
    if size == 0 {
        return Err(PropsError::EmptyDomain);
    }
    let infeasible = PropsError::Infeasible { elements: q.len(), size, bound };
    let exponent = u32::try_from(size * size).map_err(|_| infeasible.clone())?;
    let total = (q.len() as u64).checked_pow(exponent).filter(|t| *t <= bound).ok_or(infeasible)?;

    let points: Arc<Vec<String>> = Arc::new((0..size).map(|i| i.to_string()).collect());
    let quasi_metrics: Vec<QRel<usize>> = (0..total)
        .map(|code| decode(q, &points, code))
        .filter(|s| s.is_reflexive(q) && s.is_transitive(q))
        .collect();

    let chunks: Vec<(u64, u64)> =
        (0..total.div_ceil(CHUNK)).map(|i| (i * CHUNK, ((i + 1) * CHUNK).min(total))).collect();
    let tallies: Vec<Tally> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut tally = Tally::new();
            for code in lo..hi {
                let s = decode(q, &points, code);
                evaluate(q, &s, &quasi_metrics, |clause, ok| tally.record(q, clause, ok, code, &s));
            }
            tally
        })
        .collect();

    let mut merged = Tally::new();
    for t in tallies {
        merged.merge(t);
    }
    let clauses = Clause::ALL
        .iter()
        .zip(merged.entries)
        .map(|(&clause, (instances, failures, counterexamples))| ClauseReport {
            clause,
            instances,
            failures,
            counterexamples,
        })
        .collect();
    Ok(PropsReport { elements: q.len(), size, relations: total, quasi_metrics: quasi_metrics.len(), clauses })
}

fn decode(q: &FiniteQuantale, points: &Arc<Vec<String>>, mut code: u64) -> QRel<usize> {
    let n = points.len();
    let base = q.len() as u64;
    let entries = (0..n * n)
        .map(|_| {
            let e = (code % base) as usize;
            code /= base;
            e
        })
        .collect();
    QRel::with_points(points.clone(), entries).expect("square")
}

struct Tally {
    entries: Vec<(u64, u64, Vec<Counterexample>)>,
}

impl Tally {
    fn new() -> Self {
        Self { entries: vec![(0, 0, Vec::new()); Clause::ALL.len()] }
    }

    fn record(&mut self, q: &FiniteQuantale, clause: Clause, ok: bool, index: u64, s: &QRel<usize>) {
        let entry = &mut self.entries[clause.index()];
        entry.0 += 1;
        if !ok {
            entry.1 += 1;
            if entry.2.len() < KEPT_COUNTEREXAMPLES {
                let n = s.size();
                let relation = (0..n).map(|x| (0..n).map(|y| q.name(*s.get(x, y)).to_string()).collect()).collect();
                entry.2.push(Counterexample { index, relation });
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        for (mine, theirs) in self.entries.iter_mut().zip(other.entries) {
            mine.0 += theirs.0;
            mine.1 += theirs.1;
            let room = KEPT_COUNTEREXAMPLES - mine.2.len();
            mine.2.extend(theirs.2.into_iter().take(room));
        }
    }
}

fn absorbs(q: &FiniteQuantale, s: &QRel<usize>, m: &QRel<usize>) -> bool {
    let right = s.tensor(q, m).expect("same domain").below(q, s);
    right || m.tensor(q, s).expect("same domain").below(q, s)
}

fn evaluate(
    q: &FiniteQuantale,
    s: &QRel<usize>,
    quasi_metrics: &[QRel<usize>],
    mut record: impl FnMut(Clause, bool),
) {
    let ql = s.obs_quasi_left(q);
    let qr = s.obs_quasi_right(q);
    let reflexive = s.is_reflexive(q);
    let transitive = s.is_transitive(q);
    let quasi_metric = reflexive && transitive;

    let is_qm = |m: &QRel<usize>| m.is_reflexive(q) && m.is_transitive(q);
    record(Clause::LeftObservationalIsQuasiMetric, is_qm(&ql));
    record(Clause::RightObservationalIsQuasiMetric, is_qm(&qr));
    record(Clause::LeftAboveIffTransitive, s.below(q, &ql) == transitive);
    record(Clause::RightAboveIffTransitive, s.below(q, &qr) == transitive);
    record(Clause::LeftBelowIffReflexive, ql.below(q, s) == reflexive);
    record(Clause::RightBelowIffReflexive, qr.below(q, s) == reflexive);
    record(Clause::LeftEqualIffQuasiMetric, (ql == *s) == quasi_metric);
    record(Clause::RightEqualIffQuasiMetric, (qr == *s) == quasi_metric);
    record(Clause::LeftTransitivity, ql.tensor(q, s).expect("same domain").below(q, s));
    record(Clause::RightTransitivity, s.tensor(q, &qr).expect("same domain").below(q, s));

    if s.is_quasi_reflexive(q) {
        if transitive {
            let witness = [&qr, &ql].into_iter().any(|m| is_qm(m) && s.below(q, m) && absorbs(q, s, m));
            record(Clause::DominatingQuasiMetricExists, witness);
        } else {
            let found = quasi_metrics.iter().any(|m| s.below(q, m) && absorbs(q, s, m));
            record(Clause::NoDominatingQuasiMetric, !found);
        }
    }

    let tl = s.theta_left(q);
    let tr = s.theta_right(q);
    record(Clause::LeftObservationalBelowTheta, ql.below(q, &tl));
    record(Clause::RightObservationalBelowTheta, qr.below(q, &tr));

    if s.is_quasi_reflexive(q) {
        let a = tr.below(q, &qr);
        let b = is_qm(&tr);
        let c = s.is_strongly_transitive(q);
        record(Clause::RightThetaEquivalence, a == b && b == c);
    }
    if s.is_quasi_reflexive_left(q) {
        let a = tl.below(q, &ql);
        let b = is_qm(&tl);
        let c = s.is_strongly_transitive_left(q);
        record(Clause::LeftThetaEquivalence, a == b && b == c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boolean_two_points_passes() {
        let r = check_section3_props(&FiniteQuantale::boolean(), 2).unwrap();
        assert_eq!(r.relations, 16);
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn chain3_two_points_passes() {
        let r = check_section3_props(&FiniteQuantale::truncated_chain(1), 2).unwrap();
        assert_eq!(r.relations, 81);
        assert!(r.passed(), "{r}");
        // on two points every quasi-reflexive relation is transitive
        for c in &r.clauses {
            assert_eq!(c.instances == 0, c.clause == Clause::NoDominatingQuasiMetric, "{r}");
        }
    }

    #[test]
    fn bound_is_enforced() {
        let q = FiniteQuantale::truncated_chain(2);
        assert!(matches!(check_section3_props(&q, 4), Err(PropsError::Infeasible { .. })));
        assert!(matches!(check_section3_props(&q, 0), Err(PropsError::EmptyDomain)));
        assert!(check_section3_props_with_bound(&q, 2, 100).is_err());
    }

    #[test]
    fn boolean_three_points_passes() {
        let r = check_section3_props(&FiniteQuantale::boolean(), 3).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.clauses.iter().all(|c| c.instances > 0), "{r}");
    }

    // The left-handed equivalence needs the mirrored hypotheses; with the
    // right-handed ones it fails on three points.
    #[test]
    fn left_equivalence_needs_mirrored_hypotheses() {
        let q = FiniteQuantale::boolean();
        let points: Arc<Vec<String>> = Arc::new(vec!["0".into(), "1".into(), "2".into()]);
        let total = (q.len() as u64).pow(9);
        let mismatch = (0..total).map(|c| decode(&q, &points, c)).any(|s| {
            s.is_quasi_reflexive(&q) && {
                let tl = s.theta_left(&q);
                let ql = s.obs_quasi_left(&q);
                tl.below(&q, &ql) != s.is_strongly_transitive(&q)
            }
        });
        assert!(mismatch);
    }
}
