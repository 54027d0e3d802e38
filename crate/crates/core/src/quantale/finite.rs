//! User-supplied finite quantales given as order and tensor tables.
//!
//! # Text format
//!
//! One declaration per line, `#` starts a comment:
//!
//! ```text
//! carrier bot top        # element names, whitespace separated
//! order bot top          # bot ⊑ top; the reflexive-transitive closure is taken
//! tensor bot bot = bot   # one line per ordered pair, all n² pairs required
//! tensor bot top = bot
//! tensor top bot = bot
//! tensor top top = top
//! unit top
//! ```

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::Quantale;

/// Malformed tables, reported before any law is evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error("empty carrier")]
    EmptyCarrier,
    #[error("duplicate element name `{0}`")]
    DuplicateElement(String),
    #[error("order table has {found} entries, expected {expected}")]
    OrderArity { expected: usize, found: usize },
    #[error("tensor table has {found} entries, expected {expected}")]
    TensorArity { expected: usize, found: usize },
    #[error("tensor entry {entry} is outside the carrier")]
    TensorOutOfCarrier { entry: usize },
    #[error("unit {0} is outside the carrier")]
    UnitOutOfCarrier(usize),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown element `{name}` on line {line}")]
    UnknownElement { line: usize, name: String },
    #[error("missing tensor entry for ({0}, {1})")]
    MissingTensor(String, String),
    #[error("conflicting tensor entries for ({0}, {1})")]
    ConflictingTensor(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Law {
    OrderReflexive,
    OrderAntisymmetric,
    OrderTransitive,
    JoinExists,
    MeetExists,
    Associative,
    Commutative,
    UnitLaw,
    UnitIsTop,
    DistributesOverJoin,
    BottomAbsorbs,
    Divisible,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Law::OrderReflexive => "order reflexivity",
            Law::OrderAntisymmetric => "order antisymmetry",
            Law::OrderTransitive => "order transitivity",
            Law::JoinExists => "join existence",
            Law::MeetExists => "meet existence",
            Law::Associative => "associativity",
            Law::Commutative => "commutativity",
            Law::UnitLaw => "unit law",
            Law::UnitIsTop => "unit is top",
            Law::DistributesOverJoin => "distributivity over binary joins",
            Law::BottomAbsorbs => "distributivity over the empty join",
            Law::Divisible => "divisibility",
        };
        f.write_str(s)
    }
}

/// A violated law together with the element tuple that witnesses it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct LawViolation {
    pub law: Law,
    pub witness: Vec<String>,
}

impl fmt::Display for LawViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails at ({})", self.law, self.witness.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantaleError {
    #[error(transparent)]
    Structural(#[from] StructuralError),
    #[error("quantale laws violated: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Laws(Vec<LawViolation>),
}

/// Raw, structurally checked tables. Laws are not yet known to hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantaleTables {
    names: Vec<String>,
    leq: Vec<bool>,
    tensor: Vec<usize>,
    unit: usize,
}

impl QuantaleTables {
    /// `leq[a * n + b]` is `a ⊑ b`; `tensor[a * n + b]` is `a ⊗ b`.
    pub fn new(
        names: Vec<String>,
        leq: Vec<bool>,
        tensor: Vec<usize>,
        unit: usize,
    ) -> Result<Self, StructuralError> {
        let n = names.len();
        if n == 0 {
            return Err(StructuralError::EmptyCarrier);
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(StructuralError::DuplicateElement(name.clone()));
            }
        }
        if leq.len() != n * n {
            return Err(StructuralError::OrderArity { expected: n * n, found: leq.len() });
        }
        if tensor.len() != n * n {
            return Err(StructuralError::TensorArity { expected: n * n, found: tensor.len() });
        }
        if let Some(entry) = tensor.iter().position(|&e| e >= n) {
            return Err(StructuralError::TensorOutOfCarrier { entry });
        }
        if unit >= n {
            return Err(StructuralError::UnitOutOfCarrier(unit));
        }
        Ok(Self { names, leq, tensor, unit })
    }

    pub fn parse(text: &str) -> Result<Self, StructuralError> {
        let mut names: Option<Vec<String>> = None;
        let mut order_pairs = Vec::new();
        let mut tensor_entries: Vec<(usize, usize, usize, usize)> = Vec::new();
        let mut unit = None;

        let lookup = |names: &Option<Vec<String>>, line: usize, name: &str| {
            let names = names.as_ref().ok_or_else(|| StructuralError::Syntax {
                line,
                message: "`carrier` must come first".into(),
            })?;
            names.iter().position(|n| n == name).ok_or_else(|| StructuralError::UnknownElement {
                line,
                name: name.to_string(),
            })
        };

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let words: Vec<&str> = content.split_whitespace().collect();
            match words[0] {
                "carrier" => {
                    if names.is_some() {
                        return Err(StructuralError::Syntax { line, message: "carrier declared twice".into() });
                    }
                    names = Some(words[1..].iter().map(|w| w.to_string()).collect());
                }
                "order" => {
                    if words.len() != 3 {
                        return Err(StructuralError::Syntax { line, message: "expected `order <lower> <upper>`".into() });
                    }
                    let a = lookup(&names, line, words[1])?;
                    let b = lookup(&names, line, words[2])?;
                    order_pairs.push((a, b));
                }
                "tensor" => {
                    if words.len() != 5 || words[3] != "=" {
                        return Err(StructuralError::Syntax { line, message: "expected `tensor <a> <b> = <c>`".into() });
                    }
                    let a = lookup(&names, line, words[1])?;
                    let b = lookup(&names, line, words[2])?;
                    let c = lookup(&names, line, words[4])?;
                    tensor_entries.push((a, b, c, line));
                }
                "unit" => {
                    if words.len() != 2 {
                        return Err(StructuralError::Syntax { line, message: "expected `unit <element>`".into() });
                    }
                    unit = Some(lookup(&names, line, words[1])?);
                }
                other => {
                    return Err(StructuralError::Syntax { line, message: format!("unknown declaration `{other}`") });
                }
            }
        }

        let names = names.ok_or(StructuralError::EmptyCarrier)?;
        let n = names.len();
        if n == 0 {
            return Err(StructuralError::EmptyCarrier);
        }
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for (a, b) in order_pairs {
            leq[a * n + b] = true;
        }
        // Warshall closure
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        let mut tensor: Vec<Option<usize>> = vec![None; n * n];
        for (a, b, c, _) in tensor_entries {
            match tensor[a * n + b] {
                Some(prev) if prev != c => {
                    return Err(StructuralError::ConflictingTensor(names[a].clone(), names[b].clone()))
                }
                _ => tensor[a * n + b] = Some(c),
            }
        }
        let mut table = Vec::with_capacity(n * n);
        for (i, e) in tensor.iter().enumerate() {
            match e {
                Some(c) => table.push(*c),
                None => {
                    return Err(StructuralError::MissingTensor(names[i / n].clone(), names[i % n].clone()))
                }
            }
        }
        let unit = unit.ok_or(StructuralError::Syntax { line: 0, message: "missing `unit` declaration".into() })?;
        Self::new(names, leq, table, unit)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.len() + b]
    }

    fn tensor(&self, a: usize, b: usize) -> usize {
        self.tensor[a * self.len() + b]
    }

    fn lub(&self, a: usize, b: usize) -> Option<usize> {
        let n = self.len();
        let upper: Vec<usize> = (0..n).filter(|&u| self.leq(a, u) && self.leq(b, u)).collect();
        upper.iter().copied().find(|&u| upper.iter().all(|&v| self.leq(u, v)))
    }

    fn glb(&self, a: usize, b: usize) -> Option<usize> {
        let n = self.len();
        let lower: Vec<usize> = (0..n).filter(|&l| self.leq(l, a) && self.leq(l, b)).collect();
        lower.iter().copied().find(|&l| lower.iter().all(|&v| self.leq(v, l)))
    }

    fn witness(&self, items: &[usize]) -> Vec<String> {
        items.iter().map(|&i| self.names[i].clone()).collect()
    }
}

/// Checks every quantale law on the tables. An empty list means the tables
/// describe a commutative, unital (unit = top), divisible quantale.
///
/// Order and lattice violations short-circuit the algebraic checks, which
/// need joins to be defined.
pub fn quantale_validate(t: &QuantaleTables) -> Vec<LawViolation> {
    let n = t.len();
    let mut out = Vec::new();
    let mut push = |law, items: &[usize]| out.push(LawViolation { law, witness: t.witness(items) });

    for a in 0..n {
        if !t.leq(a, a) {
            push(Law::OrderReflexive, &[a]);
        }
        for b in 0..n {
            if a != b && t.leq(a, b) && t.leq(b, a) {
                push(Law::OrderAntisymmetric, &[a, b]);
            }
            for c in 0..n {
                if t.leq(a, b) && t.leq(b, c) && !t.leq(a, c) {
                    push(Law::OrderTransitive, &[a, b, c]);
                }
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    let mut push = |law, items: &[usize]| out.push(LawViolation { law, witness: t.witness(items) });
    for a in 0..n {
        for b in 0..n {
            if t.lub(a, b).is_none() {
                push(Law::JoinExists, &[a, b]);
            }
            if t.glb(a, b).is_none() {
                push(Law::MeetExists, &[a, b]);
            }
        }
    }
    if !out.is_empty() {
        return out;
    }

    let lat = Lattice::of(t);
    let mut push = |law, items: &[usize]| out.push(LawViolation { law, witness: t.witness(items) });
    if t.unit != lat.top {
        push(Law::UnitIsTop, &[t.unit, lat.top]);
    }
    for a in 0..n {
        if t.tensor(t.unit, a) != a || t.tensor(a, t.unit) != a {
            push(Law::UnitLaw, &[a]);
        }
        if t.tensor(a, lat.bottom) != lat.bottom {
            push(Law::BottomAbsorbs, &[a]);
        }
        for b in 0..n {
            if t.tensor(a, b) != t.tensor(b, a) {
                push(Law::Commutative, &[a, b]);
            }
            for c in 0..n {
                if t.tensor(t.tensor(a, b), c) != t.tensor(a, t.tensor(b, c)) {
                    push(Law::Associative, &[a, b, c]);
                }
                let lhs = t.tensor(a, lat.join(b, c));
                let rhs = lat.join(t.tensor(a, b), t.tensor(a, c));
                if lhs != rhs {
                    push(Law::DistributesOverJoin, &[a, b, c]);
                }
            }
        }
    }
    // Residuals are only meaningful once tensor is monotone; distributivity
    // gives that, so divisibility is checked last.
    if out.is_empty() {
        let residual = residual_table(t, &lat);
        let mut push = |law, items: &[usize]| out.push(LawViolation { law, witness: t.witness(items) });
        for x in 0..n {
            for y in 0..n {
                let divides = t.tensor(y, residual[y * n + x]) == x;
                if t.leq(x, y) != divides {
                    push(Law::Divisible, &[x, y]);
                }
            }
        }
    }
    out
}

struct Lattice {
    n: usize,
    join: Vec<usize>,
    meet: Vec<usize>,
    top: usize,
    bottom: usize,
}

impl Lattice {
    fn of(t: &QuantaleTables) -> Self {
        let n = t.len();
        let mut join = vec![0; n * n];
        let mut meet = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                join[a * n + b] = t.lub(a, b).expect("lattice checked");
                meet[a * n + b] = t.glb(a, b).expect("lattice checked");
            }
        }
        let top = (0..n).fold(0, |acc, x| join[acc * n + x]);
        let bottom = (0..n).fold(0, |acc, x| meet[acc * n + x]);
        Self { n, join, meet, top, bottom }
    }

    fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.n + b]
    }
}

fn residual_table(t: &QuantaleTables, lat: &Lattice) -> Vec<usize> {
    let n = t.len();
    let mut res = vec![lat.bottom; n * n];
    for a in 0..n {
        for b in 0..n {
            res[a * n + b] = (0..n)
                .filter(|&z| t.leq(t.tensor(z, a), b))
                .fold(lat.bottom, |acc, z| lat.join(acc, z));
        }
    }
    res
}

/// A validated finite quantale with precomputed lattice and residual tables.
#[derive(Debug, Clone)]
pub struct FiniteQuantale {
    tables: QuantaleTables,
    join: Vec<usize>,
    meet: Vec<usize>,
    residual: Vec<usize>,
    top: usize,
    bottom: usize,
}

impl FiniteQuantale {
    pub fn new(tables: QuantaleTables) -> Result<Self, QuantaleError> {
        let violations = quantale_validate(&tables);
        if !violations.is_empty() {
            return Err(QuantaleError::Laws(violations));
        }
        let lat = Lattice::of(&tables);
        let residual = residual_table(&tables, &lat);
        Ok(Self { join: lat.join, meet: lat.meet, residual, top: lat.top, bottom: lat.bottom, tables })
    }

    pub fn parse(text: &str) -> Result<Self, QuantaleError> {
        Self::new(QuantaleTables::parse(text)?)
    }

    /// The two-element frame `{bot, top}` with meet as tensor.
    pub fn boolean() -> Self {
        let names = vec!["bot".to_string(), "top".to_string()];
        let leq = vec![true, true, false, true];
        let tensor = vec![0, 0, 0, 1];
        Self::new(QuantaleTables::new(names, leq, tensor, 1).expect("well formed")).expect("boolean laws")
    }

    /// `{0, 1, …, k, inf}` ordered by `>=` with addition capped at `inf`.
    pub fn truncated_chain(k: usize) -> Self {
        let n = k + 2;
        let inf = k + 1;
        let mut names: Vec<String> = (0..=k).map(|i| i.to_string()).collect();
        names.push("inf".into());
        let mut leq = vec![false; n * n];
        let mut tensor = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                leq[a * n + b] = a >= b;
                tensor[a * n + b] = if a == inf || b == inf || a + b > k { inf } else { a + b };
            }
        }
        Self::new(QuantaleTables::new(names, leq, tensor, 0).expect("well formed")).expect("chain laws")
    }

    /// Built-in by name: `bool`, or `chainK` for the truncated chain with
    /// `K + 1` elements (`chain3` is `{0, 1, inf}`).
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "bool" | "boolean" => Some(Self::boolean()),
            _ => {
                let size: usize = name.strip_prefix("chain")?.parse().ok()?;
                (size >= 2).then(|| Self::truncated_chain(size - 2))
            }
        }
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    pub fn name(&self, e: usize) -> &str {
        &self.tables.names[e]
    }

    pub fn element(&self, name: &str) -> Option<usize> {
        self.tables.names.iter().position(|n| n == name)
    }

    pub fn tables(&self) -> &QuantaleTables {
        &self.tables
    }
}

impl Quantale for FiniteQuantale {
    type Elem = usize;

    fn top(&self) -> usize {
        self.top
    }

    fn bottom(&self) -> usize {
        self.bottom
    }

    fn leq(&self, a: &usize, b: &usize) -> bool {
        self.tables.leq(*a, *b)
    }

    fn tensor(&self, a: &usize, b: &usize) -> usize {
        self.tables.tensor(*a, *b)
    }

    fn residual(&self, a: &usize, b: &usize) -> usize {
        self.residual[*a * self.len() + *b]
    }

    fn join(&self, a: &usize, b: &usize) -> usize {
        self.join[*a * self.len() + *b]
    }

    fn meet(&self, a: &usize, b: &usize) -> usize {
        self.meet[*a * self.len() + *b]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOOL_TEXT: &str = "\
# two-element frame
carrier bot top
order bot top
tensor bot bot = bot
tensor bot top = bot
tensor top bot = bot
tensor top top = top
unit top
";

    #[test]
    fn boolean_is_valid() {
        let q = FiniteQuantale::boolean();
        assert!(quantale_validate(q.tables()).is_empty());
        let parsed = FiniteQuantale::parse(BOOL_TEXT).unwrap();
        assert_eq!(parsed.tables(), q.tables());
    }

    #[test]
    fn chain_is_valid() {
        for k in 0..5 {
            let q = FiniteQuantale::truncated_chain(k);
            assert!(quantale_validate(q.tables()).is_empty(), "chain k={k}");
        }
    }

    #[test]
    fn chain_residual_of_infinity_is_capped() {
        // {0,1,2,inf}: 1 -o inf is the least z with z + 1 > 2, i.e. 2.
        let q = FiniteQuantale::truncated_chain(2);
        let one = q.element("1").unwrap();
        let inf = q.element("inf").unwrap();
        assert_eq!(q.name(q.residual(&one, &inf)), "2");
        let zero = q.element("0").unwrap();
        assert_eq!(q.name(q.residual(&zero, &inf)), "inf");
    }

    #[test]
    fn perturbed_chain_reports_associativity_witness() {
        // {0,1,2,inf}; change 1 ⊗ 2 from inf to 2
        let good = FiniteQuantale::truncated_chain(2);
        let t = good.tables().clone();
        let n = t.len();
        let mut tensor = t.tensor.clone();
        tensor[n + 2] = 2;
        let bad = QuantaleTables::new(t.names.clone(), t.leq.clone(), tensor, t.unit).unwrap();
        let violations = quantale_validate(&bad);
        // exhaustive oracle: recompute associativity failures directly
        let mut expected = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if bad.tensor(bad.tensor(a, b), c) != bad.tensor(a, bad.tensor(b, c)) {
                        expected.push(bad.witness(&[a, b, c]));
                    }
                }
            }
        }
        let found: Vec<_> = violations
            .iter()
            .filter(|v| v.law == Law::Associative)
            .map(|v| v.witness.clone())
            .collect();
        assert_eq!(found, expected);
        assert!(found.contains(&vec!["1".to_string(), "1".to_string(), "2".to_string()]));
        assert!(violations.iter().any(|v| v.law == Law::Commutative));
    }

    #[test]
    fn structural_errors_come_first() {
        let missing = "carrier a b\norder a b\ntensor a a = a\nunit b\n";
        assert!(matches!(
            QuantaleTables::parse(missing),
            Err(StructuralError::MissingTensor(_, _))
        ));
        let unknown = "carrier a\ntensor a z = a\n";
        assert!(matches!(
            QuantaleTables::parse(unknown),
            Err(StructuralError::UnknownElement { line: 2, .. })
        ));
        assert!(matches!(
            QuantaleTables::new(vec!["a".into()], vec![true], vec![3], 0),
            Err(StructuralError::TensorOutOfCarrier { .. })
        ));
        assert!(matches!(QuantaleTables::parse("# nothing\n"), Err(StructuralError::EmptyCarrier)));
    }

    #[test]
    fn non_divisible_quantale_is_rejected() {
        // bot < a < b < top, every product off the unit collapses to bot:
        // a ⊑ b but b ⊗ (b -o a) = b ⊗ b = bot.
        let mut text = String::from("carrier bot a b top\norder bot a\norder a b\norder b top\nunit top\n");
        for x in ["bot", "a", "b", "top"] {
            for y in ["bot", "a", "b", "top"] {
                let z = match (x, y) {
                    ("top", other) | (other, "top") => other,
                    _ => "bot",
                };
                text.push_str(&format!("tensor {x} {y} = {z}\n"));
            }
        }
        match FiniteQuantale::parse(&text).unwrap_err() {
            QuantaleError::Laws(v) => {
                assert!(v.iter().all(|v| v.law == Law::Divisible), "{v:?}");
                assert!(v.contains(&LawViolation { law: Law::Divisible, witness: vec!["a".into(), "b".into()] }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn builtin_names() {
        assert_eq!(FiniteQuantale::builtin("bool").unwrap().len(), 2);
        assert_eq!(FiniteQuantale::builtin("chain3").unwrap().len(), 3);
        assert_eq!(FiniteQuantale::builtin("chain4").unwrap().len(), 4);
        assert!(FiniteQuantale::builtin("chain1").is_none());
        assert!(FiniteQuantale::builtin("nope").is_none());
    }
}
