//! Distance judgments `Γ ⊢ (t, a, t′) : A` between terms: a derivation
//! checker for the rule system, synthesis of derivations from `∂t`, and the
//! syntactic relation δ^log decided by normalization.

mod corpus;
mod derivation;
mod dlog;
mod synth;

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::syntax::{parse_type, parse_with, ParseError, PrimRegistry, Term, Type, TypingContext};

pub use corpus::{check_prop_deq, random_derivation, DeqConfig, DeqFailure, DeqReport};
pub use derivation::{check_derivation, InvalidNode};
pub use dlog::{check_dlog, DlogError, DlogProbe, DlogProbes};
pub use synth::{add_term, conv, quasi_reflexive, synthesize_fundamental, transitive, weaken, SynthError};

/// `Γ ⊢ (t, a, t′) : A`, with `Γ, ∂Γ ⊢ a : ∂A`.
#[derive(Clone, Debug)]
pub struct DistanceJudgment {
    pub ctx: TypingContext,
    pub t: Term,
    pub a: Term,
    pub t2: Term,
    pub ty: Type,
}

impl DistanceJudgment {
    pub fn new(ctx: TypingContext, t: Term, a: Term, t2: Term, ty: Type) -> Self {
        Self { ctx, t, a, t2, ty }
    }

    pub fn closed(t: Term, a: Term, t2: Term, ty: Type) -> Self {
        Self::new(TypingContext::new(), t, a, t2, ty)
    }

    /// Same subjects and type, up to α-equivalence; contexts compared
    /// entry by entry.
    pub fn same_as(&self, other: &DistanceJudgment) -> bool {
        self.ctx == other.ctx
            && self.ty == other.ty
            && self.t.alpha_eq(&other.t)
            && self.a.alpha_eq(&other.a)
            && self.t2.alpha_eq(&other.t2)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "ctx": self.ctx.to_string(),
            "t": self.t.to_string(),
            "a": self.a.to_string(),
            "t'": self.t2.to_string(),
            "type": self.ty.ascii(),
        })
    }

    pub fn from_json(v: &Json, prims: &PrimRegistry) -> Result<Self, DerivationError> {
        let field = |name: &str| {
            v.get(name).and_then(Json::as_str).ok_or_else(|| DerivationError::Missing(format!("conclusion.{name}")))
        };
        let term = |name: &str| {
            parse_with(field(name)?, prims).map_err(|error| DerivationError::Parse { field: name.into(), error })
        };
        let ctx = parse_context(field("ctx")?)?;
        let ty = parse_type(field("type")?).map_err(|error| DerivationError::Parse { field: "type".into(), error })?;
        Ok(Self { ctx, t: term("t")?, a: term("a")?, t2: term("t'")?, ty })
    }
}

impl fmt::Display for DistanceJudgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⊢ ({}, {}, {}) : {}", self.ctx, self.t, self.a, self.t2, self.ty)
    }
}

/// Parses `x:Real, f:Real -> Real` (empty for the empty context).
pub fn parse_context(text: &str) -> Result<TypingContext, DerivationError> {
    let mut ctx = TypingContext::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, ty) =
            part.split_once(':').ok_or_else(|| DerivationError::Context(format!("`{part}` is not `name:type`")))?;
        let ty = parse_type(ty).map_err(|error| DerivationError::Parse { field: "ctx".into(), error })?;
        ctx.push(name.trim(), ty);
    }
    Ok(ctx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Lit,
    Prim,
    Var,
    TransReal,
    QuasiReflReal,
    Abs,
    App,
    Fst,
    Snd,
    Pair,
    Conv,
}

impl Rule {
    pub const ALL: [Rule; 11] = [
        Rule::Lit,
        Rule::Prim,
        Rule::Var,
        Rule::TransReal,
        Rule::QuasiReflReal,
        Rule::Abs,
        Rule::App,
        Rule::Fst,
        Rule::Snd,
        Rule::Pair,
        Rule::Conv,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Rule::Lit => "lit",
            Rule::Prim => "prim",
            Rule::Var => "var",
            Rule::TransReal => "trans_real",
            Rule::QuasiReflReal => "quasi_refl_real",
            Rule::Abs => "abs",
            Rule::App => "app",
            Rule::Fst => "fst",
            Rule::Snd => "snd",
            Rule::Pair => "pair",
            Rule::Conv => "conv",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Rule {
    type Err = DerivationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::ALL.into_iter().find(|r| r.tag() == s).ok_or_else(|| DerivationError::UnknownRule(s.into()))
    }
}

/// A derivation tree. Premises are ordered as in the rules; `conv` has one
/// premise and discharges its equalities by normalization.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: DistanceJudgment,
    pub premises: Vec<Derivation>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DerivationError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("missing field `{0}`")]
    Missing(String),
    #[error("in `{field}`: {error}")]
    Parse { field: String, error: ParseError },
    #[error("bad context: {0}")]
    Context(String),
}

impl Derivation {
    pub fn new(rule: Rule, conclusion: DistanceJudgment, premises: Vec<Derivation>) -> Self {
        Self { rule, conclusion, premises }
    }

    pub fn leaf(rule: Rule, conclusion: DistanceJudgment) -> Self {
        Self::new(rule, conclusion, vec![])
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.premises.iter().map(Derivation::depth).max().unwrap_or(0)
    }

    /// The node at `path` (premise indices from the root).
    pub fn node(&self, path: &[usize]) -> Option<&Derivation> {
        path.iter().try_fold(self, |d, &i| d.premises.get(i))
    }

    pub fn to_json(&self) -> Json {
        json!({
            "rule": self.rule.tag(),
            "conclusion": self.conclusion.to_json(),
            "premises": self.premises.iter().map(Derivation::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Json, prims: &PrimRegistry) -> Result<Self, DerivationError> {
        let rule: Rule = v.get("rule").and_then(Json::as_str).ok_or_else(|| DerivationError::Missing("rule".into()))?.parse()?;
        let conclusion = DistanceJudgment::from_json(
            v.get("conclusion").ok_or_else(|| DerivationError::Missing("conclusion".into()))?,
            prims,
        )?;
        let premises = match v.get("premises") {
            None => vec![],
            Some(Json::Array(ps)) => ps.iter().map(|p| Derivation::from_json(p, prims)).collect::<Result<_, _>>()?,
            Some(_) => return Err(DerivationError::Json("`premises` must be an array".into())),
        };
        Ok(Self { rule, conclusion, premises })
    }

    pub fn from_json_str(text: &str, prims: &PrimRegistry) -> Result<Self, DerivationError> {
        let v: Json = serde_json::from_str(text).map_err(|e| DerivationError::Json(e.to_string()))?;
        Self::from_json(&v, prims)
    }
}
