//! The logical-relation families ρ, γ, η and δ.
//!
//! Membership at `Real` is decided exactly. At arrow types the universally
//! quantified clauses are instantiated at a finite [`ProbeSet`], so a
//! [`Verdict`] is either a definitive falsification with a witness or
//! consistency relative to the probes.
//!
//! All checks run over `f64`. A Real-level comparison `|x − x′| ≤ a` is
//! accepted up to a relative slack of `slack · (1 + |x| + |x′|)`, taken
//! from the probe configuration.

mod check;
mod probes;
mod selfdist;
mod verdict;

use thiserror::Error;

use crate::semantics::EvalError;
use crate::syntax::{Type, TypeError};

pub use check::{
    check_delta, check_eta, check_eta_transitivity, check_fundamental, check_gamma, check_rho,
    check_theorem_approx, eta_transitivity_split, Decomposition, SelfProbes,
};
pub use probes::{function_library, generate_probes, Probe, ProbeConfig, ProbeSet};
pub use selfdist::{estimate_self_distance, vertical_distance, Provenance, SelfDistanceEstimate};
pub use verdict::{Image, Relation, Step, Verdict, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("no probes at type {0}")]
    MissingProbes(Type),
    #[error("probe libraries at {ty} (arrow depth {depth}) are not generated; supply probes explicitly")]
    UnsupportedDepth { ty: Type, depth: usize },
    #[error("hypothesis `{hypothesis}` fails: {witness}")]
    Hypothesis { hypothesis: String, witness: Box<Witness> },
    #[error("{0}")]
    Config(String),
}

/// Deepest arrow nesting for which probe libraries are generated.
pub const MAX_PROBE_DEPTH: usize = 2;
