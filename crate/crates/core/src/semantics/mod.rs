//! The set-theoretic evaluator and the difference evaluator.

mod eval;
pub mod prim;
mod table;
mod triple;
mod value;

use thiserror::Error;

use crate::syntax::Name;

pub use eval::{diff_eval, diff_eval_closed, eval, eval_closed};
pub use prim::{prim_eval, prim_modulus};
pub use table::{distance, probe_table, ProbeRow};
pub use triple::{DiffTriple, Image};
pub use value::{Diff, Env, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("`{prim}`: {message}")]
    Domain { prim: String, message: String },
    #[error("`{prim}` expects {expected} argument(s), found {found}")]
    Arity { prim: String, expected: usize, found: usize },
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error("shape mismatch: {0}")]
    Shape(String),
}
