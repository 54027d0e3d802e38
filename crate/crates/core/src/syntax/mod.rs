//! The calculus: types, terms, typing, the derivative transform and the
//! equality theory.

pub mod derive;
pub mod normalize;
pub mod parse;
pub mod prim;
pub mod random;
pub mod subst;
pub mod term;
pub mod types;
pub mod typing;

pub use derive::{derivative_term, DeriveError};
pub use normalize::{normalize, term_equal, NormError};
pub use parse::{parse, parse_definitions, parse_type, parse_with, Definition, ParseError, Pos};
pub use prim::{ArgDomain, ModulusRule, PrimKind, PrimRef, PrimRegistry, PrimitiveDecl};
pub use subst::{fresh_name, substitute, substitute_one};
pub use term::{dot, is_dotted, Name, Term, TypingContext};
pub use types::{partial_type, Type};
pub use typing::{typecheck, TypeError};
