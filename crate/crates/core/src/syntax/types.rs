use std::fmt;
use std::sync::Arc;

/// `A, B ::= Real | A × B | A ⇒ B`
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Real,
    Prod(Arc<Type>, Arc<Type>),
    Arrow(Arc<Type>, Arc<Type>),
}

impl Type {
    pub fn prod(a: Type, b: Type) -> Self {
        Type::Prod(Arc::new(a), Arc::new(b))
    }

    pub fn arrow(a: Type, b: Type) -> Self {
        Type::Arrow(Arc::new(a), Arc::new(b))
    }

    /// `Real ⇒ Real`
    pub fn real_fn() -> Self {
        Type::arrow(Type::Real, Type::Real)
    }

    /// The type of differences: `∂Real = Real`, `∂(A ⇒ B) = A ⇒ ∂A ⇒ ∂B`,
    /// `∂(A × B) = ∂A × ∂B`.
    pub fn partial(&self) -> Type {
        match self {
            Type::Real => Type::Real,
            Type::Prod(a, b) => Type::prod(a.partial(), b.partial()),
            Type::Arrow(a, b) => Type::arrow((**a).clone(), Type::arrow(a.partial(), b.partial())),
        }
    }

    /// Nesting depth of arrows in argument position plus one for each arrow,
    /// `0` for `Real`.
    pub fn arrow_depth(&self) -> usize {
        match self {
            Type::Real => 0,
            Type::Prod(a, b) => a.arrow_depth().max(b.arrow_depth()),
            Type::Arrow(a, b) => (a.arrow_depth() + 1).max(b.arrow_depth()),
        }
    }

    pub fn is_first_order(&self) -> bool {
        match self {
            Type::Real => true,
            Type::Prod(a, b) => a.is_first_order() && b.is_first_order(),
            Type::Arrow(a, b) => a.arrow_depth() == 0 && b.is_first_order(),
        }
    }

    /// ASCII rendering accepted by the parser (`->`, `*`).
    pub fn ascii(&self) -> String {
        render(self, "->", "*")
    }
}

/// `partial_type` as a free function.
pub fn partial_type(a: &Type) -> Type {
    a.partial()
}

fn render(t: &Type, arrow: &str, times: &str) -> String {
    match t {
        Type::Real => "Real".into(),
        Type::Prod(a, b) => {
            let l = match **a {
                Type::Arrow(..) => format!("({})", render(a, arrow, times)),
                _ => render(a, arrow, times),
            };
            let r = match **b {
                Type::Real => render(b, arrow, times),
                _ => format!("({})", render(b, arrow, times)),
            };
            format!("{l} {times} {r}")
        }
        Type::Arrow(a, b) => {
            let l = match **a {
                Type::Arrow(..) => format!("({})", render(a, arrow, times)),
                _ => render(a, arrow, times),
            };
            format!("{l} {arrow} {}", render(b, arrow, times))
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, "⇒", "×"))
    }
}

impl fmt::Debug for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
