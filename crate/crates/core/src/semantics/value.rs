use std::fmt;
use std::sync::Arc;

use super::EvalError;
use crate::quantale::ExtNonNegReal;
use crate::scalar::{render_rational, Scalar};
use crate::syntax::{Name, Term};

/// A persistent association list; later bindings shadow earlier ones.
pub struct Env<T>(Option<Arc<Node<T>>>);

struct Node<T> {
    name: Name,
    value: T,
    next: Option<Arc<Node<T>>>,
}

impl<T> Clone for Env<T> {
    fn clone(&self) -> Self {
        Env(self.0.clone())
    }
}

impl<T> Default for Env<T> {
    fn default() -> Self {
        Env(None)
    }
}

impl<T> Env<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&self, name: impl Into<Name>, value: T) -> Self {
        Env(Some(Arc::new(Node { name: name.into(), value, next: self.0.clone() })))
    }

    pub fn lookup(&self, x: &str) -> Option<&T> {
        let mut cur = self.0.as_deref();
        while let Some(node) = cur {
            if &*node.name == x {
                return Some(&node.value);
            }
            cur = node.next.as_deref();
        }
        None
    }

    /// The bindings, innermost first.
    pub fn iter(&self) -> impl Iterator<Item = (&Name, &T)> {
        let mut cur = self.0.as_deref();
        std::iter::from_fn(move || {
            let node = cur?;
            cur = node.next.as_deref();
            Some((&node.name, &node.value))
        })
    }

    /// Maps every binding, keeping shadowing intact; `None` if `f` fails on
    /// any binding.
    pub fn try_map<U>(&self, mut f: impl FnMut(&T) -> Option<U>) -> Option<Env<U>> {
        let entries: Vec<(&Name, &T)> = self.iter().collect();
        let mut out = Env::new();
        for (n, v) in entries.into_iter().rev() {
            out = out.bind(n.clone(), f(v)?);
        }
        Some(out)
    }
}

impl<T> FromIterator<(Name, T)> for Env<T> {
    fn from_iter<I: IntoIterator<Item = (Name, T)>>(iter: I) -> Self {
        iter.into_iter().fold(Env::new(), |env, (n, v)| env.bind(n, v))
    }
}

type NativeFn<S> = Arc<dyn Fn(&Value<S>) -> Result<Value<S>, EvalError> + Send + Sync>;
type DiffFn<S> = Arc<dyn Fn(&Value<S>, &Diff<S>) -> Result<Diff<S>, EvalError> + Send + Sync>;

/// Denotations: reals, pairs and functions. Functions are either closures
/// over a term or host functions.
#[derive(Clone)]
pub enum Value<S> {
    Real(S),
    Pair(Arc<Value<S>>, Arc<Value<S>>),
    Closure { env: Env<Value<S>>, param: Name, body: Arc<Term> },
    Native { name: Arc<str>, f: NativeFn<S> },
}

impl<S: Scalar> Value<S> {
    pub fn real(x: S) -> Self {
        Value::Real(x)
    }

    pub fn pair(a: Value<S>, b: Value<S>) -> Self {
        Value::Pair(Arc::new(a), Arc::new(b))
    }

    pub fn native(
        name: &str,
        f: impl Fn(&Value<S>) -> Result<Value<S>, EvalError> + Send + Sync + 'static,
    ) -> Self {
        Value::Native { name: name.into(), f: Arc::new(f) }
    }

    /// A host function `Real ⇒ Real`.
    pub fn real_fn(name: &str, f: impl Fn(&S) -> S + Send + Sync + 'static) -> Self {
        let label: Arc<str> = name.into();
        let l2 = label.clone();
        Value::Native {
            name: label,
            f: Arc::new(move |v| match v {
                Value::Real(x) => Ok(Value::Real(f(x))),
                _ => Err(EvalError::Shape(format!("`{l2}` expects a real argument"))),
            }),
        }
    }

    pub fn as_real(&self) -> Result<&S, EvalError> {
        match self {
            Value::Real(x) => Ok(x),
            other => Err(EvalError::Shape(format!("expected a real, found {other}"))),
        }
    }

    pub fn fst(&self) -> Result<&Value<S>, EvalError> {
        match self {
            Value::Pair(a, _) => Ok(a),
            other => Err(EvalError::Shape(format!("expected a pair, found {other}"))),
        }
    }

    pub fn snd(&self) -> Result<&Value<S>, EvalError> {
        match self {
            Value::Pair(_, b) => Ok(b),
            other => Err(EvalError::Shape(format!("expected a pair, found {other}"))),
        }
    }

    pub fn apply(&self, arg: &Value<S>) -> Result<Value<S>, EvalError> {
        match self {
            Value::Closure { env, param, body } => super::eval(&env.bind(param.clone(), arg.clone()), body),
            Value::Native { f, .. } => f(arg),
            other => Err(EvalError::Shape(format!("expected a function, found {other}"))),
        }
    }
}

impl<S: Scalar> fmt::Display for Value<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(x) => match x.to_rational() {
                Some(r) if S::EXACT => f.write_str(&render_rational(&r)),
                _ => write!(f, "{x}"),
            },
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Closure { param, body, .. } => write!(f, "<closure \\{param}. {body}>"),
            Value::Native { name, .. } => write!(f, "<{name}>"),
        }
    }
}

impl<S: Scalar> fmt::Debug for Value<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Distances: an element of the quantale `Q_A`, shaped by `A`.
#[derive(Clone)]
pub enum Diff<S> {
    Real(ExtNonNegReal<S>),
    Pair(Arc<Diff<S>>, Arc<Diff<S>>),
    Fun(DiffFn<S>),
}

impl<S: Scalar> Diff<S> {
    pub fn real(d: ExtNonNegReal<S>) -> Self {
        Diff::Real(d)
    }

    pub fn pair(a: Diff<S>, b: Diff<S>) -> Self {
        Diff::Pair(Arc::new(a), Arc::new(b))
    }

    pub fn fun(f: impl Fn(&Value<S>, &Diff<S>) -> Result<Diff<S>, EvalError> + Send + Sync + 'static) -> Self {
        Diff::Fun(Arc::new(f))
    }

    /// The top element of `Q_A`: distance zero everywhere.
    pub fn zero(ty: &crate::syntax::Type) -> Self {
        use crate::syntax::Type;
        match ty {
            Type::Real => Diff::Real(ExtNonNegReal::zero()),
            Type::Prod(a, b) => Diff::pair(Diff::zero(a), Diff::zero(b)),
            Type::Arrow(_, b) => {
                let b = (**b).clone();
                Diff::fun(move |_, _| Ok(Diff::zero(&b)))
            }
        }
    }

    /// The bottom element of `Q_A`: distance `∞` everywhere.
    pub fn infinite(ty: &crate::syntax::Type) -> Self {
        use crate::syntax::Type;
        match ty {
            Type::Real => Diff::Real(ExtNonNegReal::infinity()),
            Type::Prod(a, b) => Diff::pair(Diff::infinite(a), Diff::infinite(b)),
            Type::Arrow(_, b) => {
                let b = (**b).clone();
                Diff::fun(move |_, _| Ok(Diff::infinite(&b)))
            }
        }
    }

    pub fn as_real(&self) -> Result<&ExtNonNegReal<S>, EvalError> {
        match self {
            Diff::Real(d) => Ok(d),
            _ => Err(EvalError::Shape("expected a real distance".into())),
        }
    }

    pub fn fst(&self) -> Result<&Diff<S>, EvalError> {
        match self {
            Diff::Pair(a, _) => Ok(a),
            _ => Err(EvalError::Shape("expected a pair of distances".into())),
        }
    }

    pub fn snd(&self) -> Result<&Diff<S>, EvalError> {
        match self {
            Diff::Pair(_, b) => Ok(b),
            _ => Err(EvalError::Shape("expected a pair of distances".into())),
        }
    }

    /// `a · x · b`
    pub fn apply(&self, x: &Value<S>, b: &Diff<S>) -> Result<Diff<S>, EvalError> {
        match self {
            Diff::Fun(f) => f(x, b),
            _ => Err(EvalError::Shape("expected a distance function".into())),
        }
    }

    /// The pointwise tensor `a ⊗ a'`: addition at `Real`, componentwise on
    /// pairs, `(a ⊗ a')·x·b = a·x·b ⊗ a'·x·b` on functions.
    pub fn tensor(&self, other: &Diff<S>) -> Result<Diff<S>, EvalError> {
        Ok(match (self, other) {
            (Diff::Real(a), Diff::Real(b)) => Diff::Real(a.add(b)),
            (Diff::Pair(a1, b1), Diff::Pair(a2, b2)) => Diff::pair(a1.tensor(a2)?, b1.tensor(b2)?),
            (Diff::Fun(_), Diff::Fun(_)) => {
                let (l, r) = (self.clone(), other.clone());
                Diff::fun(move |x, b| l.apply(x, b)?.tensor(&r.apply(x, b)?))
            }
            _ => return Err(EvalError::Shape("tensor of distances of different shapes".into())),
        })
    }
}

impl<S: Scalar> Diff<S> {
    /// Reads a value of type `∂A` as a distance at `A`.
    pub fn from_value(ty: &crate::syntax::Type, v: &Value<S>) -> Result<Self, EvalError> {
        use crate::syntax::Type;
        match ty {
            Type::Real => {
                let x = v.as_real()?;
                ExtNonNegReal::new(x.clone())
                    .map(Diff::Real)
                    .ok_or_else(|| EvalError::Shape(format!("negative distance {v}")))
            }
            Type::Prod(a, b) => Ok(Diff::pair(Diff::from_value(a, v.fst()?)?, Diff::from_value(b, v.snd()?)?)),
            Type::Arrow(a, b) => {
                let (a, b, f) = ((**a).clone(), (**b).clone(), v.clone());
                Ok(Diff::fun(move |x, e| Diff::from_value(&b, &f.apply(x)?.apply(&e.to_value(&a)?)?)))
            }
        }
    }

    /// The value of type `∂A` denoting this distance at `A`. Distances
    /// that reach `∞` have none.
    pub fn to_value(&self, ty: &crate::syntax::Type) -> Result<Value<S>, EvalError> {
        use crate::syntax::Type;
        match (ty, self) {
            (Type::Real, Diff::Real(d)) => {
                d.finite().cloned().map(Value::Real).ok_or_else(|| EvalError::Shape("infinite distance".into()))
            }
            (Type::Prod(a, b), Diff::Pair(l, r)) => Ok(Value::pair(l.to_value(a)?, r.to_value(b)?)),
            (Type::Arrow(a, b), Diff::Fun(_)) => {
                let (a, b, d) = ((**a).clone(), (**b).clone(), self.clone());
                Ok(Value::native("distance", move |x| {
                    let (a, b, d, x) = (a.clone(), b.clone(), d.clone(), x.clone());
                    Ok(Value::native("distance", move |e| d.apply(&x, &Diff::from_value(&a, e)?)?.to_value(&b)))
                }))
            }
            _ => Err(EvalError::Shape(format!("distance does not have the shape of {ty}"))),
        }
    }
}

impl<S: Scalar> fmt::Debug for Diff<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diff::Real(d) => write!(f, "{d}"),
            Diff::Pair(a, b) => write!(f, "({a:?}, {b:?})"),
            Diff::Fun(_) => f.write_str("<distance function>"),
        }
    }
}
