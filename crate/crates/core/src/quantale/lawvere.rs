//! The Lawvere quantale `[0, +∞]`: reversed order, addition as tensor.

use std::cmp::Ordering;
use std::fmt;
use std::marker::PhantomData;

use super::Quantale;
use crate::scalar::Scalar;

/// A non-negative extended real. Numerically ordered by [`num_cmp`]; the
/// quantale order ([`Quantale::leq`]) is the reverse.
///
/// [`num_cmp`]: ExtNonNegReal::num_cmp
#[derive(Clone, PartialEq)]
pub struct ExtNonNegReal<S>(Repr<S>);

#[derive(Clone, PartialEq)]
enum Repr<S> {
    Finite(S),
    Infinity,
}

impl<S: Scalar> ExtNonNegReal<S> {
    /// `None` when `value` is negative.
    pub fn new(value: S) -> Option<Self> {
        (!value.is_negative()).then_some(Self(Repr::Finite(value)))
    }

    pub fn zero() -> Self {
        Self(Repr::Finite(S::zero()))
    }

    pub fn infinity() -> Self {
        Self(Repr::Infinity)
    }

    /// Accepts `+∞`; rejects NaN and negatives.
    pub fn from_float(x: f64) -> Option<Self> {
        if x == f64::INFINITY {
            Some(Self::infinity())
        } else {
            S::from_float(x).and_then(Self::new)
        }
    }

    /// `|x|` as a distance.
    pub fn abs_of(x: S) -> Self {
        Self(Repr::Finite(x.abs()))
    }

    pub fn finite(&self) -> Option<&S> {
        match &self.0 {
            Repr::Finite(v) => Some(v),
            Repr::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.0, Repr::Infinity)
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0, Repr::Finite(v) if v.is_zero())
    }

    pub fn to_float(&self) -> f64 {
        match &self.0 {
            Repr::Finite(v) => v.to_float(),
            Repr::Infinity => f64::INFINITY,
        }
    }

    /// Numeric comparison, `∞` largest.
    pub fn num_cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Infinity, Repr::Infinity) => Ordering::Equal,
            (Repr::Infinity, _) => Ordering::Greater,
            (_, Repr::Infinity) => Ordering::Less,
            (Repr::Finite(a), Repr::Finite(b)) => a.partial_cmp(b).unwrap_or(Ordering::Equal),
        }
    }

    pub fn num_le(&self, other: &Self) -> bool {
        self.num_cmp(other) != Ordering::Greater
    }

    /// Addition, `∞` absorbing. This is the quantale tensor.
    pub fn add(&self, other: &Self) -> Self {
        match (&self.0, &other.0) {
            (Repr::Finite(a), Repr::Finite(b)) => Self(Repr::Finite(a.clone() + b.clone())),
            _ => Self::infinity(),
        }
    }

    /// Truncated subtraction `max(self - other, 0)`; `∞ - ∞ = 0`.
    pub fn monus(&self, other: &Self) -> Self {
        match (&self.0, &other.0) {
            (_, Repr::Infinity) => Self::zero(),
            (Repr::Infinity, _) => Self::infinity(),
            (Repr::Finite(a), Repr::Finite(b)) => {
                let d = a.clone() - b.clone();
                if d.is_negative() {
                    Self::zero()
                } else {
                    Self(Repr::Finite(d))
                }
            }
        }
    }

    /// Product with `0 · ∞ = 0` (the sup of an empty spread is zero).
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        match (&self.0, &other.0) {
            (Repr::Finite(a), Repr::Finite(b)) => Self(Repr::Finite(a.clone() * b.clone())),
            _ => Self::infinity(),
        }
    }

    /// Division by a positive finite scalar.
    pub fn div_scalar(&self, d: &S) -> Self {
        match &self.0 {
            Repr::Finite(a) => Self(Repr::Finite(a.clone() / d.clone())),
            Repr::Infinity => Self::infinity(),
        }
    }

    pub fn num_max(self, other: Self) -> Self {
        if self.num_cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn num_min(self, other: Self) -> Self {
        if self.num_cmp(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    /// Residual `self ⊸ other`: the least `z` with `z + self >= other`.
    pub fn residual(&self, other: &Self) -> Self {
        if self.is_infinite() {
            return Self::zero();
        }
        other.monus(self)
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl FnOnce(&S) -> T) -> ExtNonNegReal<T> {
        match &self.0 {
            Repr::Finite(v) => ExtNonNegReal::new(f(v)).unwrap_or_else(ExtNonNegReal::zero),
            Repr::Infinity => ExtNonNegReal::infinity(),
        }
    }
}

impl<S: Scalar> fmt::Debug for ExtNonNegReal<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<S: Scalar> fmt::Display for ExtNonNegReal<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Finite(v) => write!(f, "{v}"),
            Repr::Infinity => f.write_str("inf"),
        }
    }
}

/// The Lawvere quantale over the scalar carrier `S`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lawvere<S>(PhantomData<S>);

impl<S> Lawvere<S> {
    pub fn new() -> Self {
        Self(PhantomData)
    }
}

impl<S: Scalar> Quantale for Lawvere<S> {
    type Elem = ExtNonNegReal<S>;

    fn top(&self) -> Self::Elem {
        ExtNonNegReal::zero()
    }

    fn bottom(&self) -> Self::Elem {
        ExtNonNegReal::infinity()
    }

    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        b.num_le(a)
    }

    fn tensor(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.add(b)
    }

    fn residual(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.residual(b)
    }

    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.clone().num_min(b.clone())
    }

    fn meet(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.clone().num_max(b.clone())
    }
}
