//! Difference triples `(f, a, f')` and the cartesian closed structure on them.

use super::value::{Diff, Value};
use super::EvalError;
use crate::scalar::Scalar;

/// A morphism `(f, a, f')`: two functions and a distance function between
/// them.
#[derive(Clone)]
pub struct DiffTriple<S> {
    pub f: Value<S>,
    pub a: Diff<S>,
    pub f2: Value<S>,
}

/// The image `(f·x, a·x·b, f'·x')` of an input triple.
pub type Image<S> = (Value<S>, Diff<S>, Value<S>);

impl<S: Scalar> DiffTriple<S> {
    pub fn new(f: Value<S>, a: Diff<S>, f2: Value<S>) -> Self {
        Self { f, a, f2 }
    }

    /// `(f·x, a·x·b, f'·x')`
    pub fn apply(&self, x: &Value<S>, b: &Diff<S>, x2: &Value<S>) -> Result<Image<S>, EvalError> {
        Ok((self.f.apply(x)?, self.a.apply(x, b)?, self.f2.apply(x2)?))
    }

    /// `(f·x, a·x·b, f·x')`, the second image the morphism contract requires.
    pub fn apply_left(&self, x: &Value<S>, b: &Diff<S>, x2: &Value<S>) -> Result<Image<S>, EvalError> {
        Ok((self.f.apply(x)?, self.a.apply(x, b)?, self.f.apply(x2)?))
    }

    /// `(id, i, id)` with `i·x·b = b`.
    pub fn identity() -> Self {
        let id = Value::native("id", |v| Ok(v.clone()));
        Self { f: id.clone(), a: Diff::fun(|_, b| Ok(b.clone())), f2: id }
    }

    /// `self` followed by `next`: `(g∘f, c, g'∘f')` with
    /// `c·x·b = next.a·(f·x)·(self.a·x·b)`.
    pub fn then(&self, next: &DiffTriple<S>) -> Self {
        let f = compose_values(&self.f, &next.f);
        let f2 = compose_values(&self.f2, &next.f2);
        let (first_f, first_a, second_a) = (self.f.clone(), self.a.clone(), next.a.clone());
        let a = Diff::fun(move |x, b| second_a.apply(&first_f.apply(x)?, &first_a.apply(x, b)?));
        Self { f, a, f2 }
    }

    /// `⟨m, n⟩ : Z → X × Y`.
    pub fn pairing(m: &DiffTriple<S>, n: &DiffTriple<S>) -> Self {
        let f = pair_values(&m.f, &n.f);
        let f2 = pair_values(&m.f2, &n.f2);
        let (ma, na) = (m.a.clone(), n.a.clone());
        let a = Diff::fun(move |z, c| Ok(Diff::pair(ma.apply(z, c)?, na.apply(z, c)?)));
        Self { f, a, f2 }
    }

    /// The first projection `X × Y → X`: `ϖ·(x, y)·(a, b) = a`.
    pub fn first() -> Self {
        let p = Value::native("fst", |v| Ok(v.fst()?.clone()));
        Self { f: p.clone(), a: Diff::fun(|_, b| Ok(b.fst()?.clone())), f2: p }
    }

    /// The second projection `X × Y → Y`.
    pub fn second() -> Self {
        let p = Value::native("snd", |v| Ok(v.snd()?.clone()));
        Self { f: p.clone(), a: Diff::fun(|_, b| Ok(b.snd()?.clone())), f2: p }
    }

    /// Currying of `m : Z × X → Y` into `Z → (X ⇒ Y)`, with
    /// `a^∧·z·c·x·b = a·(z, x)·(c, b)`.
    pub fn curry(&self) -> Self {
        let f = curry_value(&self.f);
        let f2 = curry_value(&self.f2);
        let a0 = self.a.clone();
        let a = Diff::fun(move |z, c| {
            let (a0, z, c) = (a0.clone(), z.clone(), c.clone());
            Ok(Diff::fun(move |x, b| a0.apply(&Value::pair(z.clone(), x.clone()), &Diff::pair(c.clone(), b.clone()))))
        });
        Self { f, a, f2 }
    }

    /// Evaluation `(X ⇒ Y) × X → Y`: `ε·(f, x)·(a, b) = a·x·b`.
    pub fn evaluation() -> Self {
        let ev = Value::native("eval", |v| v.fst()?.apply(v.snd()?));
        let a = Diff::fun(|v, d| d.fst()?.apply(v.snd()?, d.snd()?));
        Self { f: ev.clone(), a, f2: ev }
    }

    /// `m × n : X × X' → Y × Y'`, i.e. `⟨m ∘ ϖ₁, n ∘ ϖ₂⟩`.
    pub fn product(m: &DiffTriple<S>, n: &DiffTriple<S>) -> Self {
        Self::pairing(&Self::first().then(m), &Self::second().then(n))
    }
}

fn compose_values<S: Scalar>(first: &Value<S>, second: &Value<S>) -> Value<S> {
    let (f, g) = (first.clone(), second.clone());
    Value::native("compose", move |x| g.apply(&f.apply(x)?))
}

fn pair_values<S: Scalar>(f: &Value<S>, g: &Value<S>) -> Value<S> {
    let (f, g) = (f.clone(), g.clone());
    Value::native("pair", move |z| Ok(Value::pair(f.apply(z)?, g.apply(z)?)))
}

fn curry_value<S: Scalar>(f: &Value<S>) -> Value<S> {
    let f = f.clone();
    Value::native("curry", move |z| {
        let (f, z) = (f.clone(), z.clone());
        Ok(Value::native("curried", move |x| f.apply(&Value::pair(z.clone(), x.clone()))))
    })
}
