//! Quantales and quantale-valued relations.
//!
//! Everything here is order-theoretic in the quantale's own order: `⊤` is the
//! best (smallest) distance and joins pick the tighter of two bounds.

mod finite;
mod lawvere;
mod props;
mod qrel;

use std::fmt::Debug;

pub use finite::{
    quantale_validate, FiniteQuantale, Law, LawViolation, QuantaleError, QuantaleTables, StructuralError,
};
pub use lawvere::{ExtNonNegReal, Lawvere};
pub use props::{check_section3_props, check_section3_props_with_bound, Clause, ClauseReport, Counterexample, PropsError, PropsReport, DEFAULT_BOUND};
pub use qrel::{ClosedTernary, QRel, QRelError, RelationClassification};

use crate::scalar::{parse_decimal, render_rational, Scalar};

/// A commutative, unital (`1 = ⊤`), divisible quantale.
pub trait Quantale {
    type Elem: Clone + PartialEq + Debug + Send + Sync;

    fn top(&self) -> Self::Elem;
    fn bottom(&self) -> Self::Elem;
    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    fn tensor(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// `a ⊸ b`, the largest `z` with `z ⊗ a ⊑ b`.
    fn residual(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn meet(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn unit(&self) -> Self::Elem {
        self.top()
    }

    fn join_all<'a, I>(&self, items: I) -> Self::Elem
    where
        I: IntoIterator<Item = &'a Self::Elem>,
        Self::Elem: 'a,
    {
        items.into_iter().fold(self.bottom(), |acc, x| self.join(&acc, x))
    }

    fn meet_all<'a, I>(&self, items: I) -> Self::Elem
    where
        I: IntoIterator<Item = &'a Self::Elem>,
        Self::Elem: 'a,
    {
        items.into_iter().fold(self.top(), |acc, x| self.meet(&acc, x))
    }
}

/// Textual element syntax, used by the relation file format.
pub trait ElemSyntax: Quantale {
    fn parse_elem(&self, text: &str) -> Option<Self::Elem>;
    fn render_elem(&self, e: &Self::Elem) -> String;
}

impl ElemSyntax for FiniteQuantale {
    fn parse_elem(&self, text: &str) -> Option<usize> {
        self.element(text)
    }

    fn render_elem(&self, e: &usize) -> String {
        self.name(*e).to_string()
    }
}

impl<S: Scalar> ElemSyntax for Lawvere<S> {
    fn parse_elem(&self, text: &str) -> Option<ExtNonNegReal<S>> {
        match text {
            "inf" | "∞" | "+inf" => Some(ExtNonNegReal::infinity()),
            _ => ExtNonNegReal::new(S::from_rational(&parse_decimal(text)?)),
        }
    }

    fn render_elem(&self, e: &ExtNonNegReal<S>) -> String {
        match e.finite().and_then(Scalar::to_rational) {
            Some(r) => render_rational(&r),
            None => e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn adjunction_holds<Q: Quantale>(q: &Q, a: &Q::Elem, b: &Q::Elem, c: &Q::Elem) -> bool {
        q.leq(c, &q.residual(a, b)) == q.leq(&q.tensor(c, a), b)
    }

    #[test]
    fn finite_builtins_satisfy_adjunction_exhaustively() {
        let mut qs = vec![FiniteQuantale::boolean()];
        qs.extend((0..4).map(FiniteQuantale::truncated_chain));
        for q in &qs {
            for a in q.elements() {
                for b in q.elements() {
                    assert!(q.leq(&q.tensor(&q.residual(&a, &b), &a), &b));
                    assert!(q.leq(&b, &q.residual(&a, &q.tensor(&b, &a))));
                    for c in q.elements() {
                        assert!(adjunction_holds(q, &a, &b, &c));
                    }
                }
            }
        }
    }

    fn rational() -> impl Strategy<Value = ExtNonNegReal<BigRational>> {
        prop_oneof![
            9 => (0i64..400, 1i64..20).prop_map(|(n, d)| {
                ExtNonNegReal::new(BigRational::new(BigInt::from(n), BigInt::from(d))).unwrap()
            }),
            1 => Just(ExtNonNegReal::infinity()),
        ]
    }

    proptest! {
        #[test]
        fn lawvere_adjunction(a in rational(), b in rational(), c in rational()) {
            let q = Lawvere::<BigRational>::new();
            prop_assert!(adjunction_holds(&q, &a, &b, &c));
            prop_assert!(q.leq(&q.tensor(&q.residual(&a, &b), &a), &b));
            prop_assert!(q.leq(&b, &q.residual(&a, &q.tensor(&b, &a))));
        }
    }

    #[test]
    fn lawvere_element_syntax() {
        let q = Lawvere::<BigRational>::new();
        assert!(q.parse_elem("inf").unwrap().is_infinite());
        assert_eq!(q.render_elem(&q.parse_elem("2.5").unwrap()), "2.5");
        assert_eq!(Lawvere::<f64>::new().render_elem(&ExtNonNegReal::from_float(0.1).unwrap()), "0.1");
        assert!(q.parse_elem("-1").is_none());
    }
}
