use serde::{Serialize, Serializer};

use super::value::{Diff, Value};
use super::EvalError;
use crate::quantale::ExtNonNegReal;
use crate::scalar::Scalar;

/// One row of a probe table: the output of `a·x·b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub input: f64,
    #[serde(serialize_with = "distance")]
    pub input_error: f64,
    #[serde(serialize_with = "distance")]
    pub output_bound: f64,
}

/// Writes a distance as a JSON number, or the string `"inf"`.
pub fn distance<Ser: Serializer>(d: &f64, s: Ser) -> Result<Ser::Ok, Ser::Error> {
    if d.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*d)
    }
}

/// Tabulates a first-order distance function at `(x, b)` probes.
pub fn probe_table<S: Scalar>(a: &Diff<S>, probes: &[(S, ExtNonNegReal<S>)]) -> Result<Vec<ProbeRow>, EvalError> {
    probes
        .iter()
        .map(|(x, b)| {
            let out = a.apply(&Value::Real(x.clone()), &Diff::Real(b.clone()))?;
            Ok(ProbeRow { input: x.to_float(), input_error: b.to_float(), output_bound: out.as_real()?.to_float() })
        })
        .collect()
}
