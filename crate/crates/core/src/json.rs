//! JSON forms of vectors, histograms, instances and witnesses.
//!
//! Data values are written by name through the global [`Interner`]; values
//! without a name appear as `#<id>`. Integers are JSON numbers of arbitrary
//! size.
//!
//! ```text
//! vector    {"d": 2, "entries": {"a": [1, -2], "b": [0, 3]}}
//! histogram {"rows": ["a1", "a2"], "entries": [["a1", "b2", 2], ...]}
//! instance  {"d": 1, "V": [<vector>, ...], "x": <vector>}
//! witness   {"terms": [{"base": 0, "map": {"a": "b", ...}}, ...]}
//! ```

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Number, Value};
use thiserror::Error;

use crate::expressibility::{ExpressibilityInstance, PermutationSumWitness, WitnessTerm};
use crate::histogram::Histogram;
use crate::vector::{DataValue, DataVector, FiniteInjection, Interner, Tuple};

/// A structural problem in a JSON document, with the path to the offending
/// field.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct FormatError {
    pub path: String,
    pub message: String,
}

fn err<T>(path: &str, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError {
        path: if path.is_empty() {
            "$".to_string()
        } else {
            path.to_string()
        },
        message: message.into(),
    })
}

fn name(v: DataValue) -> String {
    Interner::global().display(v)
}

fn intern(s: &str) -> DataValue {
    Interner::global().intern(s)
}

pub fn bigint_to_json(x: &BigInt) -> Value {
    Value::Number(Number::from_str(&x.to_string()).expect("integer literals are valid numbers"))
}

fn bigint_from_json(v: &Value, path: &str) -> Result<BigInt, FormatError> {
    match v {
        Value::Number(n) => match BigInt::from_str(&n.to_string()) {
            Ok(x) => Ok(x),
            Err(_) => err(path, format!("expected an integer, found {n}")),
        },
        _ => err(path, "expected an integer"),
    }
}

fn field<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value, FormatError> {
    match obj {
        Value::Object(m) => match m.get(key) {
            Some(v) => Ok(v),
            None => err(path, format!("missing field `{key}`")),
        },
        _ => err(path, "expected an object"),
    }
}

fn usize_field(obj: &Value, key: &str, path: &str) -> Result<usize, FormatError> {
    let p = format!("{path}.{key}");
    let x = bigint_from_json(field(obj, key, path)?, &p)?;
    match x.to_usize() {
        Some(n) => Ok(n),
        None => err(&p, "expected a nonnegative integer"),
    }
}

pub fn vector_to_json(v: &DataVector) -> Value {
    let entries: Map<String, Value> = v
        .iter()
        .map(|(a, t)| {
            (
                name(a),
                Value::Array(t.entries().iter().map(bigint_to_json).collect()),
            )
        })
        .collect();
    json!({"d": v.dim(), "entries": entries})
}

pub fn vector_from_json(v: &Value) -> Result<DataVector, FormatError> {
    vector_at(v, "")
}

fn vector_at(v: &Value, path: &str) -> Result<DataVector, FormatError> {
    let dim = usize_field(v, "d", path)?;
    if dim == 0 {
        return err(&format!("{path}.d"), "dimension must be at least 1");
    }
    let Value::Object(entries) = field(v, "entries", path)? else {
        return err(&format!("{path}.entries"), "expected an object");
    };
    let mut out = Vec::with_capacity(entries.len());
    for (k, xs) in entries {
        let p = format!("{path}.entries.{k}");
        let Value::Array(xs) = xs else {
            return err(&p, "expected an array of integers");
        };
        if xs.len() != dim {
            return err(
                &p,
                format!("tuple has {} entries, expected {dim}", xs.len()),
            );
        }
        let tuple: Vec<BigInt> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| bigint_from_json(x, &format!("{p}[{i}]")))
            .collect::<Result<_, _>>()?;
        out.push((intern(k), Tuple::new(tuple)));
    }
    Ok(DataVector::from_entries(dim, out).expect("dimension checked"))
}

pub fn histogram_to_json(h: &Histogram) -> Value {
    let rows: Vec<Value> = h.rows().iter().map(|r| Value::String(name(*r))).collect();
    let entries: Vec<Value> = h
        .entries()
        .map(|(a, b, k)| json!([name(a), name(b), k]))
        .collect();
    json!({"rows": rows, "entries": entries})
}

/// Raw rows and entries; validation (and the degree) is left to
/// [`Histogram::validate`] so that its error says which condition failed.
pub type RawHistogram = (Vec<DataValue>, Vec<(DataValue, DataValue, u64)>);

pub fn histogram_from_json(v: &Value) -> Result<RawHistogram, FormatError> {
    let Value::Array(rows) = field(v, "rows", "")? else {
        return err("$.rows", "expected an array of names");
    };
    let rows: Vec<DataValue> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| match r {
            Value::String(s) => Ok(intern(s)),
            _ => err(&format!("$.rows[{i}]"), "expected a name"),
        })
        .collect::<Result<_, _>>()?;
    let Value::Array(entries) = field(v, "entries", "")? else {
        return err(
            "$.entries",
            "expected an array of [row, column, count] triples",
        );
    };
    let mut out = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let p = format!("$.entries[{i}]");
        match e.as_array().map(Vec::as_slice) {
            Some([Value::String(a), Value::String(b), k]) => {
                let k = bigint_from_json(k, &format!("{p}[2]"))?;
                let Some(k) = k.to_u64() else {
                    return err(&p, "count must be a nonnegative 64-bit integer");
                };
                out.push((intern(a), intern(b), k));
            }
            _ => return err(&p, "expected [row, column, count]"),
        }
    }
    Ok((rows, out))
}

pub fn instance_to_json(inst: &ExpressibilityInstance) -> Value {
    let base: Vec<Value> = inst.base().iter().map(vector_to_json).collect();
    json!({"d": inst.dim(), "V": base, "x": vector_to_json(inst.target())})
}

/// The `d` and `V` fields alone, as used for base-set files.
pub fn base_set_from_json(v: &Value) -> Result<(usize, Vec<DataVector>), FormatError> {
    let dim = usize_field(v, "d", "$")?;
    let Value::Array(vs) = field(v, "V", "$")? else {
        return err("$.V", "expected an array of vectors");
    };
    let mut base = Vec::with_capacity(vs.len());
    for (i, x) in vs.iter().enumerate() {
        let p = format!("$.V[{i}]");
        let vec = vector_at(x, &p)?;
        if vec.dim() != dim {
            return err(
                &format!("{p}.d"),
                format!("dimension {} differs from {dim}", vec.dim()),
            );
        }
        base.push(vec);
    }
    Ok((dim, base))
}

pub fn instance_from_json(v: &Value) -> Result<ExpressibilityInstance, FormatError> {
    let (dim, base) = base_set_from_json(v)?;
    let x = vector_at(field(v, "x", "$")?, "$.x")?;
    if x.dim() != dim {
        return err("$.x.d", format!("dimension {} differs from {dim}", x.dim()));
    }
    Ok(ExpressibilityInstance::new(base, x).expect("dimensions checked"))
}

pub fn injection_to_json(pi: &FiniteInjection) -> Value {
    let m: Map<String, Value> = pi
        .pairs()
        .map(|(a, b)| (name(a), Value::String(name(b))))
        .collect();
    Value::Object(m)
}

fn injection_at(v: &Value, path: &str) -> Result<FiniteInjection, FormatError> {
    let Value::Object(m) = v else {
        return err(path, "expected an object mapping names to names");
    };
    let mut pairs = Vec::with_capacity(m.len());
    for (k, b) in m {
        let Value::String(b) = b else {
            return err(&format!("{path}.{k}"), "expected a name");
        };
        pairs.push((intern(k), intern(b)));
    }
    match FiniteInjection::new(pairs) {
        Ok(pi) => Ok(pi),
        Err(e) => err(path, e.to_string()),
    }
}

pub fn witness_to_json(w: &PermutationSumWitness) -> Value {
    let terms: Vec<Value> = w
        .terms
        .iter()
        .map(|t| json!({"base": t.base, "map": injection_to_json(&t.map)}))
        .collect();
    json!({ "terms": terms })
}

pub fn witness_from_json(v: &Value) -> Result<PermutationSumWitness, FormatError> {
    let Value::Array(terms) = field(v, "terms", "$")? else {
        return err("$.terms", "expected an array of terms");
    };
    let mut out = Vec::with_capacity(terms.len());
    for (i, t) in terms.iter().enumerate() {
        let p = format!("$.terms[{i}]");
        let base = usize_field(t, "base", &p)?;
        let map = injection_at(field(t, "map", &p)?, &format!("{p}.map"))?;
        out.push(WitnessTerm { base, map });
    }
    Ok(PermutationSumWitness::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_round_trip_with_large_entries() {
        let text =
            r#"{"d": 2, "entries": {"a": [1, -2], "b": [0, 123456789012345678901234567890]}}"#;
        let v = vector_from_json(&serde_json::from_str(text).unwrap()).unwrap();
        assert_eq!(v.support_len(), 2);
        assert_eq!(
            v.value(intern("b")).entries()[1],
            BigInt::from_str("123456789012345678901234567890").unwrap()
        );
        assert_eq!(vector_from_json(&vector_to_json(&v)).unwrap(), v);
    }

    #[test]
    fn zero_tuples_are_dropped() {
        let v = vector_from_json(&json!({"d": 1, "entries": {"a": [0]}})).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn errors_point_at_the_field() {
        let e = vector_from_json(&json!({"d": 2, "entries": {"a": [1]}})).unwrap_err();
        assert_eq!(e.path, ".entries.a");
        let e = instance_from_json(&json!({"d": 1, "V": [{"d": 1, "entries": {"a": [1.5]}}], "x": {"d": 1, "entries": {}}}))
            .unwrap_err();
        assert_eq!(e.path, "$.V[0].entries.a[0]");
        let e = instance_from_json(&json!({"d": 1, "V": []})).unwrap_err();
        assert_eq!(e.to_string(), "$: missing field `x`");
        let e = witness_from_json(&json!({"terms": [{"base": 0, "map": {"a": "c", "b": "c"}}]}))
            .unwrap_err();
        assert_eq!(e.path, "$.terms[0].map");
    }

    #[test]
    fn instance_and_witness_round_trip() {
        let text = r#"{"d": 1, "V": [{"d": 1, "entries": {"red": [-1], "blue": [1]}}],
                       "x": {"d": 1, "entries": {"yellow": [-1], "blue": [1]}}}"#;
        let inst = instance_from_json(&serde_json::from_str(text).unwrap()).unwrap();
        assert_eq!(instance_from_json(&instance_to_json(&inst)).unwrap(), inst);
        let w = PermutationSumWitness::new(vec![WitnessTerm {
            base: 0,
            map: FiniteInjection::new([
                (intern("red"), intern("yellow")),
                (intern("blue"), intern("blue")),
            ])
            .unwrap(),
        }]);
        assert_eq!(witness_from_json(&witness_to_json(&w)).unwrap(), w);
        assert!(crate::expressibility::verify_witness(&inst, &w).unwrap());
    }

    #[test]
    fn histogram_fields() {
        let h = histogram_from_json(
            &json!({"rows": ["r1", "r2"], "entries": [["r1", "c1", 1], ["r2", "c2", 1]]}),
        )
        .unwrap();
        let h = Histogram::validate(h.0, h.1).unwrap();
        assert_eq!(h.degree(), 1);
        let again = histogram_from_json(&histogram_to_json(&h)).unwrap();
        assert_eq!(Histogram::validate(again.0, again.1).unwrap(), h);
        assert!(histogram_from_json(&json!({"rows": ["r"], "entries": [["r", "c", -1]]})).is_err());
    }
}
