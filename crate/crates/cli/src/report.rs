//! Report serialization: deterministic JSON (non-finite values as strings,
//! keys sorted by serde_json's BTreeMap) and CSV tables of scalar fields.

use serde_json::{Map, Value};
use std::fmt::Write as _;
use wolffkit_core::ScalarField;

/// JSON value for an f64; "inf"/"-inf"/"nan" as strings.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        serde_json::Number::from_f64(v)
            .map(Value::Number)
            .unwrap_or_else(|| Value::String("nan".into()))
    } else if v == f64::INFINITY {
        Value::String("inf".into())
    } else if v == f64::NEG_INFINITY {
        Value::String("-inf".into())
    } else {
        Value::String("nan".into())
    }
}

pub fn num_list(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|&v| num(v)).collect())
}

pub fn obj(entries: Vec<(&str, Value)>) -> Value {
    let mut map = Map::new();
    for (k, v) in entries {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

/// Summary statistics of a field, with +∞ entries counted separately.
pub fn field_summary(field: &ScalarField) -> Value {
    let finite: Vec<f64> = field
        .values
        .iter()
        .cloned()
        .filter(|v| v.is_finite())
        .collect();
    let infinite = field.values.len() - finite.len();
    let (min, max, mean) = if finite.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        (
            finite.iter().cloned().fold(f64::INFINITY, f64::min),
            finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            finite.iter().sum::<f64>() / finite.len() as f64,
        )
    };
    obj(vec![
        ("points", Value::from(field.values.len())),
        ("infinite", Value::from(infinite)),
        ("min", num(min)),
        ("max", num(max)),
        ("mean", num(mean)),
    ])
}

/// One row per grid point: coordinates then the value ("inf" for +∞).
pub fn field_csv(field: &ScalarField) -> String {
    let dim = field.grid.dim();
    let mut out = String::new();
    for k in 0..dim {
        let _ = write!(out, "x{k},");
    }
    out.push_str("value\n");
    for (i, v) in field.values.iter().enumerate() {
        let p = field.grid.point(i);
        for c in &p {
            let _ = write!(out, "{c},");
        }
        if v.is_finite() {
            let _ = writeln!(out, "{v}");
        } else if *v == f64::INFINITY {
            out.push_str("inf\n");
        } else {
            out.push_str("nan\n");
        }
    }
    out
}

/// Simple rows-of-named-values CSV (verify experiments, capacity tables).
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|v| {
                if v.is_finite() {
                    format!("{v}")
                } else if *v == f64::INFINITY {
                    "inf".to_string()
                } else {
                    "nan".to_string()
                }
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
