//! JSON form files.
//!
//! ```json
//! {"m": 2, "n": 2, "scalar": "real", "storage": "dense", "coefficients": [1, 0, 0, 1]}
//! {"m": 2, "n": 2, "scalar": "real", "storage": "sparse", "entries": [[1, 1, 1.0], [2, 2, 1.0]]}
//! ```
//!
//! Dense coefficients are row-major. Sparse indices are 1-based and
//! unspecified entries are 0.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::forms::MultilinearForm;

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| Error::format(name, "missing"))
}

fn positive_int(obj: &Map<String, Value>, name: &str) -> Result<usize> {
    field(obj, name)?
        .as_u64()
        .filter(|&v| v > 0)
        .map(|v| v as usize)
        .ok_or_else(|| Error::format(name, "expected a positive integer"))
}

fn finite_number(v: &Value, name: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::format(name, format!("expected a finite number, got {v}")))
}

pub fn form_from_json(value: &Value) -> Result<MultilinearForm> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::format("<root>", "expected a JSON object"))?;
    let m = positive_int(obj, "m")?;
    let n = positive_int(obj, "n")?;
    if let Some(scalar) = obj.get("scalar") {
        if scalar.as_str() != Some("real") {
            return Err(Error::format("scalar", "only \"real\" is supported"));
        }
    }
    let storage = field(obj, "storage")?
        .as_str()
        .ok_or_else(|| Error::format("storage", "expected a string"))?;
    match storage {
        "dense" => {
            let raw = field(obj, "coefficients")?
                .as_array()
                .ok_or_else(|| Error::format("coefficients", "expected an array"))?;
            let coeffs = raw
                .iter()
                .enumerate()
                .map(|(i, v)| finite_number(v, &format!("coefficients[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            MultilinearForm::dense(m, n, coeffs).map_err(|e| match e {
                Error::Domain(msg) => Error::format("coefficients", msg),
                other => other,
            })
        }
        "sparse" => {
            let raw = field(obj, "entries")?
                .as_array()
                .ok_or_else(|| Error::format("entries", "expected an array"))?;
            let mut entries = Vec::with_capacity(raw.len());
            for (e, entry) in raw.iter().enumerate() {
                let name = format!("entries[{e}]");
                let items = entry
                    .as_array()
                    .filter(|a| a.len() == m + 1)
                    .ok_or_else(|| {
                        Error::format(&name, format!("expected {m} indices and a value"))
                    })?;
                let idx = items[..m]
                    .iter()
                    .map(|j| match j.as_u64() {
                        Some(j) if j >= 1 && (j as usize) <= n => Ok(j as usize - 1),
                        _ => Err(Error::format(&name, format!("index {j} outside 1..={n}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                entries.push((idx, finite_number(&items[m], &name)?));
            }
            MultilinearForm::sparse(m, n, entries).map_err(|e| match e {
                Error::Domain(msg) => Error::format("entries", msg),
                other => other,
            })
        }
        other => Err(Error::format(
            "storage",
            format!("unknown storage `{other}`"),
        )),
    }
}

pub fn form_from_str(text: &str) -> Result<MultilinearForm> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::format("<root>", e.to_string()))?;
    form_from_json(&value)
}

pub fn read_form(path: &Path) -> Result<MultilinearForm> {
    form_from_str(&std::fs::read_to_string(path)?)
}

/// Sparse export: nonzero entries in lexicographic order, 1-based indices.
pub fn form_to_sparse_json(form: &MultilinearForm) -> Value {
    let entries: Vec<Value> = form
        .nonzero_entries()
        .into_iter()
        .map(|(idx, v)| {
            let mut row: Vec<Value> = idx.iter().map(|&j| json!(j + 1)).collect();
            row.push(json!(v));
            Value::Array(row)
        })
        .collect();
    json!({
        "m": form.degree(),
        "n": form.dim(),
        "scalar": "real",
        "storage": "sparse",
        "entries": entries,
    })
}

/// Dense export; materialises the coefficient tensor.
pub fn form_to_dense_json(form: &MultilinearForm) -> Result<Value> {
    let dense = form.to_dense()?;
    Ok(json!({
        "m": form.degree(),
        "n": form.dim(),
        "scalar": "real",
        "storage": "dense",
        "coefficients": dense.dense_coefficients().expect("dense storage"),
    }))
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialise");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
