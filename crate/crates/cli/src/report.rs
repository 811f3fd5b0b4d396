//! Canonical report serialization: JSON with sorted keys and fixed float
//! formatting (17 significant digits), so identical runs produce identical
//! bytes; CSV with a stable column layout.

use lindsim::{Result, SimError};
use serde_json::Value;

/// Fixed-width float form used in both JSON and CSV output.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serialize a JSON value canonically: object keys sorted, floats rendered
/// with 17 significant digits, no whitespace variation.
pub fn canonical_json(value: &Value) -> Result<String> {
    let mut out = String::new();
    write_value(value, &mut out)?;
    Ok(out)
}

fn write_value(value: &Value, out: &mut String) -> Result<()> {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let f = n.as_f64().ok_or_else(|| {
                    SimError::Internal("non-representable number in report".into())
                })?;
                if !f.is_finite() {
                    return Err(SimError::Internal(
                        "non-finite number reached the report".into(),
                    ));
                }
                out.push_str(&format_float(f));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serialization"))
        }
        Value::Array(items) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_value(item, out)?;
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("key serialization"));
                out.push(':');
                write_value(&map[*key], out)?;
            }
            out.push('}');
        }
    }
    Ok(())
}

/// Header for the time-series CSV at truncation order `max_order`:
/// time, oracle_value, order0, cum_order1..K, mc_estimate,
/// truncation_bound, observable_bound, delta_total.
pub fn csv_header(max_order: usize) -> String {
    let mut cols = vec!["time".to_string(), "oracle_value".into(), "order0".into()];
    for n in 1..=max_order {
        cols.push(format!("cum_order{n}"));
    }
    cols.extend(
        ["mc_estimate", "truncation_bound", "observable_bound", "delta_total"]
            .map(String::from),
    );
    cols.join(",")
}

pub fn csv_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format_float(*v))
        .collect::<Vec<_>>()
        .join(",")
}
