//! Deterministic output formatting: every float is rounded to at most 12
//! significant digits before serialization, so identical inputs produce
//! byte-identical reports across runs and platforms.

use serde_json::Value;

/// Shortest round-trip representation capped at 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Round every number in a JSON tree in place.
pub fn round_tree(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if !n.is_i64() && !n.is_u64() {
                    if let Some(rounded) = serde_json::Number::from_f64(round_sig12(f)) {
                        *value = Value::Number(rounded);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_tree),
        Value::Object(map) => map.values_mut().for_each(round_tree),
        _ => {}
    }
}

pub fn to_json_string(value: &Value) -> String {
    let mut v = value.clone();
    round_tree(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("report serialization cannot fail");
    s.push('\n');
    s
}

fn scalar_to_string(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        scalar => out.push((prefix.to_string(), scalar_to_string(scalar))),
    }
}

/// CSV rendering: an array of flat objects becomes a table with a header
/// row; anything else becomes `key,value` lines with dotted paths.
pub fn to_csv_string(value: &Value) -> String {
    let mut v = value.clone();
    round_tree(&mut v);
    if let Value::Array(items) = &v {
        let all_flat_objects = !items.is_empty()
            && items.iter().all(|it| {
                matches!(it, Value::Object(m) if m.values().all(|x| !x.is_object() && !x.is_array()))
            });
        if all_flat_objects {
            let mut out = String::new();
            let Value::Object(first) = &items[0] else {
                unreachable!()
            };
            let header: Vec<&String> = first.keys().collect();
            out.push_str(
                &header
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(","),
            );
            out.push('\n');
            for item in items {
                let Value::Object(map) = item else {
                    unreachable!()
                };
                let row: Vec<String> = header
                    .iter()
                    .map(|k| map.get(*k).map(scalar_to_string).unwrap_or_default())
                    .collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            return out;
        }
    }
    let mut rows = Vec::new();
    flatten("", &v, &mut rows);
    let mut out = String::from("key,value\n");
    for (k, val) in rows {
        out.push_str(&format!("{k},{val}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding_caps_significant_digits() {
        assert_eq!(round_sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig12(0.1), 0.1);
        assert_eq!(round_sig12(0.0), 0.0);
        assert_eq!(round_sig12(-1234.567890123456), -1234.56789012);
    }

    #[test]
    fn json_is_deterministic() {
        let v = json!({"b": 1.0f64 / 3.0, "a": [1.0, 2.0e-13]});
        assert_eq!(to_json_string(&v), to_json_string(&v));
        assert!(to_json_string(&v).contains("0.333333333333"));
    }

    #[test]
    fn csv_table_for_flat_arrays() {
        let v = json!([{"t": 0.0, "v": 1.0}, {"t": 0.5, "v": 0.25}]);
        let csv = to_csv_string(&v);
        assert_eq!(csv, "t,v\n0.0,1.0\n0.5,0.25\n");
    }

    #[test]
    fn csv_key_value_for_objects() {
        let v = json!({"mass": 50.0, "kl": {"k": 0.1}});
        let csv = to_csv_string(&v);
        assert!(csv.starts_with("key,value\n"));
        assert!(csv.contains("kl.k,0.1\n"));
    }
}
