//! Machine-readable report documents and their human rendering.
//!
//! Every command produces one JSON-compatible object; the table view printed
//! for humans is derived from that same object. Mathematical values are
//! serialized as exact strings (`"81"`, `"-608/9"`); no floating point
//! appears anywhere.

use crate::arith::{Int, Rat};
use serde_json::{Map, Value};

pub fn int_val(i: &Int) -> Value {
    Value::String(i.to_string())
}

pub fn rat_val(r: &Rat) -> Value {
    Value::String(r.to_string())
}

pub fn ints_val<'a>(it: impl IntoIterator<Item = &'a Int>) -> Value {
    Value::Array(it.into_iter().map(int_val).collect())
}

pub fn obj(fields: Vec<(&str, Value)>) -> Value {
    let mut map = Map::new();
    for (k, v) in fields {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

/// Render a report object as indented text; arrays of flat objects become
/// aligned tables.
pub fn render(value: &Value) -> String {
    let mut out = String::new();
    render_into(value, 0, &mut out);
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| matches!(x, Value::String(_) | Value::Number(_))) => {
            let parts: Vec<String> = a.iter().filter_map(scalar).collect();
            Some(format!("[{}]", parts.join(", ")))
        }
        _ => None,
    }
}

fn render_into(value: &Value, depth: usize, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                if let Some(s) = scalar(v) {
                    indent(out, depth);
                    out.push_str(&format!("{k}: {s}\n"));
                } else {
                    indent(out, depth);
                    out.push_str(&format!("{k}:\n"));
                    render_into(v, depth + 1, out);
                }
            }
        }
        Value::Array(items) => {
            if let Some(table) = try_table(items) {
                for line in table {
                    indent(out, depth);
                    out.push_str(&line);
                    out.push('\n');
                }
            } else {
                for (i, item) in items.iter().enumerate() {
                    if let Some(s) = scalar(item) {
                        indent(out, depth);
                        out.push_str(&format!("- {s}\n"));
                    } else {
                        indent(out, depth);
                        out.push_str(&format!("- [{i}]\n"));
                        render_into(item, depth + 1, out);
                    }
                }
            }
        }
        other => {
            if let Some(s) = scalar(other) {
                indent(out, depth);
                out.push_str(&s);
                out.push('\n');
            }
        }
    }
}

/// Arrays of objects whose values are all scalars render as a table.
fn try_table(items: &[Value]) -> Option<Vec<String>> {
    if items.is_empty() {
        return None;
    }
    let mut keys: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<String>> = Vec::new();
    for item in items {
        let Value::Object(map) = item else { return None };
        for k in map.keys() {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    for item in items {
        let Value::Object(map) = item else { return None };
        let mut row = Vec::new();
        for k in &keys {
            match map.get(k) {
                None => row.push(String::new()),
                Some(v) => row.push(scalar(v)?),
            }
        }
        rows.push(row);
    }
    let mut widths: Vec<usize> = keys.iter().map(|k| k.len()).collect();
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let fmt_row = |cells: &[String]| {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{:width$}", c, width = widths[i]))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut lines = vec![fmt_row(&keys)];
    for row in &rows {
        lines.push(fmt_row(row));
    }
    Some(lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use serde_json::json;

    #[test]
    fn exact_values_render_as_strings() {
        assert_eq!(int_val(&int(-81)), json!("-81"));
        assert_eq!(rat_val(&rat(-608, 9)), json!("-608/9"));
        assert_eq!(rat_val(&rat(4, 2)), json!("2"));
    }

    #[test]
    fn tables_align() {
        let v = json!([
            {"cone": 1, "type": "1/4(1,1)"},
            {"cone": 2, "type": "1/50(1,9)"}
        ]);
        let text = render(&v);
        assert!(text.contains("cone  type"));
        assert!(text.contains("1     1/4(1,1)"));
    }
}
