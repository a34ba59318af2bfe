//! Number formatting, JSON and CSV emission, atomic file writes.

use std::io::Write;
use std::path::Path;

use serde_json::Value;

/// `v` with 17 significant digits.
///
/// Values with a decimal exponent in `-5..=16` are written positionally
/// (`1.0986122886681098`, `0.50000000000000000`), others in scientific
/// notation (`9.5367431640625000e-7`). Both forms parse back to `v` exactly.
/// Non-finite values become `nan`, `inf` and `-inf`.
pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..=16).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, v)
    } else {
        sci
    }
}

/// Pretty JSON with sorted keys, two-space indent and [`fmt17`] floats.
/// Non-finite floats are already `null` in a [`Value`].
pub fn to_json(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v, 0);
    s.push('\n');
    s
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.is_f64(), n.as_f64()) {
            (true, Some(f)) => out.push_str(&fmt17(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, item, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*k], depth + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

/// A CSV table held in memory until it is emitted.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        // Writing to a Vec cannot fail.
        w.write_record(&self.header).expect("in-memory csv");
        for r in &self.rows {
            w.write_record(r).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }
}

/// Numbered coordinate column names `{prefix}1 .. {prefix}n`.
pub fn coord_columns(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Writes `contents` to `dir/name` through a temporary file in `dir` and a
/// rename, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(3f64.ln()), "1.0986122886681098");
        assert_eq!(fmt17(0.5), "0.50000000000000000");
        assert_eq!(fmt17(0.0), "0.0000000000000000");
        assert_eq!(fmt17(-2.0), "-2.0000000000000000");
        assert_eq!(fmt17(2.5e-7), "2.4999999999999999e-7");
        assert_eq!(fmt17(2f64.powi(-20)), "9.5367431640625000e-7");
        assert_eq!(fmt17(1e20), "1.0000000000000000e20");
        assert_eq!(fmt17(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn json_is_sorted_and_formatted() {
        let v = json!({"b": 1, "a": [0.25, null], "c": {}});
        assert_eq!(to_json(&v), "{\n  \"a\": [\n    0.25000000000000000,\n    null\n  ],\n  \"b\": 1,\n  \"c\": {}\n}\n");
        let parsed: Value = serde_json::from_str(&to_json(&v)).unwrap();
        assert_eq!(parsed, v);
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "f.txt", "one").unwrap();
        write_atomic(dir.path(), "f.txt", "two").unwrap();
        assert_eq!(std::fs::read_to_string(dir.path().join("f.txt")).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
