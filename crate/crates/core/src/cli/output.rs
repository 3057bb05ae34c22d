//! Table output as CSV or JSON.
//!
//! Both formats start with a header that records the tool version, the full
//! run configuration and a `generated_at` timestamp; everything but the
//! timestamp is a pure function of the configuration. In CSV the header is a
//! block of `# key: value` lines before the column row, and missing values are
//! written as `NA`. JSON objects use the CSV column names as keys.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Column-named rows plus summary values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Vec<(&'static str, Value)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn add_summary(&mut self, key: &'static str, value: impl Into<Value>) {
        self.summary.push((key, value.into()));
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

/// JSON value for an optional number.
pub fn opt<T: Into<Value>>(v: Option<T>) -> Value {
    v.map(Into::into).unwrap_or(Value::Null)
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn render<C: Serialize>(table: &Table, command: &str, config: &C, format: Format) -> Result<String> {
    render_at(table, command, config, format, timestamp())
}

pub fn render_at<C: Serialize>(
    table: &Table,
    command: &str,
    config: &C,
    format: Format,
    generated_at: u64,
) -> Result<String> {
    let config = serde_json::to_value(config).map_err(|e| Error::Invariant(e.to_string()))?;
    match format {
        Format::Csv => Ok(render_csv(table, command, &config, generated_at)),
        Format::Json => render_json(table, command, config, generated_at),
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => "NA".to_string(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_csv(table: &Table, command: &str, config: &Value, generated_at: u64) -> String {
    let mut out = String::new();
    out.push_str(&format!("# tool: qbai {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# command: {command}\n"));
    out.push_str(&format!("# generated_at: {generated_at}\n"));
    out.push_str(&format!("# config: {config}\n"));
    for (key, value) in &table.summary {
        out.push_str(&format!("# summary.{key}: {value}\n"));
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(csv_cell).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn render_json(table: &Table, command: &str, config: Value, generated_at: u64) -> Result<String> {
    let mut header = Map::new();
    header.insert("tool".into(), format!("qbai {}", env!("CARGO_PKG_VERSION")).into());
    header.insert("command".into(), command.into());
    header.insert("generated_at".into(), generated_at.into());
    header.insert("config".into(), config);

    let summary: Map<String, Value> =
        table.summary.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            Value::Object(
                table.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.clone())).collect(),
            )
        })
        .collect();

    let mut doc = Map::new();
    doc.insert("header".into(), Value::Object(header));
    doc.insert("summary".into(), Value::Object(summary));
    doc.insert("columns".into(), table.columns.iter().map(|c| Value::from(*c)).collect());
    doc.insert("rows".into(), Value::Array(rows));
    let mut text = serde_json::to_string_pretty(&Value::Object(doc))
        .map_err(|e| Error::Invariant(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Drops the `generated_at` line (CSV) or field (JSON) so that two renderings
/// of the same run can be compared byte for byte.
pub fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| {
            let t = l.trim_start();
            !t.starts_with("# generated_at:") && !t.starts_with("\"generated_at\":")
        })
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Table {
        let mut t = Table::new(&["n", "value", "note"]);
        t.push(vec![json!(0), json!(0.25), json!("a,b")]);
        t.push(vec![json!(1), Value::Null, json!("plain")]);
        t.add_summary("max", 0.25);
        t
    }

    #[test]
    fn csv_layout() {
        let text = render_at(&sample(), "demo", &json!({"seed": 1}), Format::Csv, 42).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[2], "# generated_at: 42");
        assert_eq!(lines[3], "# config: {\"seed\":1}");
        assert_eq!(lines[4], "# summary.max: 0.25");
        assert_eq!(&lines[5..], &["n,value,note", "0,0.25,\"a,b\"", "1,NA,plain"]);
    }

    #[test]
    fn json_mirrors_columns() {
        let text = render_at(&sample(), "demo", &json!({"seed": 1}), Format::Json, 42).unwrap();
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["header"]["generated_at"], json!(42));
        assert_eq!(doc["rows"][0]["value"], json!(0.25));
        assert_eq!(doc["rows"][1]["value"], Value::Null);
        assert_eq!(doc["summary"]["max"], json!(0.25));
    }

    #[test]
    fn timestamp_is_the_only_difference() {
        for format in [Format::Csv, Format::Json] {
            let a = render_at(&sample(), "demo", &json!({}), format, 1).unwrap();
            let b = render_at(&sample(), "demo", &json!({}), format, 2).unwrap();
            assert_ne!(a, b);
            assert_eq!(strip_timestamp(&a), strip_timestamp(&b));
        }
    }
}
