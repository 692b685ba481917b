use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Curves,
    Trajectory,
    Points,
    Slices,
    Report,
}

/// A rectangular numeric table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub label: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(label: impl Into<String>, columns: &[&str]) -> Self {
        Self { label: label.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Serialize)]
pub struct OutputDocument {
    pub schema_version: &'static str,
    pub kind: Kind,
    pub metadata: Value,
    pub payload: Value,
}

/// A command's result: the JSON document and the tables written for CSV.
pub struct Output {
    pub doc: OutputDocument,
    pub tables: Vec<Table>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Builds a document. Non-finite floats serialise to `null`, and payloads
/// never contain legitimate nulls, so any `null` is rejected here.
pub fn document(
    kind: Kind,
    command: &str,
    parameters: Value,
    tolerances: Value,
    timestamp: bool,
    payload: impl Serialize,
    tables: Vec<Table>,
) -> Result<Output> {
    let payload = serde_json::to_value(payload)?;
    if let Some(path) = find_null(&payload, "payload") {
        bail!("non-finite value in output at {path}");
    }
    for t in &tables {
        if t.rows.iter().flatten().any(|v| !v.is_finite()) {
            bail!("non-finite value in table {}", t.label);
        }
        if t.rows.iter().any(|r| r.len() != t.columns.len()) {
            bail!("table {} is not rectangular", t.label);
        }
    }
    let mut metadata = Map::new();
    metadata.insert("command".into(), command.into());
    metadata.insert("parameters".into(), parameters);
    metadata.insert("tolerances".into(), tolerances);
    if timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        metadata.insert("timestamp_unix".into(), secs.into());
    }
    Ok(Output {
        doc: OutputDocument { schema_version: SCHEMA_VERSION, kind, metadata: Value::Object(metadata), payload },
        tables,
    })
}

fn find_null(v: &Value, path: &str) -> Option<String> {
    match v {
        Value::Null => Some(path.to_string()),
        Value::Array(a) => a.iter().enumerate().find_map(|(i, x)| find_null(x, &format!("{path}[{i}]"))),
        Value::Object(m) => m.iter().find_map(|(k, x)| find_null(x, &format!("{path}.{k}"))),
        _ => None,
    }
}

/// Flattens scalar leaves of a JSON value into `(path, value)` pairs.
fn flatten(v: &Value, path: String, out: &mut Vec<(String, String)>) {
    match v {
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(x, format!("{path}[{i}]"), out);
            }
        }
        Value::Object(m) => {
            for (k, x) in m {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                flatten(x, p, out);
            }
        }
        Value::Number(n) => out.push((path, n.as_f64().map(fmt_f64).unwrap_or_else(|| n.to_string()))),
        Value::String(s) => out.push((path, s.clone())),
        Value::Bool(b) => out.push((path, b.to_string())),
        Value::Null => out.push((path, String::new())),
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn table_csv(t: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.columns)?;
    for r in &t.rows {
        w.write_record(r.iter().map(|v| fmt_f64(*v)))?;
    }
    Ok(w.into_inner()?)
}

fn report_csv(payload: &Value) -> Result<Vec<u8>> {
    let mut pairs = Vec::new();
    flatten(payload, String::new(), &mut pairs);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["field", "value"])?;
    for (k, v) in pairs {
        w.write_record([k, v])?;
    }
    Ok(w.into_inner()?)
}

/// File-name-safe form of a curve label.
pub fn file_stem(label: &str) -> String {
    label.replace('+', "_plus").replace('-', "_minus")
}

/// Writes the result. JSON goes to `out` or stdout. CSV with a single table
/// goes to `out` or stdout; several tables go to `out` as a directory with
/// one file per table, or to stdout separated by `# label` lines.
pub fn emit(output: &Output, format: Format, out: Option<&Path>) -> Result<()> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&output.doc)?;
            s.push('\n');
            write_target(out, s.as_bytes())
        }
        Format::Csv if output.tables.is_empty() => write_target(out, &report_csv(&output.doc.payload)?),
        Format::Csv if output.tables.len() == 1 => write_target(out, &table_csv(&output.tables[0])?),
        Format::Csv => match out {
            Some(dir) => {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                for t in &output.tables {
                    let p = dir.join(format!("{}.csv", file_stem(&t.label)));
                    fs::write(&p, table_csv(t)?).with_context(|| format!("writing {}", p.display()))?;
                }
                Ok(())
            }
            None => {
                let mut buf = Vec::new();
                for (i, t) in output.tables.iter().enumerate() {
                    if i > 0 {
                        buf.push(b'\n');
                    }
                    writeln!(buf, "# {}", t.label)?;
                    buf.extend(table_csv(t)?);
                }
                write_target(None, &buf)
            }
        },
    }
}

fn write_target(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
            Ok(())
        }
    }
}
