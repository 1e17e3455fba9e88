//! Result rendering: the fixed-column CSV table, JSON documents, atomic
//! file writes, and structured error diagnostics.
//!
//! Floats are rendered with the shortest round-trip representation, so a
//! byte-identical rerun needs only identical inputs.  Infinite values become
//! the literal `inf` in CSV and the string `"inf"` in JSON.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::exponents::{ExponentKind, ExponentResult};

/// Output encodings accepted by the front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn label(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidInput(format!(
                "unknown format {other:?}; expected csv or json"
            ))),
        }
    }
}

/// JSON encoding of an extended real: finite values stay numbers,
/// infinities become literal strings.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x == f64::INFINITY {
        json!("inf")
    } else if x == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!("nan")
    }
}

pub const CSV_HEADER: &str = "r,kind,value,minimizing_R,attainment,method";

/// One exponent evaluation, already converted to output units.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub r: f64,
    pub kind: ExponentKind,
    pub value: f64,
    pub minimizing_r: Option<f64>,
    pub attainment: &'static str,
    pub method: &'static str,
}

impl ResultRow {
    /// `scale` converts nats into output units; `r_out` is echoed as given.
    pub fn from_result(r_out: f64, kind: ExponentKind, result: &ExponentResult, scale: f64) -> Self {
        ResultRow {
            r: r_out,
            kind,
            value: result.value * scale,
            minimizing_r: result.minimizing_r.map(|v| v * scale),
            attainment: result.diagnostics.attainment.label(),
            method: result.method.label(),
        }
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let minimizing = row
            .minimizing_r
            .map(|v| v.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.r,
            row.kind.label(),
            row.value,
            minimizing,
            row.attainment,
            row.method
        );
    }
    out
}

pub fn row_json(row: &ResultRow) -> Value {
    json!({
        "r": number(row.r),
        "kind": row.kind.label(),
        "value": number(row.value),
        "minimizing_R": row.minimizing_r.map(number).unwrap_or(Value::Null),
        "attainment": row.attainment,
        "method": row.method,
    })
}

/// Serialize a document as a single newline-terminated line.
pub fn to_json_line(value: &Value) -> Result<String> {
    let mut text = serde_json::to_string(value)
        .map_err(|e| Error::Numeric(format!("json encoding: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Write to the path through a temp file in the same directory, or to
/// standard output when no path is given.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    let Some(path) = path else {
        print!("{content}");
        return Ok(());
    };
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| {
        Error::InvalidInput(format!(
            "cannot create a temporary file in {}: {e}",
            dir.display()
        ))
    })?;
    tmp.write_all(content.as_bytes())
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| Error::InvalidInput(format!("cannot replace {}: {e}", path.display())))?;
    Ok(())
}

/// One-line JSON diagnostic for standard error.
pub fn error_diagnostic(err: &Error) -> String {
    let kind = match err {
        Error::InvalidInput(_) => "invalid-input",
        Error::AlphabetMismatch(_) => "alphabet-mismatch",
        Error::SingularSupport { .. } => "singular-support",
        Error::Degenerate(_) => "degenerate",
        Error::AssumptionsFailed { .. } => "assumptions-failed",
        Error::Domain { .. } => "domain",
        Error::Infeasible(_) => "infeasible",
        Error::Unsupported(_) => "unsupported",
        Error::ResourceBudget(_) => "resource-budget",
        Error::Numeric(_) => "numeric",
    };
    let mut body = Map::new();
    body.insert("kind".into(), json!(kind));
    body.insert("exit_code".into(), json!(err.exit_code()));
    body.insert("message".into(), json!(err.to_string()));
    match err {
        Error::AssumptionsFailed { witness } => {
            body.insert("witness".into(), json!(witness));
        }
        Error::SingularSupport { witness, .. } => {
            body.insert("witness".into(), json!(witness));
        }
        _ => {}
    }
    serde_json::to_string(&json!({ "error": Value::Object(body) }))
        .unwrap_or_else(|_| r#"{"error":{"kind":"numeric"}}"#.into())
}
