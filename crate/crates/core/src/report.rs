//! Output documents: a metadata header plus a table, rendered as CSV or JSON.
//!
//! CSV layout:
//!
//! ```text
//! # htmr-lab v0.1.0 seed=42 semantics=voter-passthrough command=simulate ...
//! pf,order,pe,pem,re,rem,re_per_module,pe_hat,std_err,trials,errors
//! 0.1,1,0.028,...
//! ```
//!
//! Reals print with 12 significant digits, infinite reduction rates as
//! `inf`, absent values as empty cells (`null` in JSON).

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::harness::ComparisonRow;
use crate::network::VOTER_FAILURE_SEMANTICS;
use crate::reliability::ReductionRate;

pub const TOOL_NAME: &str = "htmr-lab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Columns of every sweep-style table.
pub const SWEEP_COLUMNS: [&str; 11] = [
    "pf",
    "order",
    "pe",
    "pem",
    "re",
    "rem",
    "re_per_module",
    "pe_hat",
    "std_err",
    "trials",
    "errors",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format_real(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Real(v) if v.is_finite() => {
                // Round-trips the 12-digit text so CSV and JSON agree.
                json!(format_real(*v).parse::<f64>().unwrap_or(*v))
            }
            Cell::Real(v) => json!(format_real(*v)),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<ReductionRate>> for Cell {
    fn from(v: Option<ReductionRate>) -> Self {
        v.map_or(Cell::Empty, |r| Cell::Real(r.decades()))
    }
}

/// `%.12g`-style formatting; infinities print as `inf` / `-inf`.
pub fn format_real(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub command: String,
    pub seed: u64,
    /// Echo of the effective configuration, in insertion order.
    pub config: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            seed,
            config: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    fn header_line(&self) -> String {
        let mut s = format!(
            "# {TOOL_NAME} v{TOOL_VERSION} seed={} semantics={VOTER_FAILURE_SEMANTICS} command={}",
            self.seed, self.command
        );
        for (k, v) in &self.config {
            let _ = write!(s, " {k}={}", v.replace(char::is_whitespace, "_"));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputDocument {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl OutputDocument {
    pub fn new(metadata: Metadata, columns: &[&str]) -> Self {
        Self {
            metadata,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.metadata.header_line();
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut config = Map::new();
        for (k, v) in &self.metadata.config {
            config.insert(k.clone(), json!(v));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "metadata": {
                "tool": TOOL_NAME,
                "version": TOOL_VERSION,
                "seed": self.metadata.seed,
                "semantics": VOTER_FAILURE_SEMANTICS,
                "command": self.metadata.command,
                "config": Value::Object(config),
            },
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
        s.push('\n');
        s
    }
}

/// Appends one line per (grid point, order) in the sweep column layout,
/// optionally prefixed by extra leading cells.
pub fn push_sweep_rows(doc: &mut OutputDocument, prefix: &[Cell], rows: &[ComparisonRow]) {
    for row in rows {
        for c in &row.orders {
            let mut cells = prefix.to_vec();
            cells.extend([
                Cell::from(row.pf.value()),
                Cell::from(c.order.get() as u64),
                Cell::from(c.pe.value()),
                Cell::from(c.pem.value()),
                Cell::from(c.re),
                Cell::from(c.rem),
                Cell::from(c.re_per_module),
            ]);
            match c.empirical {
                Some(e) => cells.extend([
                    Cell::from(e.pe_hat),
                    Cell::from(e.std_err),
                    Cell::from(e.trials),
                    Cell::from(e.errors),
                ]),
                None => cells.extend(std::iter::repeat_n(Cell::Empty, 4)),
            }
            doc.push(cells);
        }
    }
}
