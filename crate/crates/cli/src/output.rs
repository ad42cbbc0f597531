//! Deterministic artifact writers.
//!
//! Every floating-point number is rendered with 17 significant digits in
//! exponent form so a rerun is byte-identical and a reader can reconstruct
//! the exact bits. JSON objects keep insertion order; nothing in the output
//! path iterates a hash map.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use treespec_core::Mat;

/// 17 significant digits: one leading digit plus 16 after the point.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A JSON value rendered eagerly; objects and arrays preserve order.
#[derive(Debug, Clone)]
pub enum Json {
    Number(String),
    Str(String),
    Bool(bool),
    Array(Vec<Json>),
    Object(Vec<(String, Json)>),
}

impl Json {
    pub fn f64(x: f64) -> Json {
        Json::Number(fmt_f64(x))
    }

    pub fn usize(x: usize) -> Json {
        Json::Number(x.to_string())
    }

    pub fn u64(x: u64) -> Json {
        Json::Number(x.to_string())
    }

    pub fn str(s: impl Into<String>) -> Json {
        Json::Str(s.into())
    }

    pub fn array_f64(xs: &[f64]) -> Json {
        Json::Array(xs.iter().map(|&x| Json::f64(x)).collect())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Number(s) => out.push_str(s),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        c if (c as u32) < 0x20 => {
                            let _ = write!(out, "\\u{:04x}", c as u32);
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    push_indent(out, indent + 1);
                    item.write(out, indent + 1);
                }
                out.push('\n');
                push_indent(out, indent);
                out.push(']');
            }
            Json::Object(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (key, value)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    push_indent(out, indent + 1);
                    let _ = write!(out, "\"{key}\": ");
                    value.write(out, indent + 1);
                }
                out.push('\n');
                push_indent(out, indent);
                out.push('}');
            }
        }
    }
}

fn push_indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

/// Ordered object builder.
#[derive(Debug, Default)]
pub struct JsonObject {
    fields: Vec<(String, Json)>,
}

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(mut self, key: &str, value: Json) -> Self {
        self.fields.push((key.to_string(), value));
        self
    }

    pub fn build(self) -> Json {
        Json::Object(self.fields)
    }
}

/// Writes rows as CSV, formatting floats with [`fmt_f64`].
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "ragged CSV row");
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.render())
    }
}

pub fn cell_f64(x: f64) -> String {
    fmt_f64(x)
}

pub fn cell_usize(x: usize) -> String {
    x.to_string()
}

/// Plain-text sparse dump: one `i j value` line per nonzero, 1-based.
pub fn write_triplets(path: &Path, m: &Mat) -> io::Result<()> {
    let mut out = String::new();
    for (i, j, v) in m.nonzero_triplets() {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, fmt_f64(v));
    }
    fs::write(path, out)
}

/// Dense CSV dump of a matrix, no header.
pub fn write_dense_csv(path: &Path, m: &Mat) -> io::Result<()> {
    let mut out = String::new();
    for i in 0..m.rows() {
        let rendered: Vec<String> = m.row(i).iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&rendered.join(","));
        out.push('\n');
    }
    fs::write(path, out)
}
