//! CSV emission with full-precision numeric formatting, so identical runs
//! produce identical bytes and downstream diffs are meaningful.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// Full-precision scientific notation: 17 significant digits round-trip
/// any finite f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Compact value tag for output file names, e.g. `2.5e-1`.
pub fn fmt_param(v: f64) -> String {
    format!("{v:e}")
}

/// One CSV cell. Floats render in full precision, flags as 0/1, absent
/// optionals as empty cells.
pub enum Cell {
    Int(usize),
    Num(f64),
    OptNum(Option<f64>),
    Flag(bool),
    Text(&'static str),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::OptNum(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<&'static str> for Cell {
    fn from(v: &'static str) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Int(v) => {
                let _ = write!(out, "{v}");
            }
            Cell::Num(v) => {
                let _ = write!(out, "{v:.16e}");
            }
            Cell::OptNum(Some(v)) => {
                let _ = write!(out, "{v:.16e}");
            }
            Cell::OptNum(None) => {}
            Cell::Flag(v) => out.push(if *v { '1' } else { '0' }),
            Cell::Text(v) => out.push_str(v),
        }
    }
}

/// In-memory CSV table with a fixed header row.
pub struct Table {
    columns: usize,
    body: String,
}

impl Table {
    pub fn new(header: &str) -> Self {
        let columns = header.split(',').count();
        let mut body = String::with_capacity(256);
        body.push_str(header);
        body.push('\n');
        Self { columns, body }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        assert_eq!(cells.len(), self.columns, "row width does not match header");
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.body.push(',');
            }
            c.render(&mut self.body);
        }
        self.body.push('\n');
    }

    pub fn as_csv(&self) -> &str {
        &self.body
    }

    pub fn write_to(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.body.as_bytes())
    }

    /// Writes to `path` when given, otherwise to standard output.
    pub fn emit(&self, path: Option<&Path>) -> io::Result<()> {
        match path {
            Some(p) => self.write_to(p),
            None => io::stdout().write_all(self.body.as_bytes()),
        }
    }
}
