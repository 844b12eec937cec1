//! CSV emission. Tables are built in memory and written in one go, so a
//! failed run never leaves a partial file behind.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::Failure;

/// Shortest decimal that survives rounding to 12 significant digits.
/// Exponent notation outside `1e-5 <= |x| < 1e15`; `-0` prints as `0`.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Writes to `path`, or standard output when `None`. A failed file write
/// removes whatever was created.
pub fn emit(table: &Table, path: Option<&Path>) -> Result<(), Failure> {
    let bytes = table.to_bytes();
    match path {
        Some(p) => fs::write(p, &bytes).map_err(|e| {
            let _ = fs::remove_file(p);
            Failure::Numerical(format!("writing {}: {e}", p.display()))
        }),
        None => io::stdout().write_all(&bytes).map_err(|e| Failure::Numerical(format!("writing output: {e}"))),
    }
}
