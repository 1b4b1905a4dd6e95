use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Human-readable summary plus the overall check outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub lines: Vec<String>,
    pub passed: bool,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `rows` to `path`. Nothing is created when there are no rows.
pub fn emit_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn emit_report<W: Write>(mut out: W, report: &Report) -> Result<()> {
    for line in &report.lines {
        writeln!(out, "{line}")?;
    }
    writeln!(out, "{}", if report.passed { "PASS" } else { "FAIL" })?;
    Ok(())
}
