//! CSV emission and number formatting.

use std::io::{self, Write};
use std::path::Path;

/// A CSV field: indices print as integers, reals in 17-digit scientific form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    Index(usize),
    Real(f64),
}

impl Field {
    fn render(self) -> String {
        match self {
            Field::Index(i) => i.to_string(),
            Field::Real(x) => fmt_full(x),
        }
    }
}

/// 17 significant digits; negative zero prints as zero.
pub fn fmt_full(x: f64) -> String {
    format!("{:.16e}", if x == 0.0 { 0.0 } else { x })
}

/// Seven significant digits, with an exact zero printed as `0.0e0`.
pub fn fmt_short(x: f64) -> String {
    if x == 0.0 {
        "0.0e0".to_string()
    } else {
        format!("{x:.6e}")
    }
}

/// RFC-4180 CSV with LF line endings.
pub fn write_csv<W: Write>(w: W, header: &[&str], rows: &[Vec<Field>]) -> io::Result<()> {
    if let Some(bad) = rows.iter().position(|r| r.len() != header.len()) {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("row {bad} has {} fields, header has {}", rows[bad].len(), header.len()),
        ));
    }
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row.iter().map(|f| f.render()))?;
    }
    out.flush()
}

pub fn emit_grid_csv(path: &Path, header: &[&str], rows: &[Vec<Field>]) -> io::Result<()> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows)?;
    std::fs::write(path, buf)
}
