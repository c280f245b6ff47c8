//! Sample CSV files (`x1,…,xd,y`) and flat result tables.

use std::path::Path;

use crate::regression::Sample;
use crate::{Error, Result};

/// Round-trippable float formatting (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn malformed(row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::MalformedCsv { row, column, message: message.into() }
}

/// Parses sample CSV text. Rows and columns in errors are 1-based, the header being row 1.
pub fn parse_sample(text: &str) -> Result<Sample<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(Error::EmptyFile),
        Some(h) => h?,
    };
    let width = header.len();
    if width < 2 {
        return Err(malformed(1, 1, "header needs columns x1..xd,y"));
    }
    let d = width - 1;
    for (j, name) in header.iter().enumerate() {
        let expected = if j == d { "y".to_string() } else { format!("x{}", j + 1) };
        if name != expected {
            return Err(malformed(1, j + 1, format!("expected '{expected}', found '{name}'")));
        }
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 2;
        let rec = rec?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != width {
            return Err(malformed(row, rec.len().min(width) + 1, format!("expected {width} fields, found {}", rec.len())));
        }
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| malformed(row, j + 1, format!("not a number: '{cell}'")))?;
            if !v.is_finite() {
                return Err(malformed(row, j + 1, format!("non-finite value '{cell}'")));
            }
            if j == d {
                y.push(v);
            } else {
                x.push(v);
            }
        }
    }
    if y.is_empty() {
        return Err(Error::EmptyFile);
    }
    Sample::new(x, y, d)
}

pub fn load_sample(path: &Path) -> Result<Sample<f64>> {
    parse_sample(&std::fs::read_to_string(path)?)
}

pub fn sample_to_csv(sample: &Sample<f64>) -> String {
    let mut out = (1..=sample.d()).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
    out.push_str(",y\n");
    for (r, y) in sample.rows().zip(sample.y()) {
        for v in r {
            out.push_str(&fmt_f64(*v));
            out.push(',');
        }
        out.push_str(&fmt_f64(*y));
        out.push('\n');
    }
    out
}

pub fn write_sample(path: &Path, sample: &Sample<f64>) -> Result<()> {
    std::fs::write(path, sample_to_csv(sample))?;
    Ok(())
}

/// A flat table written as CSV.
pub fn table_to_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}
