//! File formats: design matrices and responses as CSV (rows are
//! observations, optional header), signed models as JSON.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{DesignMatrix, SignedModel};

/// Reads numeric CSV rows. A first row that does not parse as numbers is
/// treated as a header and skipped.
pub fn read_numeric_csv<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("line {}: {e}", line + 1))),
        }
    }
    Ok(rows)
}

pub fn read_design<R: Read>(input: R) -> Result<DesignMatrix> {
    let rows = read_numeric_csv(input)?;
    if rows.is_empty() {
        return Err(Error::Parse("design file has no numeric rows".into()));
    }
    DesignMatrix::from_rows(&rows)
}

pub fn read_design_file(path: &Path) -> Result<DesignMatrix> {
    read_design(std::fs::File::open(path)?)
}

/// Reads a response vector: either one value per row or a single row.
pub fn read_response<R: Read>(input: R) -> Result<Vec<f64>> {
    let rows = read_numeric_csv(input)?;
    match rows.as_slice() {
        [single] => Ok(single.clone()),
        many if many.iter().all(|r| r.len() == 1) => Ok(many.iter().map(|r| r[0]).collect()),
        _ => Err(Error::Parse("response must be a single column or a single row".into())),
    }
}

pub fn read_response_file(path: &Path) -> Result<Vec<f64>> {
    read_response(std::fs::File::open(path)?)
}

pub fn read_model<R: Read>(input: R) -> Result<SignedModel> {
    Ok(serde_json::from_reader(input)?)
}

pub fn read_model_file(path: &Path) -> Result<SignedModel> {
    read_model(std::fs::File::open(path)?)
}

/// Writes a design as CSV rows.
pub fn write_design<W: std::io::Write>(x0: &DesignMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in x0.rows() {
        w.write_record(row.iter().map(|&v| format_g17(v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros dropped,
/// exponent form outside `1e-4 ..= 1e17`. Always round-trips.
pub fn format_g17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_fraction(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// serde_json formatter writing floats through [`format_g17`].
#[derive(Debug, Clone, Copy, Default)]
pub struct G17Formatter;

impl serde_json::ser::Formatter for G17Formatter {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_g17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes to compact JSON with 17-significant-digit floats.
pub fn to_json_g17<T: serde::Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17Formatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}
