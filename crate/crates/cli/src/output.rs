//! Numeric tables written as CSV or JSON.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::Result;

/// Rows of numbers under named columns. `NaN` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_number(x)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let map: Map<String, Value> = self
                    .headers
                    .iter()
                    .zip(row)
                    .map(|(h, &x)| (h.clone(), serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)))
                    .collect();
                Value::Object(map)
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &records)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write(&self, format: Format, path: Option<&Path>) -> Result<()> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        };
        match format {
            Format::Csv => self.write_csv(sink),
            Format::Json => self.write_json(sink),
        }
    }
}

/// Shortest form with 15 significant digits; empty for `NaN`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.14e}");
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..15).contains(&exponent) {
        let decimals = (14 - exponent).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_fifteen_digits() {
        assert_eq!(format_number(3.129162552082741), "3.12916255208274");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-0.25), "-0.25");
        assert_eq!(format_number(1e-9), "1e-9");
        assert_eq!(format_number(123456789012345678.0), "1.23456789012346e17");
        assert_eq!(format_number(f64::NAN), "");
        for x in [std::f64::consts::PI, 1.0 / 3.0, 2.5e-7, 6.02e23] {
            let y: f64 = format_number(x).parse().unwrap();
            assert!((y - x).abs() <= 1e-14 * x.abs());
        }
    }

    #[test]
    fn csv_and_json() {
        let mut t = Table::new(["a", "lambda_1"]);
        t.push(vec![1.0, 3.5]);
        t.push(vec![1.1, f64::NAN]);
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "a,lambda_1\n1,3.5\n1.1,\n");
        let mut json = Vec::new();
        t.write_json(&mut json).unwrap();
        let v: Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v[0]["lambda_1"], 3.5);
        assert!(v[1]["lambda_1"].is_null());
        assert_eq!(t.column("a"), Some(vec![1.0, 1.1]));
    }
}
