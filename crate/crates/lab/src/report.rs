//! Report rows and their CSV / JSON encodings.
//!
//! CSV columns, in order:
//! `case_id,surface,basepoint,quantity,value,reference_value,residual,pass`.
//! Floats are written as `{:.16e}` (17 significant digits); an absent
//! reference value is an empty field. JSON mirrors the field names, with
//! `null` for absent or non-finite numbers.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::value::RawValue;

use crate::config::Format;

pub const CSV_HEADER: [&str; 8] =
    ["case_id", "surface", "basepoint", "quantity", "value", "reference_value", "residual", "pass"];

pub const SCAN_HEADER: [&str; 4] = ["R", "naive_ratio", "geometric_ratio", "slack"];

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub case_id: String,
    pub surface: String,
    /// Ambient coordinates of `p`, `;`-separated.
    pub basepoint: String,
    pub quantity: String,
    pub value: f64,
    pub reference_value: Option<f64>,
    pub residual: f64,
    pub pass: bool,
}

impl ReportRow {
    /// A row whose pass flag is `residual ≤ tolerance`.
    pub fn checked(
        case_id: &str,
        surface: &str,
        basepoint: &str,
        quantity: &str,
        value: f64,
        reference_value: Option<f64>,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        ReportRow {
            case_id: case_id.into(),
            surface: surface.into(),
            basepoint: basepoint.into(),
            quantity: quantity.into(),
            value,
            reference_value,
            residual,
            pass: residual <= tolerance,
        }
    }

    /// A failed row for a case that could not be computed.
    pub fn failure(case_id: &str, surface: &str, message: &str) -> Self {
        ReportRow {
            case_id: case_id.into(),
            surface: surface.into(),
            basepoint: String::new(),
            quantity: format!("error: {message}"),
            value: f64::NAN,
            reference_value: None,
            residual: f64::INFINITY,
            pass: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanTableRow {
    pub r: f64,
    pub naive_ratio: f64,
    pub geometric_ratio: f64,
    pub slack: f64,
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn format_point(p: &[f64]) -> String {
    p.iter().map(|x| format_float(*x)).collect::<Vec<_>>().join(";")
}

fn json_number(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { format!("{x:.16e}") } else { "null".into() };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

#[derive(Serialize)]
struct JsonRow<'a> {
    case_id: &'a str,
    surface: &'a str,
    basepoint: &'a str,
    quantity: &'a str,
    value: Box<RawValue>,
    reference_value: Box<RawValue>,
    residual: Box<RawValue>,
    pass: bool,
}

#[derive(Serialize)]
struct JsonScanRow {
    #[serde(rename = "R")]
    r: Box<RawValue>,
    naive_ratio: Box<RawValue>,
    geometric_ratio: Box<RawValue>,
    slack: Box<RawValue>,
}

#[derive(Serialize)]
struct Document<'a, R> {
    command: &'a str,
    rows: Vec<R>,
}

fn csv_error(e: csv::Error) -> io::Error {
    io::Error::new(io::ErrorKind::Other, e)
}

fn write_csv_records<W: Write, I>(out: W, header: &[&str], records: I) -> io::Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for r in records {
        w.write_record(&r).map_err(csv_error)?;
    }
    w.flush()
}

pub fn write_rows<W: Write>(mut out: W, command: &str, rows: &[ReportRow], format: Format) -> io::Result<()> {
    match format {
        Format::Csv => write_csv_records(
            out,
            &CSV_HEADER,
            rows.iter().map(|r| {
                vec![
                    r.case_id.clone(),
                    r.surface.clone(),
                    r.basepoint.clone(),
                    r.quantity.clone(),
                    format_float(r.value),
                    r.reference_value.map(format_float).unwrap_or_default(),
                    format_float(r.residual),
                    r.pass.to_string(),
                ]
            }),
        ),
        Format::Json => {
            let doc = Document {
                command,
                rows: rows
                    .iter()
                    .map(|r| JsonRow {
                        case_id: &r.case_id,
                        surface: &r.surface,
                        basepoint: &r.basepoint,
                        quantity: &r.quantity,
                        value: json_number(r.value),
                        reference_value: json_number(r.reference_value.unwrap_or(f64::NAN)),
                        residual: json_number(r.residual),
                        pass: r.pass,
                    })
                    .collect(),
            };
            serde_json::to_writer_pretty(&mut out, &doc)?;
            out.write_all(b"\n")
        }
    }
}

pub fn write_scan<W: Write>(mut out: W, rows: &[ScanTableRow], format: Format) -> io::Result<()> {
    match format {
        Format::Csv => write_csv_records(
            out,
            &SCAN_HEADER,
            rows.iter().map(|r| {
                [r.r, r.naive_ratio, r.geometric_ratio, r.slack].iter().map(|x| format_float(*x)).collect()
            }),
        ),
        Format::Json => {
            let doc = Document {
                command: "helicoid-scan",
                rows: rows
                    .iter()
                    .map(|r| JsonScanRow {
                        r: json_number(r.r),
                        naive_ratio: json_number(r.naive_ratio),
                        geometric_ratio: json_number(r.geometric_ratio),
                        slack: json_number(r.slack),
                    })
                    .collect(),
            };
            serde_json::to_writer_pretty(&mut out, &doc)?;
            out.write_all(b"\n")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        let s = format_float(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn csv_quotes_fields_with_commas() {
        let row = ReportRow::checked("c0", "plane(n=3)+mobius(0.4,0)", "0;0;0", "slack", 1.0, None, 0.0, 1e-9);
        let mut buf = Vec::new();
        write_rows(&mut buf, "verify-theorem", &[row], Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.split("\r\n");
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "c0,\"plane(n=3)+mobius(0.4,0)\",0;0;0,slack,1.0000000000000000e0,,0.0000000000000000e0,true"
        );
    }

    #[test]
    fn json_document_parses_back() {
        let rows = [ScanTableRow { r: 2.0, naive_ratio: 1.5, geometric_ratio: 0.0, slack: f64::NAN }];
        let mut buf = Vec::new();
        write_scan(&mut buf, &rows, Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["command"], "helicoid-scan");
        assert_eq!(v["rows"][0]["R"].as_f64(), Some(2.0));
        assert!(v["rows"][0]["slack"].is_null());
    }
}
