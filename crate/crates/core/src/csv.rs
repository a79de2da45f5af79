//! Plain CSV for point batches and numeric tables. Numbers are written with
//! 17 significant digits in the style of C's `%.17g`, with `.` as decimal
//! separator and `\n` line endings, so output is identical across platforms
//! and parses back to the same `f64`.

use std::fmt::Write as _;

use crate::batch::PointBatch;
use crate::error::{Error, Result};

pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Header plus one line per row.
pub fn write_table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(format_number).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// One line per item with columns `c0..c{d-1}` and an optional final `label`.
pub fn write_batch(batch: &PointBatch, labels: Option<&[u32]>) -> String {
    let mut out = String::new();
    let names: Vec<String> = (0..batch.dim()).map(|k| format!("c{k}")).collect();
    out.push_str(&names.join(","));
    if labels.is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for (i, row) in batch.rows().enumerate() {
        let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
        out.push_str(&cells.join(","));
        if let Some(l) = labels {
            let _ = write!(out, ",{}", l[i]);
        }
        out.push('\n');
    }
    out
}

/// Square matrix as CSV with header `c0..c{n-1}`.
pub fn write_matrix(values: &[f64], n: usize) -> String {
    let names: Vec<String> = (0..n).map(|k| format!("c{k}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    write_table(&names, values.chunks(n.max(1)).map(|r| r.to_vec()))
}

/// Parses a batch written by [`write_batch`]. A first line that does not
/// parse as numbers is treated as the header; a header column named `label`
/// in last position is read as integer labels.
pub fn read_batch(text: &str) -> Result<(PointBatch, Option<Vec<u32>>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    let mut has_label = false;
    if let Some(&(_, first)) = lines.peek() {
        let cells: Vec<&str> = first.split(',').map(str::trim).collect();
        if cells.iter().any(|c| c.parse::<f64>().is_err()) {
            has_label = cells.last() == Some(&"label");
            lines.next();
        }
    }
    let mut width = None;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut count = 0;
    for (idx, line) in lines {
        let mut cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if has_label {
            let raw = cells.pop().unwrap_or_default();
            labels.push(raw.parse::<u32>().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("bad label {raw:?}"),
            })?);
        }
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {w} values, found {}", cells.len()),
                })
            }
            _ => {}
        }
        for c in cells {
            data.push(c.parse::<f64>().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("bad number {c:?}"),
            })?);
        }
        count += 1;
    }
    let width = width.ok_or(Error::Parse {
        line: 0,
        message: "no data rows".into(),
    })?;
    let batch = PointBatch::new(count, width, data)?;
    Ok((batch, has_label.then_some(labels)))
}
