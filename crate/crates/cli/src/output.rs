use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tte3o_core::{Error, Result};

use crate::request::SCHEMA_VERSION;

/// Schema-versioned result with the inputs that produced it.
#[derive(Debug, Serialize)]
pub struct ResultDocument<I: Serialize, O: Serialize> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub inputs: I,
    pub outputs: O,
}

impl<I: Serialize, O: Serialize> ResultDocument<I, O> {
    pub fn new(command: &'static str, inputs: I, outputs: O) -> Self {
        ResultDocument {
            schema_version: SCHEMA_VERSION,
            tool: "tte3o",
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs,
            outputs,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("result documents serialize");
        text.push('\n');
        text
    }
}

/// Fixed-point number, or `none` for an absent (infinite) boundary.
pub fn fmt(x: f64, precision: usize) -> String {
    if x.is_finite() {
        format!("{x:.precision$}")
    } else {
        "none".to_string()
    }
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::Io(format!("stdout: {e}")))
        }
    }
}

pub fn csv_text<F>(header: &[&str], write_rows: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    write_rows(&mut w).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Left-aligned first column, right-aligned rest.
pub fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|j| {
            rows.iter()
                .map(|r| r[j].len())
                .chain([header[j].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(j, (c, w))| {
                if j == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut text = line(header.to_vec());
    for r in rows {
        text += &line(r.iter().map(String::as_str).collect());
    }
    text
}
