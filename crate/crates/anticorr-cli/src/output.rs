//! Output formatting: 12-significant-digit numbers, JSON with that float
//! convention, and plain CSV (comma-separated, header row, LF endings).

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

/// Formats a float with 12 significant digits. This is the precision
/// contract of every numeric CSV/JSON field the tool emits.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if !v.is_finite() {
        // never expected on the output paths; keep it greppable
        format!("{v}")
    } else {
        format!("{v:.11e}")
    }
}

/// Cell helper: absent statistics become empty CSV cells.
pub fn opt_cell(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

struct TwelveDigitFormatter;

impl serde_json::ser::Formatter for TwelveDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        writer.write_all(fmt_sig(value).as_bytes())
    }
}

/// Serializes a JSON value with the 12-digit float convention. Key order is
/// deterministic (alphabetical), which is what makes rerun outputs
/// byte-comparable.
pub fn to_json_string(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, TwelveDigitFormatter);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    String::from_utf8(out).expect("serializer emits UTF-8")
}

/// Stdout or a file, depending on whether a path was given.
pub fn writer_for(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    match path {
        Some(p) => Ok(Box::new(File::create(p)?)),
        None => Ok(Box::new(io::stdout())),
    }
}

pub fn write_csv(
    out: &mut dyn Write,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
