//! Table serialization. CSV numbers carry 12 significant digits in
//! scientific notation; JSON numbers use the shortest representation that
//! parses back to the same `f64`.

use csv::{Terminator, WriterBuilder};
use serde::Serialize;

use crate::CliError;

pub fn fmt_f64(v: f64) -> String {
    // -0 and 0 are the same number in a table
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.11e}")
}

/// Write a header and rows; each row is already formatted.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_f64(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(fmt_f64(-1.5e-7), "-1.50000000000e-7");
        assert_eq!(fmt_f64(-0.0), "0.00000000000e0");
    }

    #[test]
    fn lf_line_endings() {
        let s = csv_table(&["a", "b"], vec![vec!["1".into(), "2".into()]]).unwrap();
        assert_eq!(s, "a,b\n1,2\n");
    }
}
