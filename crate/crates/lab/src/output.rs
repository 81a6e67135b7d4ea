//! Deterministic output: RFC-4180 CSV (UTF-8, '.' decimal, 17 significant
//! digits, CRLF) plus a JSON summary embedding the resolved scenario.
//! Files are written atomically (temp file + rename).

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::scenario::Scenario;
use crate::CliError;

/// 17 significant digits — enough to reproduce any f64 bit pattern.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push_str("\r\n");
        Self {
            buf,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "ragged CSV row");
        self.buf.push_str(&fields.join(","));
        self.buf.push_str("\r\n");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp: PathBuf = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    let io = |e: std::io::Error| CliError::Numerical(format!("writing {}: {e}", path.display()));
    {
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}

/// Common envelope of every JSON summary.
#[derive(Serialize)]
pub struct Summary<T: Serialize> {
    pub command: String,
    /// Scenario with CLI overrides applied; reparses to an equivalent config.
    pub scenario: Scenario,
    pub seed: u64,
    pub engine: String,
    pub wall_time_s: f64,
    pub results: T,
}

pub struct OutPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
}

pub fn out_paths(out_dir: &Path, name: &str, command: &str) -> Result<OutPaths, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Numerical(format!("creating {}: {e}", out_dir.display())))?;
    Ok(OutPaths {
        csv: out_dir.join(format!("{name}.{command}.csv")),
        json: out_dir.join(format!("{name}.{command}.json")),
    })
}

pub fn write_outputs<T: Serialize>(
    paths: &OutPaths,
    csv: Csv,
    summary: &Summary<T>,
) -> Result<(), CliError> {
    write_atomic(&paths.csv, &csv.into_bytes())?;
    let json = serde_json::to_vec_pretty(summary)
        .map_err(|e| CliError::Numerical(format!("serializing summary: {e}")))?;
    write_atomic(&paths.json, &json)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_17_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        let x = std::f64::consts::PI;
        let parsed: f64 = fmt_f64(x).parse().unwrap();
        assert_eq!(parsed.to_bits(), x.to_bits());
    }

    #[test]
    fn csv_rows_are_crlf_terminated() {
        let mut csv = Csv::new(&["a", "b"]);
        csv.row(&["1".into(), "2".into()]);
        let text = String::from_utf8(csv.into_bytes()).unwrap();
        assert_eq!(text, "a,b\r\n1,2\r\n");
    }
}
