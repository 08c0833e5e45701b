//! Figure-ready dataset writers.
//!
//! CSV dialect: comma-separated, `#`-prefixed header comments carrying
//! the tool version and units, one column-name row, and values at full
//! double precision (17 significant digits) so files round-trip
//! losslessly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `{:.16e}` carries 17 significant digits: lossless for f64.
pub fn fmt_full(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvWriter {
    writer: BufWriter<File>,
    path: PathBuf,
}

impl CsvWriter {
    /// Opens the file and writes the comment header: tool line, the
    /// command, unit statements, then custom lines.
    pub fn create(
        path: &Path,
        command: &str,
        j_rad_per_ns: Option<f64>,
        extra_comments: &[String],
    ) -> Result<Self> {
        let file =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "# qlattice v{VERSION}")?;
        writeln!(writer, "# command: {command}")?;
        writeln!(writer, "# time unit: 1/J; energies and rates in units of J (angular)")?;
        if let Some(j) = j_rad_per_ns {
            writeln!(writer, "# device scale: J = {} rad/ns, 1/J = {} ns", fmt_full(j), fmt_full(1.0 / j))?;
        }
        for line in extra_comments {
            writeln!(writer, "# {line}")?;
        }
        Ok(Self { writer, path: path.to_path_buf() })
    }

    pub fn columns(&mut self, names: &[&str]) -> Result<()> {
        writeln!(self.writer, "{}", names.join(","))?;
        Ok(())
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        let fields: Vec<String> = values.iter().map(|&v| fmt_full(v)).collect();
        writeln!(self.writer, "{}", fields.join(","))?;
        Ok(())
    }

    /// Row with a leading set of already-formatted fields (for flags
    /// and labels) followed by numeric columns.
    pub fn mixed_row(&mut self, prefix: &[String], values: &[f64]) -> Result<()> {
        let mut fields = prefix.to_vec();
        fields.extend(values.iter().map(|&v| fmt_full(v)));
        writeln!(self.writer, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush()?;
        Ok(self.path)
    }
}

/// Pretty JSON with a trailing newline; field order follows the struct
/// definition, so output bytes are deterministic.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_precision_formatting_round_trips() {
        for x in [
            core::f64::consts::PI,
            -1.0 / 3.0,
            6.768467167699e-23,
            1.7976931348623157e308,
            0.1 + 0.2,
        ] {
            let back: f64 = fmt_full(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} reparsed as {back}");
        }
    }
}
