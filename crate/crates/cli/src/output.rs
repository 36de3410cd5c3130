//! Output writers. CSV files start with a manifest reference comment and a
//! header row; every float is printed with 9 significant digits so reruns
//! are byte-stable.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::manifest::{RunManifest, MANIFEST_FILE};

/// 9 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

pub struct CsvWriter {
    writer: BufWriter<File>,
    path: String,
}

impl CsvWriter {
    pub fn create(
        out_dir: &Path,
        name: &str,
        header: &str,
        manifest: &mut RunManifest,
    ) -> CliResult<Self> {
        let path = out_dir.join(name);
        let file = File::create(&path)
            .map_err(|e| CliError::Io(format!("create {}: {e}", path.display())))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "{}", manifest.csv_reference())?;
        writeln!(writer, "{header}")?;
        manifest.record_output(name);
        Ok(Self {
            writer,
            path: path.display().to_string(),
        })
    }

    pub fn row(&mut self, values: &[f64]) -> CliResult<()> {
        let line = values
            .iter()
            .map(|&v| fmt_float(v))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(self.writer, "{line}")
            .map_err(|e| CliError::Io(format!("write {}: {e}", self.path)))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.writer
            .flush()
            .map_err(|e| CliError::Io(format!("flush {}: {e}", self.path)))
    }
}

/// Write a JSON output with the manifest reference injected at the top
/// level.
pub fn write_json(
    out_dir: &Path,
    name: &str,
    mut value: Value,
    manifest: &mut RunManifest,
) -> CliResult<()> {
    if let Value::Object(map) = &mut value {
        map.insert(
            "manifest".into(),
            Value::String(format!("{MANIFEST_FILE} sha256:{}", manifest.config_sha256)),
        );
    }
    let path = out_dir.join(name);
    let body = serde_json::to_string_pretty(&value)
        .map_err(|e| CliError::Io(format!("serialize {name}: {e}")))?;
    std::fs::write(&path, body)
        .map_err(|e| CliError::Io(format!("write {}: {e}", path.display())))?;
    manifest.record_output(name);
    Ok(())
}

/// Baseline CSV parsing for sweep checkpoints: `omega_m,b,n` rows,
/// `#`-comment and header lines skipped.
pub fn read_checkpoint(path: &Path) -> CliResult<Vec<(f64, f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("omega_m") {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |s: Option<&str>| -> Option<f64> { s?.trim().parse().ok() };
        match (
            parse(parts.next()),
            parse(parts.next()),
            parse(parts.next()),
        ) {
            (Some(a), Some(b), Some(c)) => rows.push((a, b, c)),
            _ => {
                return Err(CliError::Io(format!(
                    "malformed checkpoint row in {}: {line:?}",
                    path.display()
                )))
            }
        }
    }
    Ok(rows)
}
