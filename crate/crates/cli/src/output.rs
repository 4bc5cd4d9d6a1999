//! CSV files stamped with the config hash and seed.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

/// Comment line written first in every output file.
pub fn stamp(cfg: &ExperimentConfig) -> String {
    format!("# config_hash={} seed={}", cfg.hash(), cfg.seed)
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes `stamp`, then whatever `body` emits (header row first).
pub fn write_file<F>(path: &Path, stamp: &str, body: F) -> CliResult<PathBuf>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let result = writeln!(out, "{stamp}")
        .and_then(|_| body(&mut out))
        .and_then(|_| out.flush());
    result.map_err(|e| CliError::io(path, e))?;
    Ok(path.to_path_buf())
}

/// Convenience for files made of a header and pre-formatted rows.
pub fn write_rows(path: &Path, stamp: &str, header: &str, rows: &[String]) -> CliResult<PathBuf> {
    write_file(path, stamp, |out| {
        writeln!(out, "{header}")?;
        for row in rows {
            writeln!(out, "{row}")?;
        }
        Ok(())
    })
}
