//! Output plumbing: format selection, provenance headers and atomic writes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// The resolved command line, embedded in every output file.
#[derive(Debug, Serialize)]
pub struct ExperimentSpec<'a, A: Serialize> {
    pub command: &'static str,
    pub version: &'static str,
    #[serde(flatten)]
    pub args: &'a A,
}

impl<'a, A: Serialize> ExperimentSpec<'a, A> {
    pub fn new(command: &'static str, args: &'a A) -> Self {
        Self { command, version: env!("CARGO_PKG_VERSION"), args }
    }

    /// A `# spec: {...}` line for the top of a CSV file.
    pub fn csv_comment(&self) -> Result<String> {
        Ok(format!("# spec: {}\n", serde_json::to_string(self)?))
    }
}

/// Writes `bytes` to `path` via a sibling temporary file and a rename, so a
/// reader never sees a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().with_context(|| format!("{} is not a file path", path.display()))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

/// Sends output to `path` when given, stdout otherwise.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Renders an optional number as a CSV field.
pub fn field(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}
