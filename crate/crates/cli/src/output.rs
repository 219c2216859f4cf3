//! Artifact directory handling: JSON/CSV files plus a manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";
/// Present only when a run stopped early; holds the error message.
pub const FAILURE_MARKER: &str = "FAILED";

#[derive(Debug, Serialize, serde::Deserialize, PartialEq)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: String,
    pub error: Option<String>,
    pub files: Vec<String>,
    pub config: serde_json::Value,
}

pub struct ArtifactWriter {
    dir: PathBuf,
    files: Vec<String>,
}

impl ArtifactWriter {
    pub fn create(dir: impl Into<PathBuf>) -> CliResult<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let marker = dir.join(FAILURE_MARKER);
        if marker.exists() {
            fs::remove_file(&marker).map_err(|e| CliError::io(&marker, e))?;
        }
        Ok(Self { dir, files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn text(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(path)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut s = serde_json::to_string_pretty(value).map_err(structure_core::Error::from)?;
        s.push('\n');
        self.text(name, &s)
    }

    fn manifest(&self, command: &str, config: &impl Serialize, error: Option<String>) -> CliResult<()> {
        let m = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            status: if error.is_some() { "failed" } else { "ok" }.to_string(),
            error,
            files: self.files.clone(),
            config: serde_json::to_value(config).map_err(structure_core::Error::from)?,
        };
        let path = self.dir.join(MANIFEST);
        let mut s = serde_json::to_string_pretty(&m).map_err(structure_core::Error::from)?;
        s.push('\n');
        fs::write(&path, s).map_err(|e| CliError::io(&path, e))
    }

    pub fn finish(self, command: &str, config: &impl Serialize) -> CliResult<Vec<String>> {
        self.manifest(command, config, None)?;
        Ok(self.files)
    }

    /// Records the failure next to whatever artifacts were already written.
    pub fn fail(self, command: &str, config: &impl Serialize, err: &CliError) -> CliResult<()> {
        let marker = self.dir.join(FAILURE_MARKER);
        fs::write(&marker, format!("{err}\n")).map_err(|e| CliError::io(&marker, e))?;
        self.manifest(command, config, Some(err.to_string()))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let s = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&s).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Formats a float so that it parses back to the same value.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
