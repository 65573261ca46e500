//! Run manifests for reproducibility audits.
//!
//! A manifest records the command, its effective configuration, SHA-256
//! digests of inputs and outputs, and result counts. The wall-clock time is
//! kept in `created_unix_secs`; everything else is a pure function of the
//! inputs and flags.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TOOL_NAME: &str = "adaptmt";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub path: String,
    /// `None` for standard input/output, which cannot be re-read.
    pub sha256: Option<String>,
    pub lines: Option<usize>,
}

impl FileDigest {
    pub fn of(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if path.as_os_str() == "-" {
            return Ok(FileDigest {
                path: "-".into(),
                sha256: None,
                lines: None,
            });
        }
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(FileDigest {
            path: path.display().to_string(),
            sha256: Some(hex::encode(Sha256::digest(&bytes))),
            lines: Some(bytes.iter().filter(|&&b| b == b'\n').count()),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub counts: Value,
    pub warnings: Vec<String>,
    pub created_unix_secs: u64,
}

impl Manifest {
    pub fn new(command: impl Into<String>, config: impl Serialize) -> Self {
        Manifest {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            command: command.into(),
            config: serde_json::to_value(config).unwrap_or(Value::Null),
            inputs: Vec::new(),
            outputs: Vec::new(),
            counts: Value::Null,
            warnings: Vec::new(),
            created_unix_secs: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn input(mut self, path: impl AsRef<Path>) -> Result<Self> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(self)
    }

    pub fn output(mut self, path: impl AsRef<Path>) -> Result<Self> {
        self.outputs.push(FileDigest::of(path)?);
        Ok(self)
    }

    pub fn counts(mut self, counts: impl Serialize) -> Self {
        self.counts = serde_json::to_value(counts).unwrap_or(Value::Null);
        self
    }

    pub fn warn(mut self, warning: impl Into<String>) -> Self {
        self.warnings.push(warning.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}
