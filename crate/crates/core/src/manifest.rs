use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TOOL: &str = "bootlasso";

/// Build identifier printed by `--version` and recorded in manifests.
pub fn build_id() -> String {
    format!(
        "{} {} ({})",
        TOOL,
        env!("CARGO_PKG_VERSION"),
        if cfg!(debug_assertions) { "debug" } else { "release" }
    )
}

/// Record of one CLI invocation, written next to its outputs on success
/// and on failure. `args` is the fully resolved argument list; replaying it
/// reproduces the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub artifacts: Vec<String>,
    pub status: String,
    pub exit_code: i32,
    pub error: Option<String>,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}
