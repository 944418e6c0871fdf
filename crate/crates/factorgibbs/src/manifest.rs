//! The `manifest.json` written into every output directory.
//!
//! Schema version 1:
//!
//! | field | meaning |
//! |---|---|
//! | `schema_version` | always `1` |
//! | `command` | `simulate`, `fit`, `prior-check` or `invariance-study` |
//! | `config` | fully resolved settings; enough to re-run the command |
//! | `seed` | the random seed used |
//! | `inputs` | files read |
//! | `outputs` | files written, relative to the output directory |
//! | `code_version` | crate version plus `git describe` at build time |
//! | `started_unix`, `finished_unix` | wall-clock timestamps in seconds |
//! | `warnings` | anything the run flagged |

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CODE_VERSION: &str = env!("FACTORGIBBS_CODE_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<String>,
    pub code_version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub warnings: Vec<String>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        crate::io::write_json(&dir.join(MANIFEST_FILE), self)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let m: RunManifest = serde_json::from_str(&text).map_err(|e| CliError::format(path, e))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(CliError::format(
                path,
                format!("manifest schema {} is not supported (expected {SCHEMA_VERSION})", m.schema_version),
            ));
        }
        Ok(m)
    }
}
