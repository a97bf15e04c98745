//! Per-project settings, read from a JSON file. Tokens never live here;
//! they come from the environment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::linker::TrackerKind;

pub const DEFAULT_SEED: u64 = 20_210_521;

fn default_branch() -> String {
    "main".to_string()
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub repo: PathBuf,
    #[serde(default = "default_branch")]
    pub branch: String,
    pub tracker: TrackerKind,
    #[serde(default)]
    pub project_key: String,
    #[serde(default)]
    pub api_base_url: Option<String>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ProjectConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| ConfigError::Invalid {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}
