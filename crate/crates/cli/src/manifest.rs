use std::fs;
use std::path::{Path, PathBuf};

use lambshift_core::experiments::ExperimentConfig;
use serde::{Deserialize, Serialize};

/// Record of one CLI invocation. Unlike the pipeline reports it carries
/// wall-clock data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub config: Option<ExperimentConfig>,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    /// Seconds since the Unix epoch at start.
    pub started_unix_s: f64,
    pub wall_clock_s: f64,
    pub success: bool,
    pub error: Option<String>,
    pub artifacts: Vec<PathBuf>,
}

impl RunManifest {
    pub fn path_in(out_dir: &Path, command: &str) -> PathBuf {
        out_dir.join(format!("{}_manifest.json", command.replace('-', "_")))
    }

    pub fn write(&self) -> std::io::Result<PathBuf> {
        fs::create_dir_all(&self.out_dir)?;
        let path = Self::path_in(&self.out_dir, &self.command);
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
