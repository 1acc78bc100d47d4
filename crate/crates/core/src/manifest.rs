//! Run manifest embedded in every CLI report: what ran, on what, and how.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// subcommand that produced the report
    pub command: String,
    /// input files or directories, as given on the command line
    pub input_paths: Vec<String>,
    /// full effective configuration after defaults and env were applied
    pub config_snapshot: serde_json::Value,
    /// RNG seed in effect (explicit flag, MRGC_SEED, or the default)
    pub seed: u64,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(
        command: &str,
        input_paths: Vec<String>,
        config_snapshot: serde_json::Value,
        seed: u64,
    ) -> Self {
        RunManifest {
            command: command.to_string(),
            input_paths,
            config_snapshot,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}
