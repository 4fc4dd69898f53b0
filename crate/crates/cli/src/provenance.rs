use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Config;

pub const TOOL: &str = "fusekit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

/// Traceability block written at the top of every report.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// SHA-256 of the compact JSON of `config`.
    pub config_hash: String,
    pub config: Config,
    /// Command-specific settings that are not part of the shared config.
    pub options: Value,
    pub inputs: Vec<InputHash>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Provenance {
    pub fn new(command: &str, config: &Config, options: impl Serialize) -> Self {
        let json = serde_json::to_vec(config).expect("config serializes");
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            config_hash: sha256_hex(&json),
            config: config.clone(),
            options: serde_json::to_value(options).expect("options serialize"),
            inputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(InputHash {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
    }
}

/// A report body with the provenance block in front.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub provenance: &'a Provenance,
    #[serde(flatten)]
    pub body: T,
}
