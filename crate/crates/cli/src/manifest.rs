use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Everything needed to rerun a command: what ran, on which inputs, with which tool.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub args: serde_json::Value,
    /// sha256 of each input file, keyed by the path as given.
    pub input_digests: BTreeMap<String, String>,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub point_cap: u64,
    pub elapsed_s: f64,
}

/// Reads inputs and records their digests for the manifest.
#[derive(Debug, Default)]
pub struct Inputs {
    pub digests: BTreeMap<String, String>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.digests
            .insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }
}

impl RunManifest {
    pub fn new(
        subcommand: &'static str,
        args: serde_json::Value,
        inputs: Inputs,
        seed: Option<u64>,
        point_cap: u64,
        elapsed: Duration,
    ) -> Self {
        RunManifest {
            subcommand,
            args,
            input_digests: inputs.digests,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            point_cap,
            elapsed_s: elapsed.as_secs_f64(),
        }
    }
}
