//! Output directory handling and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const OUTPUT_DIR_ENV: &str = "KCOUNT_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "kcount-out";

#[derive(Serialize)]
pub struct Manifest {
    pub subcommand: &'static str,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub seed: u64,
    /// `sha256:<hex>` of the input edge list, if there is one.
    pub input_digest: Option<String>,
    pub parameters: Value,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(subcommand: &'static str, seed: u64, parameters: Value) -> Self {
        Manifest {
            subcommand,
            tool: env!("CARGO_PKG_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            seed,
            input_digest: None,
            parameters,
            outputs: Vec::new(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

pub fn unix_timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Files collected in memory and written together once every one of them is
/// ready. Each file goes to a temporary name first and is renamed into place.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Self {
        OutputSet { dir: dir.to_path_buf(), files: Vec::new() }
    }

    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_owned(), contents));
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Adds `manifest.json` listing every other file, then writes everything.
    pub fn commit(mut self, mut manifest: Manifest) -> Result<()> {
        manifest.outputs = self.names();
        let text = to_json(&manifest)?;
        self.add("manifest.json", text);

        fs::create_dir_all(&self.dir)
            .with_context(|| format!("cannot create output directory {}", self.dir.display()))?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let tmp = self.dir.join(format!(".{name}.partial"));
            if let Err(e) = fs::write(&tmp, contents) {
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                let _ = fs::remove_file(&tmp);
                return Err(e).with_context(|| format!("cannot write {}", tmp.display()));
            }
            staged.push((tmp, self.dir.join(name)));
        }
        for (tmp, path) in staged {
            fs::rename(&tmp, &path).with_context(|| format!("cannot write {}", path.display()))?;
        }
        Ok(())
    }
}
