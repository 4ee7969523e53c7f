use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// What a run consumed and produced, written last as `manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub version: String,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<String>,
    pub threads: usize,
    pub timings_s: Vec<(String, f64)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects inputs and outputs for one command writing into `dir`.
pub struct Run {
    dir: PathBuf,
    manifest: RunManifest,
    started: Instant,
    phase: Instant,
}

impl Run {
    pub fn new(command: &str, dir: &Path, config: &impl Serialize, seed: Option<u64>) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let config = serde_json::to_value(config)?;
        let config_hash = sha256_hex(&serde_json::to_vec(&config)?);
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                command: command.into(),
                argv: std::env::args().collect(),
                version: env!("CARGO_PKG_VERSION").into(),
                config,
                config_hash,
                seed,
                inputs: Vec::new(),
                outputs: Vec::new(),
                threads: rayon::current_num_threads(),
                timings_s: Vec::new(),
            },
            started: Instant::now(),
            phase: Instant::now(),
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.manifest.inputs.push(InputFile {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    /// Path of a new output file, recorded in the manifest.
    pub fn output(&mut self, name: &str) -> Result<PathBuf> {
        let p = self.dir.join(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        self.manifest.outputs.push(name.to_string());
        Ok(p)
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let p = self.output(name)?;
        fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s)
    }

    /// Closes a timed phase.
    pub fn lap(&mut self, label: &str) {
        self.manifest
            .timings_s
            .push((label.into(), self.phase.elapsed().as_secs_f64()));
        self.phase = Instant::now();
    }

    pub fn finish(mut self) -> Result<()> {
        self.manifest
            .timings_s
            .push(("total".into(), self.started.elapsed().as_secs_f64()));
        let p = self.dir.join("manifest.json");
        let mut s = serde_json::to_string_pretty(&self.manifest)?;
        s.push('\n');
        fs::write(&p, s).with_context(|| format!("writing {}", p.display()))
    }
}
