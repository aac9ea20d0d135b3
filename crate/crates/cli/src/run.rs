//! Output directory bookkeeping: every file a stage writes is hashed into
//! `manifest.json`; a failed run also leaves a `FAILED` marker next to the
//! partial outputs.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Common;

pub const MANIFEST: &str = "manifest.json";
pub const FAILED_MARKER: &str = "FAILED";

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct StageEntry {
    pub name: String,
    /// `ok` or `failed`
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub warnings: Vec<String>,
    pub outputs: Vec<FileEntry>,
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: String,
    status: &'static str,
    seed: u64,
    threads: Option<usize>,
    common: serde_json::Value,
    parameters: serde_json::Value,
    inputs: Vec<FileEntry>,
    stages: Vec<StageEntry>,
}

fn sha256_file(path: &Path) -> Result<(u64, String)> {
    let mut file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        total += n as u64;
        hasher.update(&buf[..n]);
    }
    let hex = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok((total, hex))
}

pub struct Run {
    out: PathBuf,
    manifest: Manifest,
}

/// Handle passed to a running stage for writing its outputs.
pub struct Stage<'a> {
    out: &'a Path,
    entry: StageEntry,
}

impl Stage<'_> {
    /// Writes `name` inside the output directory and records its hash.
    pub fn write(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.out.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        f(&mut w).with_context(|| format!("writing {name}"))?;
        w.flush()?;
        drop(w);
        let (bytes, sha256) = sha256_file(&path)?;
        self.entry.outputs.push(FileEntry {
            path: name.to_string(),
            bytes,
            sha256,
        });
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        eprintln!("warning [{}]: {msg}", self.entry.name);
        self.entry.warnings.push(msg);
    }
}

impl Run {
    pub fn start(common: &Common, command: &str, parameters: serde_json::Value) -> Result<Self> {
        let out = common.output_dir.clone();
        std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let stale = out.join(FAILED_MARKER);
        if stale.exists() {
            std::fs::remove_file(&stale)?;
        }
        let mut inputs = Vec::new();
        for p in [&common.input, &common.mapping, &common.administrations, &common.state_votes]
            .into_iter()
            .flatten()
        {
            if let Ok((bytes, sha256)) = sha256_file(p) {
                inputs.push(FileEntry {
                    path: p.display().to_string(),
                    bytes,
                    sha256,
                });
            }
        }
        Ok(Run {
            out,
            manifest: Manifest {
                tool: "variability",
                version: env!("CARGO_PKG_VERSION"),
                command: command.to_string(),
                status: "running",
                seed: common.seed,
                threads: common.threads,
                common: serde_json::to_value(common)?,
                parameters,
                inputs,
                stages: Vec::new(),
            },
        })
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let (bytes, sha256) = sha256_file(path)?;
        self.manifest.inputs.push(FileEntry {
            path: path.display().to_string(),
            bytes,
            sha256,
        });
        Ok(())
    }

    /// Runs one stage. An error is recorded against the stage and returned
    /// tagged with its name.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Stage) -> Result<T>) -> Result<T> {
        eprintln!("[{name}]");
        let mut stage = Stage {
            out: &self.out,
            entry: StageEntry {
                name: name.to_string(),
                status: "ok",
                error: None,
                warnings: Vec::new(),
                outputs: Vec::new(),
            },
        };
        let result = f(&mut stage);
        let mut entry = stage.entry;
        if let Err(e) = &result {
            entry.status = "failed";
            entry.error = Some(format!("{e:#}"));
        }
        self.manifest.stages.push(entry);
        result.with_context(|| format!("{name} stage failed"))
    }

    /// Writes the manifest, plus the `FAILED` marker when `failure` is set.
    pub fn finish(mut self, failure: Option<&str>) -> Result<()> {
        self.manifest.status = if failure.is_some() { "failed" } else { "ok" };
        let path = self.out.join(MANIFEST);
        let text = serde_json::to_string_pretty(&self.manifest)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        if let Some(msg) = failure {
            std::fs::write(self.out.join(FAILED_MARKER), format!("{msg}\n"))?;
        }
        Ok(())
    }
}
