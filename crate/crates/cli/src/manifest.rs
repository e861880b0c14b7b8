//! Output directory with a content-addressed manifest.

use std::path::{Path, PathBuf};

use levyhit::montecarlo::sha256_hex;
use levyhit::rng::SPLIT_SCHEME;
use levyhit::{Error, Result};
use serde::Serialize;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Provenance of one run. Contains no timestamps so reruns are identical.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub library_version: String,
    /// SHA-256 of the resolved configuration (`config.toml` or the argument record).
    pub config_hash: String,
    pub seed: Option<u64>,
    /// Sub-stream derivation; any replicate is `stream(seed, purpose, index)`.
    pub stream_scheme: String,
    pub files: Vec<FileEntry>,
}

/// Single writer for one output directory.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.record(name, contents);
        Ok(path)
    }

    /// Registers a file written by other means.
    pub fn record(&mut self, name: &str, contents: &[u8]) {
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry {
            path: name.to_string(),
            sha256: sha256_hex(contents),
            bytes: contents.len(),
        });
    }

    pub fn finish(mut self, command: &str, config_hash: String, seed: Option<u64>) -> Result<Manifest> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let m = Manifest {
            command: command.to_string(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            seed,
            stream_scheme: SPLIT_SCHEME.to_string(),
            files: self.files,
        };
        let text = serde_json::to_string_pretty(&m).expect("manifest serialization") + "\n";
        let path = self.dir.join(MANIFEST_NAME);
        std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok(m)
    }
}
