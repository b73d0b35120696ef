use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
    exit_code: i32,
    artifacts: &'a [Artifact],
    wall_time_secs: f64,
}

/// Collects the files written by one command and their hashes.
pub struct Run {
    dir: PathBuf,
    started: Instant,
    artifacts: Vec<Artifact>,
}

impl Run {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            artifacts: Vec::new(),
        })
    }

    pub fn write(&mut self, file: &str, contents: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(file);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.artifacts.push(Artifact {
            file: file.to_string(),
            bytes: contents.len(),
            sha256: hex::encode(Sha256::digest(contents)),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(selector_core::Error::from)?;
        text.push('\n');
        self.write(file, text.as_bytes())
    }

    /// Writes `manifest.json`, which is not listed among the artifacts.
    pub fn finish<C: Serialize>(
        self,
        command: &str,
        config: &C,
        exit_code: i32,
    ) -> Result<(), CliError> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            exit_code,
            artifacts: &self.artifacts,
            wall_time_secs: self.started.elapsed().as_secs_f64(),
        };
        let mut text =
            serde_json::to_string_pretty(&manifest).map_err(selector_core::Error::from)?;
        text.push('\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}

/// Serializes CSV records into memory.
pub fn csv_bytes<F>(fill: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
{
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        fill(&mut w).map_err(selector_core::Error::from)?;
        w.flush().map_err(selector_core::Error::from)?;
    }
    Ok(buf)
}
