//! Output directory handling and the run manifest written beside every
//! command's results.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    /// Time steps per period actually used, for commands that propagate.
    pub steps: Option<usize>,
    pub version: String,
    pub wall_time_s: f64,
    /// File name to lowercase hex SHA-256.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Writes a command's files into one directory. Every name is checked up
/// front so a run without `--force` never leaves a partial overwrite.
pub struct Outputs {
    dir: PathBuf,
    command: String,
    planned: Vec<String>,
    checksums: BTreeMap<String, String>,
    started: Instant,
}

impl Outputs {
    pub fn manifest_name(command: &str) -> String {
        format!("{command}.manifest.json")
    }

    pub fn open(dir: &Path, command: &str, files: &[&str], force: bool) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
        let mut planned: Vec<String> = files.iter().map(|s| s.to_string()).collect();
        planned.push(Self::manifest_name(command));
        if !force {
            let existing: Vec<&str> = planned
                .iter()
                .filter(|name| dir.join(name).exists())
                .map(String::as_str)
                .collect();
            if !existing.is_empty() {
                return Err(CliError::Usage(format!(
                    "refusing to overwrite {} in {} (pass --force)",
                    existing.join(", "),
                    dir.display()
                )));
            }
        }
        Ok(Outputs {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            planned,
            checksums: BTreeMap::new(),
            started: Instant::now(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> CliResult<()> {
        assert!(self.planned.iter().any(|p| p == name), "unplanned output {name}");
        let bytes = bytes.as_ref();
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(path.display(), e))?;
        self.checksums.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("output types serialize");
        text.push('\n');
        self.write(name, text)
    }

    /// Writes the manifest last, covering every file written so far.
    pub fn finish(mut self, params: serde_json::Value, steps: Option<usize>) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            command: self.command.clone(),
            params,
            steps,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
            outputs: self.checksums.clone(),
        };
        let name = Self::manifest_name(&self.command);
        self.write_json(&name, &manifest)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn refuses_overwrite_without_force() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Outputs::open(dir.path(), "demo", &["a.csv"], false).unwrap();
        out.write("a.csv", "x\n").unwrap();
        let m = out.finish(serde_json::json!({"k": 1}), None).unwrap();
        assert_eq!(m.outputs["a.csv"], sha256_hex(b"x\n"));
        assert!(dir.path().join("demo.manifest.json").exists());

        let err = Outputs::open(dir.path(), "demo", &["a.csv"], false).err().unwrap();
        assert_eq!(err.exit_code(), 2);
        assert!(Outputs::open(dir.path(), "demo", &["a.csv"], true).is_ok());
        assert!(Outputs::open(dir.path(), "other", &["b.csv"], false).is_ok());
    }
}
