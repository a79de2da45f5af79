//! Writing run outputs with a manifest of the resolved config and the
//! SHA-256 of every file, and re-checking a run against its manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

/// One named output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: &str, bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            name: name.to_string(),
            bytes: bytes.into(),
        }
    }

    pub fn json<T: Serialize>(name: &str, value: &T) -> Result<Self, CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Validation(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        Ok(Self::new(name, text))
    }
}

/// Everything a subcommand produced; `files[primary]` is what `--out` and
/// standard output receive.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<Artifact>,
    pub primary: usize,
}

impl Outcome {
    pub fn single(file: Artifact) -> Self {
        Self {
            files: vec![file],
            primary: 0,
        }
    }

    pub fn primary(&self) -> &Artifact {
        &self.files[self.primary]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: serde_json::Value,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn manifest_for(config: &serde_json::Value, files: &[&Artifact]) -> Manifest {
    Manifest {
        tool: "eccentric".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        files: files
            .iter()
            .map(|a| FileEntry {
                name: a.name.clone(),
                bytes: a.bytes.len(),
                sha256: sha256_hex(&a.bytes),
            })
            .collect(),
    }
}

/// Where a run's files go.
pub enum Destination {
    Stdout,
    File(PathBuf),
    Dir(PathBuf),
}

impl Destination {
    fn manifest_path(&self) -> Option<PathBuf> {
        match self {
            Destination::Stdout => None,
            Destination::File(p) => {
                let mut name = p.file_name().unwrap_or_default().to_os_string();
                name.push(".manifest.json");
                Some(p.with_file_name(name))
            }
            Destination::Dir(d) => Some(d.join(MANIFEST_NAME)),
        }
    }

    /// Files to write, named as they appear on disk.
    fn selected(&self, outcome: &Outcome) -> Vec<(Artifact, PathBuf)> {
        match self {
            Destination::Stdout => Vec::new(),
            Destination::File(p) => {
                let name = p.file_name().unwrap_or_default().to_string_lossy();
                vec![(Artifact::new(&name, outcome.primary().bytes.clone()), p.clone())]
            }
            Destination::Dir(d) => outcome.files.iter().map(|a| (a.clone(), d.join(&a.name))).collect(),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Validation(format!("{}: {e}", path.display()))
}

pub fn emit(outcome: &Outcome, dest: &Destination, config: &serde_json::Value) -> Result<(), CliError> {
    if let Destination::Stdout = dest {
        use std::io::Write;
        let primary = outcome.primary();
        if std::str::from_utf8(&primary.bytes).is_err() {
            return Err(CliError::Validation(format!(
                "{} is binary; pass --out or --out-dir",
                primary.name
            )));
        }
        std::io::stdout()
            .write_all(&primary.bytes)
            .map_err(|e| CliError::Validation(format!("stdout: {e}")))?;
        return Ok(());
    }
    if let Destination::Dir(d) = dest {
        fs::create_dir_all(d).map_err(|e| io_error(d, e))?;
    }
    let selected = dest.selected(outcome);
    for (artifact, path) in &selected {
        fs::write(path, &artifact.bytes).map_err(|e| io_error(path, e))?;
    }
    let files: Vec<&Artifact> = selected.iter().map(|(a, _)| a).collect();
    let manifest = Artifact::json(MANIFEST_NAME, &manifest_for(config, &files))?;
    let path = dest.manifest_path().expect("file destinations have a manifest");
    fs::write(&path, &manifest.bytes).map_err(|e| io_error(&path, e))
}

/// Compares a fresh recomputation with the recorded manifest and the files
/// on disk; returns one line per problem.
pub fn verify(outcome: &Outcome, dest: &Destination, config: &serde_json::Value) -> Result<Vec<String>, CliError> {
    let path = dest
        .manifest_path()
        .ok_or_else(|| CliError::Usage("--verify needs --out or --out-dir".into()))?;
    let text = fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
    let recorded: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let mut problems = Vec::new();
    if &recorded.config != config {
        problems.push("resolved config differs from the manifest".to_string());
    }
    let selected = dest.selected(outcome);
    let fresh = manifest_for(config, &selected.iter().map(|(a, _)| a).collect::<Vec<_>>());
    for entry in &fresh.files {
        match recorded.files.iter().find(|f| f.name == entry.name) {
            None => problems.push(format!("{}: not in manifest", entry.name)),
            Some(r) if r.sha256 != entry.sha256 => {
                problems.push(format!("{}: recomputed hash differs from manifest", entry.name))
            }
            Some(_) => {}
        }
    }
    for r in &recorded.files {
        if !fresh.files.iter().any(|f| f.name == r.name) {
            problems.push(format!("{}: listed in manifest but not produced", r.name));
        }
    }
    for (artifact, file) in &selected {
        match fs::read(file) {
            Ok(bytes) if sha256_hex(&bytes) == sha256_hex(&artifact.bytes) => {}
            Ok(_) => problems.push(format!("{}: file on disk differs from recomputation", artifact.name)),
            Err(e) => problems.push(format!("{}: {e}", file.display())),
        }
    }
    Ok(problems)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome() -> Outcome {
        Outcome {
            files: vec![Artifact::new("a.csv", "x\n1\n"), Artifact::new("b.json", "{}\n")],
            primary: 1,
        }
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn dir_round_trip_verifies() {
        let dir = tempfile::tempdir().unwrap();
        let dest = Destination::Dir(dir.path().join("run"));
        let config = serde_json::json!({"command": "x", "seed": 1});
        emit(&outcome(), &dest, &config).unwrap();
        assert!(verify(&outcome(), &dest, &config).unwrap().is_empty());

        let mut changed = outcome();
        changed.files[0].bytes = b"x\n2\n".to_vec();
        let problems = verify(&changed, &dest, &config).unwrap();
        assert_eq!(problems.len(), 2);

        let other = serde_json::json!({"command": "x", "seed": 2});
        assert_eq!(verify(&outcome(), &dest, &other).unwrap().len(), 1);
    }

    #[test]
    fn file_destination_writes_primary_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("result.json");
        emit(&outcome(), &Destination::File(out.clone()), &serde_json::json!({})).unwrap();
        assert_eq!(fs::read_to_string(&out).unwrap(), "{}\n");
        let manifest: Manifest =
            serde_json::from_str(&fs::read_to_string(dir.path().join("result.json.manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest.files.len(), 1);
        assert_eq!(manifest.files[0].name, "result.json");
    }
}
