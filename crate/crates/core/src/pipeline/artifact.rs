//! Stage directories, manifests, content hashes and the workdir lock.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn hash_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Short key derived from a list of parts.
pub fn derive_key(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex::encode(h.finalize())[..16].to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub key: String,
    /// Hash of the stage's own settings.
    pub config_hash: String,
    pub wall_time_secs: f64,
    pub rows: u64,
    pub cols: u64,
    pub nnz: u64,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    #[serde(default)]
    pub extra: BTreeMap<String, String>,
}

impl Manifest {
    pub fn extra_u64(&self, name: &str) -> Option<u64> {
        self.extra.get(name).and_then(|v| v.parse().ok())
    }
}

pub const MANIFEST: &str = "manifest.toml";

pub fn stage_dir(workdir: &Path, stage: &str, key: &str) -> PathBuf {
    workdir.join(stage).join(key)
}

/// Reads a stage manifest and checks every recorded output against its hash.
pub fn verify(workdir: &Path, stage: &str, key: &str) -> Result<Manifest> {
    let dir = stage_dir(workdir, stage, key);
    let stale = |reason: String| Error::StaleArtifact {
        stage: stage.to_string(),
        reason,
    };
    let text = fs::read_to_string(dir.join(MANIFEST))
        .map_err(|_| stale(format!("no artifact at {}", dir.display())))?;
    let m: Manifest = toml::from_str(&text).map_err(|e| stale(format!("unreadable manifest: {e}")))?;
    if m.stage != stage || m.key != key {
        return Err(stale("manifest belongs to another stage".into()));
    }
    for out in &m.outputs {
        let p = dir.join(&out.path);
        let h = hash_file(&p).map_err(|_| stale(format!("{} is missing", out.path)))?;
        if h != out.sha256 {
            return Err(stale(format!("{} does not match its recorded hash", out.path)));
        }
    }
    Ok(m)
}

/// A stage directory under construction. Files go to a temporary sibling
/// that replaces the final directory on commit.
pub struct StageWriter {
    tmp: PathBuf,
    dir: PathBuf,
    outputs: Vec<String>,
}

impl StageWriter {
    pub fn create(workdir: &Path, stage: &str, key: &str) -> Result<Self> {
        let parent = workdir.join(stage);
        fs::create_dir_all(&parent)?;
        let tmp = parent.join(format!(".{key}.tmp-{}", std::process::id()));
        if tmp.exists() {
            fs::remove_dir_all(&tmp)?;
        }
        fs::create_dir(&tmp)?;
        Ok(StageWriter {
            tmp,
            dir: parent.join(key),
            outputs: Vec::new(),
        })
    }

    /// Path for a new output file; it is hashed on commit.
    pub fn output(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.tmp.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.output(name);
        fs::write(p, bytes)?;
        Ok(())
    }

    pub fn commit(self, mut manifest: Manifest, elapsed: Duration) -> Result<Manifest> {
        manifest.wall_time_secs = elapsed.as_secs_f64();
        manifest.outputs = self
            .outputs
            .iter()
            .map(|name| {
                Ok(FileHash {
                    path: name.clone(),
                    sha256: hash_file(&self.tmp.join(name))?,
                })
            })
            .collect::<Result<_>>()?;
        let text = toml::to_string(&manifest).map_err(|e| Error::config(e.to_string()))?;
        fs::write(self.tmp.join(MANIFEST), text)?;
        if self.dir.exists() {
            fs::remove_dir_all(&self.dir)?;
        }
        fs::rename(&self.tmp, &self.dir)?;
        Ok(manifest)
    }
}

impl Drop for StageWriter {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.tmp);
    }
}

/// Exclusive lock on a workdir, released on drop.
#[derive(Debug)]
pub struct WorkdirLock {
    path: PathBuf,
}

impl WorkdirLock {
    pub fn acquire(workdir: &Path) -> Result<Self> {
        fs::create_dir_all(workdir)?;
        let path = workdir.join(".lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                use std::io::Write;
                let _ = writeln!(f, "{}", std::process::id());
                Ok(WorkdirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(path)),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for WorkdirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(stage: &str, key: &str) -> Manifest {
        Manifest {
            stage: stage.into(),
            key: key.into(),
            config_hash: "c".into(),
            wall_time_secs: 0.0,
            rows: 1,
            cols: 1,
            nnz: 1,
            inputs: vec![],
            outputs: vec![],
            extra: BTreeMap::new(),
        }
    }

    #[test]
    fn commit_then_verify_then_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = StageWriter::create(dir.path(), "ppmi", "k1").unwrap();
        w.write("a.txt", b"hello").unwrap();
        w.commit(manifest("ppmi", "k1"), Duration::ZERO).unwrap();
        let m = verify(dir.path(), "ppmi", "k1").unwrap();
        assert_eq!(m.outputs[0].sha256, hash_bytes(b"hello"));

        fs::write(stage_dir(dir.path(), "ppmi", "k1").join("a.txt"), b"hellO").unwrap();
        let err = verify(dir.path(), "ppmi", "k1").unwrap_err();
        assert!(err.to_string().contains("rerun `ppmi`"), "{err}");
        assert!(matches!(verify(dir.path(), "cooc", "k1"), Err(Error::StaleArtifact { .. })));
    }

    #[test]
    fn lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        let l = WorkdirLock::acquire(dir.path()).unwrap();
        assert!(matches!(WorkdirLock::acquire(dir.path()), Err(Error::Locked(_))));
        drop(l);
        WorkdirLock::acquire(dir.path()).unwrap();
    }

    #[test]
    fn keys_separate_parts() {
        assert_ne!(derive_key(&["ab", "c"]), derive_key(&["a", "bc"]));
        assert_eq!(derive_key(&["x"]).len(), 16);
    }
}
