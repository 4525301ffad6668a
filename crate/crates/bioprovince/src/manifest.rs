//! Machine-readable run manifests: every CLI run records its inputs (with
//! content hashes), parameters, and output hashes, so a run can be verified
//! and reproduced byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// A named file plus the SHA-256 of its contents.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// The reproducibility record of one CLI invocation.
///
/// Maps use sorted keys and no timestamps are recorded, so two identical
/// runs serialize to identical bytes.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq, Default)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: BTreeMap<String, FileDigest>,
    pub params: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, FileDigest>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            tool: "bioprovince".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn add_input(&mut self, name: &str, path: &Path) -> Result<()> {
        self.inputs.insert(name.into(), digest_file(path)?);
        Ok(())
    }

    pub fn add_param(&mut self, name: &str, value: impl ToString) {
        self.params.insert(name.into(), value.to_string());
    }

    /// Outputs are recorded under their file name (not the out-dir path),
    /// so runs into different directories produce identical manifests.
    pub fn add_output(&mut self, name: &str, path: &Path) -> Result<()> {
        let mut digest = digest_file(path)?;
        digest.path = path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or(digest.path);
        self.outputs.insert(name.into(), digest);
        Ok(())
    }

    /// Serialize to pretty JSON (sorted keys, trailing newline).
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }
}

fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = fs::read(path)?;
    let hash = Sha256::digest(&bytes);
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex::encode(hash),
    })
}
