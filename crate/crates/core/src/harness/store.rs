//! On-disk cluster layout.
//!
//! ```text
//! dir/manifest.json
//! dir/rack_<l>/node_<i>.bin     (1-based; α symbols, little-endian)
//! ```
//!
//! Erased nodes are zero-length files and are also listed in the manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::codec::{build_code, ClusterState, CodeSpec, NodeId};
use crate::field::{symbols_from_bytes, symbols_to_bytes, FieldSpec, FiniteField};
use crate::params::CodeParams;

pub const LAYOUT_VERSION: u32 = 1;

/// How the stored message was produced from the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ingest {
    /// 4-byte little-endian length, the file, zero padding.
    Framed,
    /// The file is exactly `B` symbols.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub layout_version: u32,
    pub params: CodeParams,
    pub field: FieldSpec,
    pub seed: u64,
    pub file_size: usize,
    pub alpha: usize,
    pub ingest: Ingest,
    /// `[rack, node]`, 1-based.
    pub erased: Vec<[usize; 2]>,
    /// SHA-256 over every node file, in rack then node order.
    pub digest: String,
}

impl Manifest {
    pub fn erased_nodes(&self) -> Vec<NodeId> {
        self.erased
            .iter()
            .map(|[l, i]| NodeId::new(l - 1, i - 1))
            .collect()
    }
}

pub fn node_path(dir: &Path, node: NodeId) -> PathBuf {
    dir.join(format!("rack_{}", node.rack + 1))
        .join(format!("node_{}.bin", node.node + 1))
}

pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}

fn digest<'a>(files: impl Iterator<Item = (NodeId, &'a [u8])>) -> String {
    let mut h = Sha256::new();
    for (node, bytes) in files {
        h.update(format!("{node}\n").as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io(format!("{}: {e}", path.display()))
}

/// Write `state` under `dir`, replacing any previous cluster there.
pub fn save<F: FiniteField>(
    spec: &CodeSpec<F>,
    state: &ClusterState<F>,
    ingest: Ingest,
    dir: &Path,
) -> Result<Manifest, HarnessError> {
    state.check_shape(spec)?;
    let mut files = Vec::new();
    for node in spec.nodes() {
        let bytes = state.get(node).map(symbols_to_bytes).unwrap_or_default();
        files.push((node, bytes));
    }
    let p = spec.params();
    for l in 0..p.r() {
        let rack = dir.join(format!("rack_{}", l + 1));
        fs::create_dir_all(&rack).map_err(io_err(&rack))?;
    }
    for (node, bytes) in &files {
        let path = node_path(dir, *node);
        fs::write(&path, bytes).map_err(io_err(&path))?;
    }
    let manifest = Manifest {
        layout_version: LAYOUT_VERSION,
        params: *p,
        field: F::spec(),
        seed: spec.seed(),
        file_size: spec.file_size(),
        alpha: spec.alpha(),
        ingest,
        erased: state
            .erased_nodes()
            .into_iter()
            .map(|n| [n.rack + 1, n.node + 1])
            .collect(),
        digest: digest(files.iter().map(|(n, b)| (*n, b.as_slice()))),
    };
    let path = manifest_path(dir);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, HarnessError> {
    let path = manifest_path(dir);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| HarnessError::Manifest(e.to_string()))?;
    // Check the version before the schema so old layouts get a clear error.
    match value.get("layout_version").and_then(|v| v.as_u64()) {
        Some(v) if v == LAYOUT_VERSION as u64 => {}
        Some(v) => {
            return Err(HarnessError::Version {
                found: v,
                expected: LAYOUT_VERSION,
            })
        }
        None => return Err(HarnessError::Manifest("missing layout_version".into())),
    }
    let manifest: Manifest = serde_json::from_value(value).map_err(|e| {
        let msg = e.to_string();
        if msg.contains("invalid parameters") {
            HarnessError::Validation(msg)
        } else {
            HarnessError::Manifest(msg)
        }
    })?;
    manifest.field.validate()?;
    Ok(manifest)
}

/// Read a cluster written by [`save`], rebuilding the code from the
/// manifest's parameters and seed.
pub fn load<F: FiniteField>(
    dir: &Path,
) -> Result<(CodeSpec<F>, ClusterState<F>, Manifest), HarnessError> {
    let manifest = read_manifest(dir)?;
    if manifest.field != F::spec() {
        return Err(HarnessError::FieldMismatch {
            stored: manifest.field,
            requested: F::spec(),
        });
    }
    let spec = build_code::<F>(&manifest.params, manifest.seed)?;
    if spec.file_size() != manifest.file_size || spec.alpha() != manifest.alpha {
        return Err(HarnessError::Integrity(format!(
            "manifest says B = {}, α = {} but the parameters give B = {}, α = {}",
            manifest.file_size,
            manifest.alpha,
            spec.file_size(),
            spec.alpha()
        )));
    }
    let erased = manifest.erased_nodes();
    let p = spec.params();
    let mut files = Vec::new();
    let mut racks = vec![Vec::with_capacity(p.nodes_per_rack()); p.r()];
    for node in spec.nodes() {
        let path = node_path(dir, node);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let flagged = erased.contains(&node);
        let content = match (bytes.is_empty(), flagged) {
            (true, true) => None,
            (false, false) => {
                let syms = symbols_from_bytes::<F>(&bytes)
                    .map_err(|e| HarnessError::Integrity(format!("{}: {e}", path.display())))?;
                if syms.len() != spec.alpha() {
                    return Err(HarnessError::Integrity(format!(
                        "{}: {} symbols, expected {}",
                        path.display(),
                        syms.len(),
                        spec.alpha()
                    )));
                }
                Some(syms)
            }
            (true, false) => {
                return Err(HarnessError::Integrity(format!(
                    "{} is empty but node {node} is not marked erased",
                    path.display()
                )))
            }
            (false, true) => {
                return Err(HarnessError::Integrity(format!(
                    "node {node} is marked erased but {} has content",
                    path.display()
                )))
            }
        };
        racks[node.rack].push(content);
        files.push((node, bytes));
    }
    let actual = digest(files.iter().map(|(n, b)| (*n, b.as_slice())));
    if actual != manifest.digest {
        return Err(HarnessError::Digest {
            expected: manifest.digest.clone(),
            actual,
        });
    }
    Ok((spec, ClusterState::from_racks(racks), manifest))
}
