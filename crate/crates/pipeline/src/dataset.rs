//! Dataset layout on disk: `dataset.jsonl` (one record per line, grouped by
//! task), `failures.jsonl`, and `manifest.json` carrying counts, digests and
//! the exact run configuration. Digests make tampering and partial writes
//! detectable; files are written via a temp-and-rename so readers never see
//! a half-written dataset.

use std::fs;
use std::path::Path;

use benchtop_core::model::{SftRecord, TaskId};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::collect::{RunConfig, TaskCollection, TaskReport};
use crate::recipe::TrainingRecipe;

pub const DATASET_FORMAT_VERSION: u32 = 1;
pub const DATASET_FILE: &str = "dataset.jsonl";
pub const FAILURES_FILE: &str = "failures.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskManifest {
    #[serde(flatten)]
    pub report: TaskReport,
    /// Name of the goal predicate that filtered this block.
    pub verifier: String,
    /// SHA-256 of this task's contiguous byte range in the dataset file.
    pub block_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub master_seed: u64,
    pub total_records: usize,
    /// SHA-256 of the whole dataset file.
    pub dataset_digest: String,
    pub run: RunConfig,
    pub recipe: TrainingRecipe,
    pub tasks: Vec<TaskManifest>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Serde(#[from] serde_json::Error),
    #[error("task {0} appears in more than one collection")]
    DuplicateTask(TaskId),
    #[error("unsupported dataset format version {0}")]
    FormatVersion(u32),
    #[error("{scope} digest mismatch: manifest has {expected}, file hashes to {actual}")]
    IntegrityMismatch {
        scope: String,
        expected: String,
        actual: String,
    },
    #[error("manifest counts {expected} records, file has {actual}")]
    RecordCount { expected: usize, actual: usize },
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(64);
    for b in Sha256::digest(bytes) {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Write the dataset, failure log and manifest into `dir`, creating it if
/// needed. Collections land in the given order; record lines within a task
/// keep their collection order.
pub fn write_dataset(
    dir: &Path,
    collections: &[TaskCollection],
    run: &RunConfig,
    recipe: &TrainingRecipe,
) -> Result<Manifest, DatasetError> {
    let mut seen = std::collections::HashSet::new();
    for collection in collections {
        if !seen.insert(collection.report.task_id) {
            return Err(DatasetError::DuplicateTask(collection.report.task_id));
        }
    }
    fs::create_dir_all(dir)?;

    let mut dataset_bytes = Vec::new();
    let mut tasks = Vec::with_capacity(collections.len());
    let mut total_records = 0;
    for collection in collections {
        let start = dataset_bytes.len();
        for record in &collection.records {
            serde_json::to_writer(&mut dataset_bytes, record)?;
            dataset_bytes.push(b'\n');
        }
        total_records += collection.records.len();
        tasks.push(TaskManifest {
            report: collection.report.clone(),
            verifier: benchtop_core::tasks::verifier_name(collection.report.task_id).to_string(),
            block_digest: hex_digest(&dataset_bytes[start..]),
        });
    }

    let mut failure_bytes = Vec::new();
    for collection in collections {
        for failure in &collection.failures {
            serde_json::to_writer(&mut failure_bytes, failure)?;
            failure_bytes.push(b'\n');
        }
    }

    let manifest = Manifest {
        format_version: DATASET_FORMAT_VERSION,
        master_seed: run.master_seed,
        total_records,
        dataset_digest: hex_digest(&dataset_bytes),
        run: run.clone(),
        recipe: recipe.clone(),
        tasks,
    };

    write_atomic(&dir.join(DATASET_FILE), &dataset_bytes)?;
    write_atomic(&dir.join(FAILURES_FILE), &failure_bytes)?;
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest)?;
    manifest_bytes.push(b'\n');
    write_atomic(&dir.join(MANIFEST_FILE), &manifest_bytes)?;
    Ok(manifest)
}

/// Read a dataset back and verify every digest and count in the manifest.
pub fn load_dataset(dir: &Path) -> Result<(Manifest, Vec<SftRecord>), DatasetError> {
    let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE))?)?;
    if manifest.format_version != DATASET_FORMAT_VERSION {
        return Err(DatasetError::FormatVersion(manifest.format_version));
    }
    let bytes = fs::read(dir.join(DATASET_FILE))?;
    let actual = hex_digest(&bytes);
    if actual != manifest.dataset_digest {
        return Err(DatasetError::IntegrityMismatch {
            scope: "dataset".into(),
            expected: manifest.dataset_digest.clone(),
            actual,
        });
    }
    let mut records = Vec::with_capacity(manifest.total_records);
    for line in bytes.split(|&b| b == b'\n').filter(|l| !l.is_empty()) {
        records.push(serde_json::from_slice::<SftRecord>(line)?);
    }
    if records.len() != manifest.total_records {
        return Err(DatasetError::RecordCount {
            expected: manifest.total_records,
            actual: records.len(),
        });
    }
    // re-derive each task's byte range from the record stream and check it
    let mut offset = 0usize;
    let mut cursor = 0usize;
    for task in &manifest.tasks {
        let mut end = offset;
        for _ in 0..task.report.accepted {
            end += serde_json::to_vec(&records[cursor])?.len() + 1;
            cursor += 1;
        }
        let actual = hex_digest(&bytes[offset..end]);
        if actual != task.block_digest {
            return Err(DatasetError::IntegrityMismatch {
                scope: format!("task {}", task.report.task_id),
                expected: task.block_digest.clone(),
                actual,
            });
        }
        offset = end;
    }
    Ok((manifest, records))
}
