use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::fitness::InstanceResult;
use crate::prompt::{AugmentationMode, StrategyKind};

/// A heuristic with its provenance and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicRecord {
    pub id: String,
    pub thought: String,
    pub code: String,
    /// Infinite for programs that could not be evaluated; written as
    /// `null`.
    #[serde(serialize_with = "fitness_out", deserialize_with = "fitness_in")]
    pub fitness: f64,
    pub per_instance: Vec<InstanceResult>,
    pub parent_ids: Vec<String>,
    pub strategy: StrategyKind,
    pub generation: u32,
    pub created_with_mode: AugmentationMode,
}

fn fitness_out<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn fitness_in<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub generation: u32,
    /// Ascending by fitness.
    pub members: Vec<HeuristicRecord>,
}

impl Population {
    pub fn best_fitness(&self) -> Option<f64> {
        self.members.first().map(|m| m.fitness)
    }

    pub fn ids(&self) -> Vec<String> {
        self.members.iter().map(|m| m.id.clone()).collect()
    }
}

/// Stable ascending sort; equal fitness keeps the earlier record first.
pub fn sort_by_fitness(members: &mut [HeuristicRecord]) {
    members.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
}

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

/// Where the run-level random stream stands: every prompt draws from the
/// stream `(seed, prompt index)`, so the issued count is the position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub prompts_issued: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format_version: u32,
    pub tool_version: String,
    pub generation: u32,
    pub config_digest: String,
    pub rng_state: RngState,
    pub members: Vec<HeuristicRecord>,
}

impl Snapshot {
    pub fn population(&self) -> Population {
        Population { generation: self.generation, members: self.members.clone() }
    }
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: not a readable snapshot: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("{path}: snapshot format {found} is not supported (expected {SNAPSHOT_FORMAT_VERSION})")]
    Format { path: PathBuf, found: u32 },
    #[error("{path}: snapshot belongs to config {found}, current config is {expected}")]
    Digest { path: PathBuf, found: String, expected: String },
    #[error("{0}: no snapshots found")]
    Empty(PathBuf),
}

pub fn snapshot_dir(output_dir: &Path) -> PathBuf {
    output_dir.join("snapshots")
}

pub fn snapshot_path(output_dir: &Path, generation: u32) -> PathBuf {
    snapshot_dir(output_dir).join(format!("gen_{generation:03}.json"))
}

pub fn render_snapshot(snapshot: &Snapshot) -> String {
    let mut text = serde_json::to_string_pretty(snapshot).expect("snapshots serialize");
    text.push('\n');
    text
}

pub fn write_snapshot(output_dir: &Path, snapshot: &Snapshot) -> Result<PathBuf, SnapshotError> {
    let dir = snapshot_dir(output_dir);
    std::fs::create_dir_all(&dir).map_err(|source| SnapshotError::Io { path: dir.clone(), source })?;
    let path = snapshot_path(output_dir, snapshot.generation);
    std::fs::write(&path, render_snapshot(snapshot))
        .map_err(|source| SnapshotError::Io { path: path.clone(), source })?;
    Ok(path)
}

/// Read a snapshot, refusing other formats and, when `expected_digest` is
/// given, snapshots of a different configuration.
pub fn read_snapshot(path: &Path, expected_digest: Option<&str>) -> Result<Snapshot, SnapshotError> {
    let text = std::fs::read_to_string(path).map_err(|source| SnapshotError::Io { path: path.into(), source })?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| SnapshotError::Corrupt { path: path.into(), message: e.to_string() })?;
    let found = value.get("format_version").and_then(serde_json::Value::as_u64).unwrap_or(0) as u32;
    if found != SNAPSHOT_FORMAT_VERSION {
        return Err(SnapshotError::Format { path: path.into(), found });
    }
    let snapshot: Snapshot = serde_json::from_value(value)
        .map_err(|e| SnapshotError::Corrupt { path: path.into(), message: e.to_string() })?;
    if let Some(expected) = expected_digest {
        if snapshot.config_digest != expected {
            return Err(SnapshotError::Digest {
                path: path.into(),
                found: snapshot.config_digest,
                expected: expected.to_string(),
            });
        }
    }
    Ok(snapshot)
}

/// Snapshot files of a run, oldest generation first.
pub fn list_snapshots(output_dir: &Path) -> Result<Vec<PathBuf>, SnapshotError> {
    let dir = snapshot_dir(output_dir);
    let entries = std::fs::read_dir(&dir).map_err(|source| SnapshotError::Io { path: dir.clone(), source })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| {
            p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("gen_") && n.ends_with(".json"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(SnapshotError::Empty(dir));
    }
    Ok(paths)
}
