use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::record::{list_snapshots, read_snapshot, SnapshotError};
use super::runlog::{read_events, run_log_path, usage_samples, RunEvent};
use super::TOOL_VERSION;
use crate::llm::{usage_report, UsageRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessPoint {
    pub generation: u32,
    pub best_fitness: f64,
}

/// Summary regenerated from a run directory's snapshots and log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub config_digest: String,
    pub prompts_issued: u64,
    pub best_fitness: Vec<FitnessPoint>,
    pub token_usage: Vec<UsageRow>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("{path}: {message}")]
    Log { path: PathBuf, message: String },
    #[error("snapshots in {0} come from different configurations")]
    MixedDigests(PathBuf),
    #[error("generation {0} has an empty population")]
    EmptyGeneration(u32),
}

pub fn report_path(output_dir: &Path) -> PathBuf {
    output_dir.join("report.json")
}

pub fn build_report(output_dir: &Path) -> Result<RunReport, ReportError> {
    let snapshots =
        list_snapshots(output_dir)?.iter().map(|p| read_snapshot(p, None)).collect::<Result<Vec<_>, _>>()?;
    let digest = snapshots[0].config_digest.clone();
    if snapshots.iter().any(|s| s.config_digest != digest) {
        return Err(ReportError::MixedDigests(output_dir.into()));
    }
    let mut best_fitness = Vec::new();
    for s in &snapshots {
        let best = s.members.first().ok_or(ReportError::EmptyGeneration(s.generation))?;
        best_fitness.push(FitnessPoint { generation: s.generation, best_fitness: best.fitness });
    }
    let log = run_log_path(output_dir);
    let events = read_events(&log).map_err(|e| ReportError::Log { path: log.clone(), message: e.to_string() })?;
    let prompts_issued = events.iter().filter(|e| matches!(e, RunEvent::PromptIssued { .. })).count() as u64;
    Ok(RunReport {
        tool_version: TOOL_VERSION.to_string(),
        config_digest: digest,
        prompts_issued,
        best_fitness,
        token_usage: usage_report(&usage_samples(&events)),
    })
}

pub fn write_report(output_dir: &Path, report: &RunReport) -> std::io::Result<PathBuf> {
    let path = report_path(output_dir);
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run_dir_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(build_report(dir.path()), Err(ReportError::Snapshot(SnapshotError::Io { .. }))));
        std::fs::create_dir_all(dir.path().join("snapshots")).unwrap();
        assert!(matches!(build_report(dir.path()), Err(ReportError::Snapshot(SnapshotError::Empty(_)))));
    }
}
