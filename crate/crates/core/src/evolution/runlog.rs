use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::instance::Problem;
use crate::llm::UsageSample;
use crate::prompt::{AugmentationMode, StrategyKind};

/// One line of the append-only run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum RunEvent {
    RunStarted {
        tool_version: String,
        config_digest: String,
        problem: Problem,
        mode: AugmentationMode,
        prompts_planned: u64,
        resumed_at_generation: Option<u32>,
    },
    PromptIssued {
        prompt_index: u64,
        generation: u32,
        strategy: StrategyKind,
        parent_ids: Vec<String>,
        prompt_sha256: String,
        prompt_chars: usize,
    },
    ResponseReceived {
        prompt_index: u64,
        problem: Problem,
        mode: AugmentationMode,
        input_tokens: u64,
        output_tokens: u64,
        tokens_estimated: bool,
        latency_seconds: f64,
    },
    RequestFailed {
        prompt_index: u64,
        message: String,
    },
    Validation {
        prompt_index: u64,
        accepted: bool,
        reasons: Vec<String>,
    },
    Evaluation {
        prompt_index: u64,
        id: String,
        fitness: Option<f64>,
        solved: usize,
        instances: usize,
        error: Option<String>,
    },
    Selection {
        generation: u32,
        member_ids: Vec<String>,
        best_fitness: Option<f64>,
        shortfall: bool,
    },
    RunFinished {
        prompts_issued: u64,
        best_fitness: Option<f64>,
    },
}

pub fn run_log_path(output_dir: &Path) -> PathBuf {
    output_dir.join("run_log.jsonl")
}

/// Appends events as JSON lines; safe to share across threads.
pub struct RunLog {
    file: Mutex<File>,
}

impl RunLog {
    pub fn open(path: &Path) -> std::io::Result<Self> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(RunLog { file: Mutex::new(file) })
    }

    pub fn record(&self, event: &RunEvent) -> std::io::Result<()> {
        let mut line = serde_json::to_string(event).expect("events serialize");
        line.push('\n');
        self.file.lock().expect("run log lock").write_all(line.as_bytes())
    }
}

pub fn read_events(path: &Path) -> std::io::Result<Vec<RunEvent>> {
    let reader = BufReader::new(File::open(path)?);
    let mut events = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), n + 1))
        })?;
        events.push(event);
    }
    Ok(events)
}

/// Token counts of every answered prompt in the log.
pub fn usage_samples(events: &[RunEvent]) -> Vec<UsageSample> {
    events
        .iter()
        .filter_map(|e| match e {
            RunEvent::ResponseReceived { problem, mode, input_tokens, output_tokens, .. } => Some(UsageSample {
                problem: *problem,
                mode: *mode,
                input_tokens: *input_tokens,
                output_tokens: *output_tokens,
            }),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = run_log_path(dir.path());
        let events = vec![
            RunEvent::RequestFailed { prompt_index: 0, message: "x".into() },
            RunEvent::ResponseReceived {
                prompt_index: 1,
                problem: Problem::Spp,
                mode: AugmentationMode::ACeoh,
                input_tokens: 100,
                output_tokens: 20,
                tokens_estimated: false,
                latency_seconds: 0.0,
            },
        ];
        {
            let log = RunLog::open(&path).unwrap();
            log.record(&events[0]).unwrap();
        }
        RunLog::open(&path).unwrap().record(&events[1]).unwrap();
        assert_eq!(read_events(&path).unwrap(), events);
        let samples = usage_samples(&events);
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].input_tokens, 100);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("{\"event\":\"request_failed\""));
        std::fs::write(&path, "garbage\n").unwrap();
        assert!(read_events(&path).is_err());
    }
}
