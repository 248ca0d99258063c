use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::instance::{Instance, InstanceError, InstanceParams, Problem};
use crate::prompt::AugmentationMode;
use crate::search::{DuplicatePolicy, SearchLimits};

/// Model and sampling settings sent with every request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSettings {
    pub model: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl Default for LlmSettings {
    fn default() -> Self {
        LlmSettings { model: "qwen2.5-coder:32b".into(), temperature: 1.0, max_output_tokens: 2048 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParentSelection {
    /// Uniform without replacement.
    #[default]
    Uniform,
    /// Without replacement, member at rank `i` weighted `1 / (i + 1)`.
    Rank,
}

/// Everything that determines the outcome of an evolution run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub problem: Problem,
    pub mode: AugmentationMode,
    pub generations: u32,
    /// Population size kept after each selection.
    pub survivors: usize,
    /// Prompts per strategy per generation.
    pub repetitions: usize,
    /// Parents shown to the exploration strategies.
    pub parents: usize,
    /// Initial prompts; twice `survivors` when unset.
    pub init_calls: Option<usize>,
    /// Per-problem defaults when unset.
    pub limits: Option<SearchLimits>,
    pub policy: DuplicatePolicy,
    pub training_seeds: Vec<u64>,
    /// Training instance generator; per-problem defaults when unset.
    pub instances: Option<InstanceParams>,
    pub llm: LlmSettings,
    pub rng_seed: u64,
    pub selection: ParentSelection,
    /// Prompts kept in flight at once.
    pub concurrency: usize,
    /// Store measured search and request times. Off by default so that
    /// identical runs write identical files.
    pub record_timings: bool,
    pub output_dir: PathBuf,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            problem: Problem::Upmp,
            mode: AugmentationMode::Eoh,
            generations: 20,
            survivors: 20,
            repetitions: 20,
            parents: 5,
            init_calls: None,
            limits: None,
            policy: DuplicatePolicy::Paper,
            training_seeds: (0..10).collect(),
            instances: None,
            llm: LlmSettings::default(),
            rng_seed: 0,
            selection: ParentSelection::Uniform,
            concurrency: 1,
            record_timings: false,
            output_dir: PathBuf::from("runs/default"),
        }
    }
}

impl EvolutionConfig {
    pub fn init_calls(&self) -> usize {
        self.init_calls.unwrap_or(2 * self.survivors)
    }

    pub fn limits(&self) -> SearchLimits {
        self.limits.unwrap_or(match self.problem {
            Problem::Spp => SearchLimits::SPP,
            Problem::Upmp => SearchLimits::UPMP,
        })
    }

    pub fn instance_params(&self) -> InstanceParams {
        self.instances.clone().unwrap_or_else(|| InstanceParams::default_for(self.problem))
    }

    /// Total prompts of a complete run.
    pub fn planned_prompts(&self) -> u64 {
        self.init_calls() as u64 + u64::from(self.generations) * 4 * self.repetitions as u64
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.survivors == 0 {
            return Err("survivors must be at least 1".into());
        }
        if self.repetitions == 0 {
            return Err("repetitions must be at least 1".into());
        }
        if self.parents == 0 {
            return Err("parents must be at least 1".into());
        }
        if self.init_calls() == 0 {
            return Err("init_calls must be at least 1".into());
        }
        if self.concurrency == 0 {
            return Err("concurrency must be at least 1".into());
        }
        if self.training_seeds.is_empty() {
            return Err("training_seeds must not be empty".into());
        }
        if !(self.llm.temperature >= 0.0) {
            return Err(format!("temperature must be non-negative, got {}", self.llm.temperature));
        }
        if self.instance_params().problem() != self.problem {
            return Err(format!(
                "instance parameters are for {}, run is for {}",
                self.instance_params().problem(),
                self.problem
            ));
        }
        self.limits().validate()
    }

    /// The same run with every default filled in and `output_dir`
    /// cleared; the basis of [`EvolutionConfig::digest`].
    pub fn resolved(&self) -> EvolutionConfig {
        EvolutionConfig {
            init_calls: Some(self.init_calls()),
            limits: Some(self.limits()),
            instances: Some(self.instance_params()),
            output_dir: PathBuf::new(),
            ..self.clone()
        }
    }

    /// Hex SHA-256 of the resolved configuration. Changing the output
    /// location or spelling out a default keeps the digest.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(&self.resolved()).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn training_instances(&self) -> Result<Vec<Instance>, InstanceError> {
        let params = self.instance_params();
        self.training_seeds.iter().map(|&s| params.generate(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_values() {
        let c = EvolutionConfig::default();
        assert_eq!(c.init_calls(), 40);
        assert_eq!(c.planned_prompts(), 40 + 1600);
        assert_eq!(c.limits(), SearchLimits::UPMP);
        assert_eq!(c.training_seeds, (0..10).collect::<Vec<_>>());
        assert!(c.validate().is_ok());
        let spp = EvolutionConfig { problem: Problem::Spp, ..EvolutionConfig::default() };
        assert_eq!(spp.limits().max_moves_penalty, 200);
        assert_eq!(spp.instance_params(), InstanceParams::spp_default());
    }

    #[test]
    fn digest_ignores_output_dir_and_explicit_defaults() {
        let a = EvolutionConfig::default();
        let b = EvolutionConfig {
            output_dir: "elsewhere".into(),
            init_calls: Some(40),
            limits: Some(SearchLimits::UPMP),
            ..EvolutionConfig::default()
        };
        assert_eq!(a.digest(), b.digest());
        let c = EvolutionConfig { rng_seed: 1, ..EvolutionConfig::default() };
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn validation_errors() {
        let bad = EvolutionConfig { survivors: 0, ..EvolutionConfig::default() };
        assert!(bad.validate().is_err());
        let bad = EvolutionConfig { instances: Some(InstanceParams::spp_default()), ..EvolutionConfig::default() };
        assert!(bad.validate().unwrap_err().contains("instance parameters"));
        let bad = EvolutionConfig { training_seeds: vec![], ..EvolutionConfig::default() };
        assert!(bad.validate().is_err());
    }
}
