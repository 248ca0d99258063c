//! Run configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ceoh_core::evaluator::WorkerConfig;
use ceoh_core::evolution::EvolutionConfig;
use ceoh_core::llm::HttpConfig;
use serde::{Deserialize, Serialize};

/// Where model answers come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Backend {
    Replay { fixture: PathBuf },
    Http(HttpConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkerSection {
    /// Command that starts one worker; empty disables the worker.
    pub command: Vec<String>,
    /// Worker processes allowed to run at once.
    pub pool_size: usize,
    pub setup_timeout_seconds: f64,
}

impl Default for WorkerSection {
    fn default() -> Self {
        WorkerSection {
            command: Vec::new(),
            pool_size: 1,
            setup_timeout_seconds: WorkerConfig::default().setup_timeout_seconds,
        }
    }
}

impl WorkerSection {
    pub fn worker_config(&self) -> Option<WorkerConfig> {
        (!self.command.is_empty()).then(|| WorkerConfig {
            command: self.command.clone(),
            setup_timeout_seconds: self.setup_timeout_seconds,
            pool_size: self.pool_size,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    /// Also write `fitness_series.csv` and `token_usage.csv`.
    pub csv: bool,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection { csv: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub evolution: EvolutionConfig,
    pub backend: Backend,
    #[serde(default)]
    pub worker: WorkerSection,
    /// Template directory; the built-in templates when unset.
    #[serde(default)]
    pub templates_dir: Option<PathBuf>,
    #[serde(default)]
    pub report: ReportSection,
}

fn anchor(base: &Path, path: &mut PathBuf) {
    if path.is_relative() {
        *path = base.join(&*path);
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Read `path`; relative paths inside are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config = Self::parse(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        anchor(base, &mut config.evolution.output_dir);
        if let Backend::Replay { fixture } = &mut config.backend {
            anchor(base, fixture);
        }
        if let Some(dir) = &mut config.templates_dir {
            anchor(base, dir);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.evolution.validate().map_err(anyhow::Error::msg)?;
        if self.worker.pool_size == 0 {
            bail!("worker.pool_size must be at least 1");
        }
        if let Backend::Http(http) = &self.backend {
            if http.base_url.is_empty() {
                bail!("backend.base_url must not be empty");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ceoh_core::instance::Problem;
    use ceoh_core::prompt::AugmentationMode;

    #[test]
    fn shipped_examples_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        for name in ["full_upmp.toml", "full_spp.toml", "replay_smoke.toml", "local_server.toml"] {
            let config = RunConfig::load(&dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e:#}"));
            assert!(config.evolution.output_dir.is_absolute() || config.evolution.output_dir.starts_with(&dir));
        }
        let full = RunConfig::load(&dir.join("full_upmp.toml")).unwrap();
        assert_eq!(full.evolution.planned_prompts(), 1640);
        assert_eq!(full.evolution.mode, AugmentationMode::PaCeoh);
    }

    #[test]
    fn minimal_and_rejected_files() {
        let c = RunConfig::parse("[backend]\nkind = \"replay\"\nfixture = \"f.json\"\n").unwrap();
        assert_eq!(c.evolution, EvolutionConfig::default());
        assert_eq!(c.report, ReportSection::default());
        let c = RunConfig::parse(
            "[evolution]\nproblem = \"spp\"\n[backend]\nkind = \"http\"\nbase_url = \"http://x/v1\"\n",
        )
        .unwrap();
        assert_eq!(c.evolution.problem, Problem::Spp);
        assert!(matches!(c.backend, Backend::Http(ref h) if h.base_url == "http://x/v1" && h.max_retries == 3));
        assert!(RunConfig::parse("[backend]\nkind = \"carrier-pigeon\"\n").is_err());
        assert!(
            RunConfig::parse("[evolution]\nsurvivors = 0\n[backend]\nkind = \"replay\"\nfixture = \"f\"\n").is_err()
        );
        assert!(RunConfig::parse("[evolution]\nsurvivor = 3\n[backend]\nkind = \"replay\"\nfixture = \"f\"\n").is_err());
        assert!(RunConfig::parse("[backend]\nkind = \"http\"\nbase_url = \"http://x\"\nbogus = 1\n").is_err());
    }
}
