use std::collections::BTreeMap;
use std::path::Path;

use super::builtin_assets::BUILTIN;
use super::{AugmentationMode, PromptError, StrategyKind};
use crate::instance::Problem;

pub const SUPPORTED_TEMPLATE_VERSION: &str = "1";

/// Template assets keyed by their path relative to the template root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateStore {
    version: String,
    files: BTreeMap<String, String>,
}

impl TemplateStore {
    /// The templates compiled into the library.
    pub fn builtin() -> Self {
        let files: BTreeMap<String, String> =
            BUILTIN.iter().map(|(name, text)| (name.to_string(), text.to_string())).collect();
        let version = files.get("VERSION").map(|v| v.trim().to_string()).unwrap_or_default();
        TemplateStore { version, files }
    }

    /// Load `VERSION`, the shared blocks and every
    /// `<problem>/<mode>/<strategy>.txt` below `root`.
    pub fn from_dir(root: &Path) -> Result<Self, PromptError> {
        let read = |rel: &str| {
            let path = root.join(rel);
            std::fs::read_to_string(&path)
                .map_err(|e| PromptError::Io { path: path.display().to_string(), message: e.to_string() })
        };
        let mut files = BTreeMap::new();
        let version = read("VERSION")?;
        files.insert("VERSION".to_string(), version.clone());
        for problem in Problem::ALL {
            for name in [Self::algorithmic_context_path(problem), Self::problem_context_path(problem)] {
                let text = read(&name)?;
                files.insert(name, text);
            }
            for mode in AugmentationMode::ALL {
                for strategy in StrategyKind::ALL {
                    let name = Self::strategy_path(problem, mode, strategy);
                    let text = read(&name)?;
                    files.insert(name, text);
                }
            }
        }
        Ok(TemplateStore { version: version.trim().to_string(), files })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn with_version(mut self, version: &str) -> Self {
        self.version = version.to_string();
        self
    }

    pub fn insert(&mut self, name: &str, text: &str) {
        self.files.insert(name.to_string(), text.to_string());
    }

    pub fn get(&self, name: &str) -> Result<&str, PromptError> {
        self.files.get(name).map(String::as_str).ok_or_else(|| PromptError::MissingTemplate(name.to_string()))
    }

    /// Write every asset below `root`, creating directories as needed.
    pub fn write_to(&self, root: &Path) -> std::io::Result<()> {
        for (name, text) in &self.files {
            let path = root.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)?;
        }
        Ok(())
    }

    pub fn strategy_path(problem: Problem, mode: AugmentationMode, strategy: StrategyKind) -> String {
        format!("{problem}/{mode}/{strategy}.txt")
    }

    pub fn algorithmic_context_path(problem: Problem) -> String {
        format!("algorithmic_context_{problem}.txt")
    }

    pub fn problem_context_path(problem: Problem) -> String {
        format!("problem_context_{problem}.txt")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_has_every_asset() {
        let store = TemplateStore::builtin();
        assert_eq!(store.version(), SUPPORTED_TEMPLATE_VERSION);
        assert_eq!(store.files.len(), 1 + 2 * 2 + 2 * 4 * 5);
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = TemplateStore::builtin();
        store.write_to(dir.path()).unwrap();
        assert_eq!(TemplateStore::from_dir(dir.path()).unwrap(), store);
        std::fs::remove_file(dir.path().join("upmp/eoh/M2.txt")).unwrap();
        assert!(matches!(TemplateStore::from_dir(dir.path()), Err(PromptError::Io { .. })));
    }
}
