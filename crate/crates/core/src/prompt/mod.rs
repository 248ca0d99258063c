//! Prompt assembly from template assets and parsing of model answers.
//!
//! A prompt is built from up to six ordered elements: task description,
//! algorithmic context, additional problem description, parent heuristics,
//! strategy-specific output instructions and additional instructions.
//! Which optional blocks appear is decided by the [`AugmentationMode`].

mod builtin_assets;
mod parse;
mod templates;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::Problem;

pub use parse::{parse_response, render_answer, ParseError, ParseErrorKind, ParsedResponse};
pub use templates::{TemplateStore, SUPPORTED_TEMPLATE_VERSION};
pub use validate::{code_hash, normalize_code, validate_code, Violation};

/// Heading that opens the algorithmic-context block.
pub const ALGORITHMIC_CONTEXT_MARKER: &str = "ALGORITHMIC CONTEXT:";
/// Heading that opens the additional problem-context block.
pub const PROBLEM_CONTEXT_MARKER: &str = "ADDITIONAL PROBLEM CONTEXT:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentationMode {
    Eoh,
    PCeoh,
    ACeoh,
    PaCeoh,
}

impl AugmentationMode {
    pub const ALL: [AugmentationMode; 4] =
        [AugmentationMode::Eoh, AugmentationMode::PCeoh, AugmentationMode::ACeoh, AugmentationMode::PaCeoh];

    pub fn includes_problem_context(self) -> bool {
        matches!(self, AugmentationMode::PCeoh | AugmentationMode::PaCeoh)
    }

    pub fn includes_algorithmic_context(self) -> bool {
        matches!(self, AugmentationMode::ACeoh | AugmentationMode::PaCeoh)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AugmentationMode::Eoh => "eoh",
            AugmentationMode::PCeoh => "p_ceoh",
            AugmentationMode::ACeoh => "a_ceoh",
            AugmentationMode::PaCeoh => "pa_ceoh",
        }
    }
}

impl fmt::Display for AugmentationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AugmentationMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AugmentationMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected eoh|p_ceoh|a_ceoh|pa_ceoh)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyKind {
    I1,
    E1,
    E2,
    M1,
    M2,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] =
        [StrategyKind::I1, StrategyKind::E1, StrategyKind::E2, StrategyKind::M1, StrategyKind::M2];
    /// Strategies applied in every generation, in scheduling order.
    pub const EVOLUTION: [StrategyKind; 4] = [StrategyKind::E1, StrategyKind::E2, StrategyKind::M1, StrategyKind::M2];

    /// Number of parents requested when `p` parents are configured for
    /// exploration strategies.
    pub fn parent_count(self, p: usize) -> usize {
        match self {
            StrategyKind::I1 => 0,
            StrategyKind::E1 | StrategyKind::E2 => p,
            StrategyKind::M1 | StrategyKind::M2 => 1,
        }
    }

    /// Whether a prompt with `count` parents is well-formed. Exploration
    /// strategies accept fewer than `p` when the population is small.
    pub fn accepts_parents(self, count: usize) -> bool {
        match self {
            StrategyKind::I1 => count == 0,
            StrategyKind::E1 | StrategyKind::E2 => count >= 1,
            StrategyKind::M1 | StrategyKind::M2 => count == 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::I1 => "I1",
            StrategyKind::E1 => "E1",
            StrategyKind::E2 => "E2",
            StrategyKind::M1 => "M1",
            StrategyKind::M2 => "M2",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A parent heuristic shown to the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parent {
    pub thought: String,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub strategy: StrategyKind,
    pub mode: AugmentationMode,
    pub problem: Problem,
    pub parents: Vec<Parent>,
    pub template_version: String,
    pub rendered_text: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("{strategy} does not take {count} parent(s)")]
    ParentArity { strategy: StrategyKind, count: usize },
    #[error("template version `{0}` is not supported (expected {SUPPORTED_TEMPLATE_VERSION})")]
    UnknownTemplateVersion(String),
    #[error("template asset `{0}` is missing")]
    MissingTemplate(String),
    #[error("template `{template}`: {reason}")]
    TemplateMismatch { template: String, reason: String },
    #[error("reading templates from {path}: {message}")]
    Io { path: String, message: String },
}

const ALGORITHMIC_SLOT: &str = "{{ALGORITHMIC_CONTEXT}}";
const PROBLEM_SLOT: &str = "{{PROBLEM_CONTEXT}}";
const PARENTS_SLOT: &str = "{{PARENTS}}";

fn render_parents(parents: &[Parent]) -> String {
    let mut out = if parents.len() == 1 {
        String::from("I have 1 existing algorithm with its code as follows:\n")
    } else {
        format!("I have {} existing algorithms with their codes as follows:\n", parents.len())
    };
    for (i, p) in parents.iter().enumerate() {
        out.push_str(&format!("No. {} algorithm and the corresponding code are:\n", i + 1));
        out.push_str(p.thought.trim());
        out.push('\n');
        out.push_str(p.code.trim_end());
        out.push('\n');
    }
    out.truncate(out.trim_end().len());
    out
}

fn require_slot(template: &str, name: &str, slot: &str, wanted: bool) -> Result<(), PromptError> {
    let present = template.contains(slot);
    if present == wanted {
        return Ok(());
    }
    let reason = if wanted {
        format!("mode requires the {slot} block but the template lacks it")
    } else {
        format!("{slot} is not allowed here")
    };
    Err(PromptError::TemplateMismatch { template: name.to_string(), reason })
}

/// Render the prompt for one request.
pub fn build_prompt(
    store: &TemplateStore,
    strategy: StrategyKind,
    mode: AugmentationMode,
    problem: Problem,
    parents: &[Parent],
) -> Result<PromptSpec, PromptError> {
    if store.version() != SUPPORTED_TEMPLATE_VERSION {
        return Err(PromptError::UnknownTemplateVersion(store.version().to_string()));
    }
    if !strategy.accepts_parents(parents.len()) {
        return Err(PromptError::ParentArity { strategy, count: parents.len() });
    }
    let name = TemplateStore::strategy_path(problem, mode, strategy);
    let template = store.get(&name)?;
    require_slot(template, &name, ALGORITHMIC_SLOT, mode.includes_algorithmic_context())?;
    require_slot(template, &name, PROBLEM_SLOT, mode.includes_problem_context())?;
    require_slot(template, &name, PARENTS_SLOT, strategy != StrategyKind::I1)?;

    let mut text = template.to_string();
    if mode.includes_algorithmic_context() {
        let block = store.get(&TemplateStore::algorithmic_context_path(problem))?;
        text = text.replace(ALGORITHMIC_SLOT, block.trim_end());
    }
    if mode.includes_problem_context() {
        let block = store.get(&TemplateStore::problem_context_path(problem))?;
        text = text.replace(PROBLEM_SLOT, block.trim_end());
    }
    if strategy != StrategyKind::I1 {
        text = text.replace(PARENTS_SLOT, &render_parents(parents));
    }
    Ok(PromptSpec {
        strategy,
        mode,
        problem,
        parents: parents.to_vec(),
        template_version: store.version().to_string(),
        rendered_text: text,
    })
}
