//! Running heuristic programs on instances.
//!
//! [`NativeEvaluator`] recognises the built-in reference programs by their
//! normalized code hash and runs the in-process search. Anything else goes
//! to an optional fallback, normally a [`WorkerEvaluator`] that hosts the
//! program in a separate interpreter process.

mod builtin;
mod worker;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitness::InstanceResult;
use crate::instance::{Instance, Problem};
use crate::prompt::code_hash;
use crate::search::{astar, DuplicatePolicy, ScoreError, SearchError, SearchLimits};
use crate::spp::SlidingPuzzle;
use crate::upmp::Premarshalling;

pub use builtin::{unsorted_lanes, BuiltinScorer, ScorerKind, MAX_CATALOG_WEIGHT};
pub use worker::{WorkerConfig, WorkerEvaluator, PROTOCOL_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EvalErrorCode {
    Syntax,
    ForbiddenConstruct,
    BadSignature,
    Runtime,
    NonNumericScore,
    Timeout,
    Protocol,
    /// No configured engine can run the program.
    Unsupported,
}

impl EvalErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalErrorCode::Syntax => "SYNTAX",
            EvalErrorCode::ForbiddenConstruct => "FORBIDDEN_CONSTRUCT",
            EvalErrorCode::BadSignature => "BAD_SIGNATURE",
            EvalErrorCode::Runtime => "RUNTIME",
            EvalErrorCode::NonNumericScore => "NON_NUMERIC_SCORE",
            EvalErrorCode::Timeout => "TIMEOUT",
            EvalErrorCode::Protocol => "PROTOCOL",
            EvalErrorCode::Unsupported => "UNSUPPORTED",
        }
    }
}

impl fmt::Display for EvalErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A program that could not be evaluated; its record is invalid.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[error("{code}: {message}")]
pub struct EvalFailure {
    pub code: EvalErrorCode,
    pub message: String,
}

impl EvalFailure {
    pub fn new(code: EvalErrorCode, message: impl Into<String>) -> Self {
        EvalFailure { code, message: message.into() }
    }
}

impl From<SearchError> for EvalFailure {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Score(ScoreError::NonNumeric(m)) => EvalFailure::new(EvalErrorCode::NonNumericScore, m),
            other => EvalFailure::new(EvalErrorCode::Runtime, other.to_string()),
        }
    }
}

pub trait Evaluator: Send + Sync {
    /// One result per instance, in order, or the reason the program is
    /// unusable.
    fn evaluate(
        &self,
        code: &str,
        instances: &[Instance],
        limits: &SearchLimits,
        policy: DuplicatePolicy,
    ) -> Result<Vec<InstanceResult>, EvalFailure>;
}

/// Solve one instance with a built-in scorer.
pub fn solve_builtin(
    scorer: &BuiltinScorer,
    instance: &Instance,
    limits: &SearchLimits,
    policy: DuplicatePolicy,
) -> Result<InstanceResult, EvalFailure> {
    if !scorer.supports(instance.problem()) {
        return Err(EvalFailure::new(
            EvalErrorCode::Unsupported,
            format!("{scorer} does not apply to {}", instance.problem()),
        ));
    }
    let (solved, moves, evaluated_nodes, elapsed_seconds) = match instance {
        Instance::Spp { state, .. } => {
            let r = astar(&SlidingPuzzle, |s| Ok::<f64, ScoreError>(scorer.score_puzzle(s)), state, limits, policy)?;
            (r.solved, r.objective_value, r.evaluated_nodes, r.elapsed_seconds)
        }
        Instance::Upmp { state, .. } => {
            let r =
                astar(&Premarshalling, |s| Ok::<f64, ScoreError>(scorer.score_warehouse(s)), state, limits, policy)?;
            (r.solved, r.objective_value, r.evaluated_nodes, r.elapsed_seconds)
        }
    };
    Ok(InstanceResult {
        instance_seed: instance.seed(),
        moves,
        lower_bound: instance.lower_bound(),
        solved,
        evaluated_nodes,
        elapsed_seconds,
    })
}

/// In-process evaluation of the built-in reference programs.
pub struct NativeEvaluator {
    known: HashMap<(Problem, String), BuiltinScorer>,
    fallback: Option<Box<dyn Evaluator>>,
}

impl Default for NativeEvaluator {
    fn default() -> Self {
        Self::new()
    }
}

impl NativeEvaluator {
    pub fn new() -> Self {
        let mut known = HashMap::new();
        for problem in Problem::ALL {
            for s in BuiltinScorer::catalog(problem) {
                known.insert((problem, code_hash(&s.source())), s);
            }
        }
        NativeEvaluator { known, fallback: None }
    }

    /// Programs that are not built in are handed to `fallback`.
    pub fn with_fallback(mut self, fallback: Box<dyn Evaluator>) -> Self {
        self.fallback = Some(fallback);
        self
    }

    /// The built-in scorer whose source normalizes to `code`, if any.
    pub fn recognise(&self, problem: Problem, code: &str) -> Option<BuiltinScorer> {
        self.known.get(&(problem, code_hash(code))).copied()
    }
}

impl Evaluator for NativeEvaluator {
    fn evaluate(
        &self,
        code: &str,
        instances: &[Instance],
        limits: &SearchLimits,
        policy: DuplicatePolicy,
    ) -> Result<Vec<InstanceResult>, EvalFailure> {
        let Some(problem) = instances.first().map(Instance::problem) else {
            return Ok(Vec::new());
        };
        match self.recognise(problem, code) {
            Some(scorer) => instances.iter().map(|i| solve_builtin(&scorer, i, limits, policy)).collect(),
            None => match &self.fallback {
                Some(f) => f.evaluate(code, instances, limits, policy),
                None => Err(EvalFailure::new(
                    EvalErrorCode::Unsupported,
                    "program is not a built-in scorer and no worker is configured",
                )),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::InstanceParams;

    fn upmp_instances() -> Vec<Instance> {
        let p = InstanceParams::Upmp { num_lanes: 3, depth: 3, num_classes: 3, fill_fraction: 0.6 };
        (0..4).map(|s| p.generate(s).unwrap()).collect()
    }

    #[test]
    fn recognises_reformatted_builtin_source() {
        let eval = NativeEvaluator::new();
        let src = BuiltinScorer::new(ScorerKind::BlockingCount).source();
        let noisy = format!("# blocking loads\n{}\n\n", src.replace("total = 0", "total  =  0   # counter"));
        assert_eq!(eval.recognise(Problem::Upmp, &noisy), Some(BuiltinScorer::new(ScorerKind::BlockingCount)));
        assert_eq!(eval.recognise(Problem::Spp, &noisy), None);
        let results = eval.evaluate(&noisy, &upmp_instances(), &SearchLimits::UPMP, DuplicatePolicy::Paper).unwrap();
        assert_eq!(results.len(), 4);
        assert!(results.iter().all(|r| r.solved && r.moves >= r.lower_bound));
    }

    #[test]
    fn unknown_code_without_worker_is_unsupported() {
        let eval = NativeEvaluator::new();
        let err = eval
            .evaluate(
                "def score_state(state):\n    return 42",
                &upmp_instances(),
                &SearchLimits::UPMP,
                DuplicatePolicy::Paper,
            )
            .unwrap_err();
        assert_eq!(err.code, EvalErrorCode::Unsupported);
    }

    struct Fixed;
    impl Evaluator for Fixed {
        fn evaluate(
            &self,
            _: &str,
            i: &[Instance],
            _: &SearchLimits,
            _: DuplicatePolicy,
        ) -> Result<Vec<InstanceResult>, EvalFailure> {
            Err(EvalFailure::new(EvalErrorCode::Runtime, format!("{} instances", i.len())))
        }
    }

    #[test]
    fn unknown_code_goes_to_fallback() {
        let eval = NativeEvaluator::new().with_fallback(Box::new(Fixed));
        let err = eval.evaluate(
            "def score_state(s):\n    return 1",
            &upmp_instances(),
            &SearchLimits::UPMP,
            DuplicatePolicy::Paper,
        );
        assert_eq!(err.unwrap_err(), EvalFailure::new(EvalErrorCode::Runtime, "4 instances"));
    }

    #[test]
    fn zero_node_budget_gives_penalty() {
        let limits = SearchLimits { max_evaluated_nodes: 0, ..SearchLimits::UPMP };
        let r = solve_builtin(
            &BuiltinScorer::new(ScorerKind::BlockingCount),
            &upmp_instances()[0],
            &limits,
            DuplicatePolicy::Paper,
        )
        .unwrap();
        assert!(!r.solved);
        assert_eq!(r.moves, 100);
    }

    #[test]
    fn mismatched_problem_is_unsupported() {
        let err = solve_builtin(
            &BuiltinScorer::new(ScorerKind::Manhattan),
            &upmp_instances()[0],
            &SearchLimits::UPMP,
            DuplicatePolicy::Paper,
        )
        .unwrap_err();
        assert_eq!(err.code, EvalErrorCode::Unsupported);
    }
}
