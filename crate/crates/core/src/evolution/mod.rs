//! The evolutionary loop: initial population, per-generation prompting,
//! evaluation, survivor selection, snapshots and resumption.

mod config;
mod record;
mod report;
mod runlog;
mod schedule;

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::{EvalFailure, Evaluator};
use crate::fitness::{fitness, InstanceResult};
use crate::instance::{Instance, InstanceError};
use crate::llm::{estimate_tokens, prompt_sha256, CompletionRequest, LlmClient, LlmError};
use crate::prompt::{
    build_prompt, code_hash, parse_response, validate_code, Parent, PromptError, StrategyKind, TemplateStore,
};
use crate::rng::SeededStream;

pub use config::{EvolutionConfig, LlmSettings, ParentSelection};
pub use record::{
    list_snapshots, read_snapshot, render_snapshot, snapshot_dir, snapshot_path, sort_by_fitness, write_snapshot,
    HeuristicRecord, Population, RngState, Snapshot, SnapshotError, SNAPSHOT_FORMAT_VERSION,
};
pub use report::{build_report, report_path, write_report, FitnessPoint, ReportError, RunReport};
pub use runlog::{read_events, run_log_path, usage_samples, RunEvent, RunLog};
pub use schedule::{PromptSlot, Schedule};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Instances(#[from] InstanceError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(LlmError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("no valid heuristic after {attempts} initial prompts; raw responses in {bundle}", bundle = .bundle.display())]
    NoValidHeuristics { attempts: usize, bundle: PathBuf },
    #[error("all {attempts} initial requests failed; the model endpoint is unusable")]
    NoResponses { attempts: usize },
    #[error("writing run artifacts: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Report(#[from] ReportError),
}

/// Uniform (or rank-biased) sampling without replacement from a
/// fitness-sorted member list. Asking for more than there are returns all.
pub fn sample_parents(
    members: &[HeuristicRecord],
    count: usize,
    rng: &mut SeededStream,
    selection: ParentSelection,
) -> Vec<HeuristicRecord> {
    let mut pool: Vec<usize> = (0..members.len()).collect();
    let mut chosen = Vec::new();
    for _ in 0..count.min(members.len()) {
        let at = match selection {
            ParentSelection::Uniform => rng.pick(pool.len()),
            ParentSelection::Rank => {
                let weights: Vec<f64> = pool.iter().map(|&i| 1.0 / (i as f64 + 1.0)).collect();
                let mut target = rng.unit() * weights.iter().sum::<f64>();
                let mut at = pool.len() - 1;
                for (k, w) in weights.iter().enumerate() {
                    if target < *w {
                        at = k;
                        break;
                    }
                    target -= w;
                }
                at
            }
        };
        chosen.push(members[pool.remove(at)].clone());
    }
    chosen
}

/// What happened to one prompt.
struct SlotResult {
    events: Vec<RunEvent>,
    raw_response: Option<String>,
    record: Option<HeuristicRecord>,
}

/// Counts from a run that only renders prompts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DryRunReport {
    pub init_prompts: u64,
    pub evolution_prompts: u64,
    pub total_prompts: u64,
    pub per_strategy: BTreeMap<StrategyKind, u64>,
    pub prompt_chars: u64,
    pub estimated_input_tokens: u64,
}

/// Render every prompt of the configured schedule without contacting a
/// model. Parent slots are filled with placeholders.
pub fn dry_run(config: &EvolutionConfig, store: &TemplateStore) -> Result<DryRunReport, RunError> {
    config.validate().map_err(RunError::Config)?;
    let schedule = Schedule::new(config.init_calls(), config.generations, config.repetitions);
    let mut report = DryRunReport {
        init_prompts: 0,
        evolution_prompts: 0,
        total_prompts: 0,
        per_strategy: BTreeMap::new(),
        prompt_chars: 0,
        estimated_input_tokens: 0,
    };
    for slot in schedule {
        let count = slot.strategy.parent_count(config.parents).min(config.survivors);
        let parents: Vec<Parent> = (0..count)
            .map(|k| Parent {
                thought: format!("placeholder {k}"),
                code: "def score_state(state):\n    return 0".into(),
            })
            .collect();
        let prompt = build_prompt(store, slot.strategy, config.mode, config.problem, &parents)?;
        if slot.generation == 0 {
            report.init_prompts += 1;
        } else {
            report.evolution_prompts += 1;
        }
        report.total_prompts += 1;
        *report.per_strategy.entry(slot.strategy).or_default() += 1;
        report.prompt_chars += prompt.rendered_text.chars().count() as u64;
        report.estimated_input_tokens += estimate_tokens(&prompt.rendered_text);
    }
    Ok(report)
}

/// Final state of a completed run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub population: Population,
    pub prompts_issued: u64,
    pub best_fitness_series: Vec<FitnessPoint>,
}

pub struct Evolution<'a> {
    config: EvolutionConfig,
    digest: String,
    store: &'a TemplateStore,
    llm: &'a dyn LlmClient,
    evaluator: &'a dyn Evaluator,
    instances: Vec<Instance>,
    schedule: Schedule,
    log: RunLog,
}

impl<'a> Evolution<'a> {
    /// Validate the configuration, build the training set and open the run
    /// log under `config.output_dir`.
    pub fn new(
        config: EvolutionConfig,
        store: &'a TemplateStore,
        llm: &'a dyn LlmClient,
        evaluator: &'a dyn Evaluator,
    ) -> Result<Self, RunError> {
        config.validate().map_err(RunError::Config)?;
        let instances = config.training_instances()?;
        let schedule = Schedule::new(config.init_calls(), config.generations, config.repetitions);
        std::fs::create_dir_all(&config.output_dir)?;
        let log = RunLog::open(&run_log_path(&config.output_dir))?;
        Ok(Evolution { digest: config.digest(), config, store, llm, evaluator, instances, schedule, log })
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn config_digest(&self) -> &str {
        &self.digest
    }

    /// Evaluate a program on the training instances.
    pub fn evaluate_heuristic(&self, code: &str) -> Result<Vec<InstanceResult>, EvalFailure> {
        let mut results = self.evaluator.evaluate(code, &self.instances, &self.config.limits(), self.config.policy)?;
        if !self.config.record_timings {
            for r in &mut results {
                r.elapsed_seconds = 0.0;
            }
        }
        Ok(results)
    }

    fn process_slot(&self, slot: PromptSlot, pool: &[HeuristicRecord]) -> Result<SlotResult, RunError> {
        let mut rng = SeededStream::with_stream(self.config.rng_seed, slot.index);
        let count = slot.strategy.parent_count(self.config.parents);
        let parents = sample_parents(pool, count, &mut rng, self.config.selection);
        let shown: Vec<Parent> =
            parents.iter().map(|p| Parent { thought: p.thought.clone(), code: p.code.clone() }).collect();
        let prompt = build_prompt(self.store, slot.strategy, self.config.mode, self.config.problem, &shown)?;
        let parent_ids: Vec<String> = parents.iter().map(|p| p.id.clone()).collect();
        let mut events = vec![RunEvent::PromptIssued {
            prompt_index: slot.index,
            generation: slot.generation,
            strategy: slot.strategy,
            parent_ids: parent_ids.clone(),
            prompt_sha256: prompt_sha256(&prompt.rendered_text),
            prompt_chars: prompt.rendered_text.chars().count(),
        }];
        let request = CompletionRequest {
            model: self.config.llm.model.clone(),
            prompt: prompt.rendered_text,
            temperature: self.config.llm.temperature,
            max_output_tokens: self.config.llm.max_output_tokens,
            request_tag: format!("g{}/{}/{}", slot.generation, slot.strategy, slot.index),
        };
        let reply = match self.llm.complete(&request) {
            Ok(r) => r,
            Err(
                e @ (LlmError::MissingFixture { .. }
                | LlmError::Fixture(_)
                | LlmError::Auth { .. }
                | LlmError::Config(_)
                | LlmError::InvalidRequest(_)),
            ) => return Err(RunError::Llm(e)),
            Err(e) => {
                log::warn!("{}: {e}", request.request_tag);
                events.push(RunEvent::RequestFailed { prompt_index: slot.index, message: e.to_string() });
                return Ok(SlotResult { events, raw_response: None, record: None });
            }
        };
        events.push(RunEvent::ResponseReceived {
            prompt_index: slot.index,
            problem: self.config.problem,
            mode: self.config.mode,
            input_tokens: reply.input_tokens,
            output_tokens: reply.output_tokens,
            tokens_estimated: reply.tokens_estimated,
            latency_seconds: if self.config.record_timings { reply.latency_seconds } else { 0.0 },
        });
        let raw_response = Some(reply.text.clone());
        let reject = |mut events: Vec<RunEvent>, reasons: Vec<String>| {
            events.push(RunEvent::Validation { prompt_index: slot.index, accepted: false, reasons });
            Ok(SlotResult { events, raw_response: raw_response.clone(), record: None })
        };
        let parsed = match parse_response(&reply.text) {
            Ok(p) => p,
            Err(e) => return reject(events, vec![e.kind.code().to_string()]),
        };
        let violations = validate_code(&parsed.code);
        if !violations.is_empty() {
            return reject(events, violations.iter().map(|v| v.code().to_string()).collect());
        }
        let hash = code_hash(&parsed.code);
        if pool.iter().any(|m| code_hash(&m.code) == hash) {
            return reject(events, vec!["DUPLICATE".into()]);
        }
        events.push(RunEvent::Validation { prompt_index: slot.index, accepted: true, reasons: vec![] });

        let id = format!("h{:05}", slot.index);
        let evaluated = self.evaluate_heuristic(&parsed.code);
        let (per_instance, fit, error) = match evaluated {
            Ok(results) => {
                let f = fitness::<f64>(&results).unwrap_or(f64::INFINITY);
                (results, f, None)
            }
            Err(e) => (Vec::new(), f64::INFINITY, Some(e.to_string())),
        };
        events.push(RunEvent::Evaluation {
            prompt_index: slot.index,
            id: id.clone(),
            fitness: fit.is_finite().then_some(fit),
            solved: per_instance.iter().filter(|r| r.solved).count(),
            instances: self.instances.len(),
            error,
        });
        let record = fit.is_finite().then(|| HeuristicRecord {
            id,
            thought: parsed.thought,
            code: parsed.code,
            fitness: fit,
            per_instance,
            parent_ids,
            strategy: slot.strategy,
            generation: slot.generation,
            created_with_mode: self.config.mode,
        });
        Ok(SlotResult { events, raw_response, record })
    }

    /// Run `slots` in chunks of `concurrency`. Each chunk sees the pool as
    /// it was when the chunk started; results are merged in slot order.
    fn run_slots(
        &self,
        slots: Vec<PromptSlot>,
        pool: &mut Vec<HeuristicRecord>,
        raw: &mut Vec<String>,
    ) -> Result<(), RunError> {
        for chunk in slots.chunks(self.config.concurrency) {
            let results: Vec<Result<SlotResult, RunError>> = if chunk.len() == 1 {
                vec![self.process_slot(chunk[0], pool)]
            } else {
                let snapshot: &[HeuristicRecord] = pool;
                std::thread::scope(|scope| {
                    let handles: Vec<_> =
                        chunk.iter().map(|&slot| scope.spawn(move || self.process_slot(slot, snapshot))).collect();
                    handles.into_iter().map(|h| h.join().expect("prompt worker panicked")).collect()
                })
            };
            for result in results {
                let mut result = result?;
                if let Some(record) = result.record.take() {
                    let hash = code_hash(&record.code);
                    if pool.iter().any(|m| code_hash(&m.code) == hash) {
                        result.events.push(RunEvent::Validation {
                            prompt_index: result_index(&result.events),
                            accepted: false,
                            reasons: vec!["DUPLICATE".into()],
                        });
                    } else {
                        pool.push(record);
                        sort_by_fitness(pool);
                    }
                }
                for e in &result.events {
                    self.log.record(e)?;
                }
                raw.extend(result.raw_response);
            }
        }
        Ok(())
    }

    fn snapshot(&self, population: &Population) -> Snapshot {
        let prompts_issued = self.schedule.generation(population.generation).last().map(|s| s.index + 1).unwrap_or(0);
        Snapshot {
            format_version: SNAPSHOT_FORMAT_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            generation: population.generation,
            config_digest: self.digest.clone(),
            rng_state: RngState { seed: self.config.rng_seed, prompts_issued },
            members: population.members.clone(),
        }
    }

    fn select(&self, generation: u32, mut pool: Vec<HeuristicRecord>) -> Result<Population, RunError> {
        sort_by_fitness(&mut pool);
        pool.truncate(self.config.survivors);
        let shortfall = pool.len() < self.config.survivors;
        if shortfall {
            log::warn!("generation {generation}: only {} of {} survivors", pool.len(), self.config.survivors);
        }
        let population = Population { generation, members: pool };
        self.log.record(&RunEvent::Selection {
            generation,
            member_ids: population.ids(),
            best_fitness: population.best_fitness(),
            shortfall,
        })?;
        write_snapshot(&self.config.output_dir, &self.snapshot(&population))?;
        Ok(population)
    }

    /// Issue the initial prompts and keep the best `survivors` valid,
    /// distinct heuristics as generation 0.
    pub fn initialize_population(&self) -> Result<Population, RunError> {
        let mut pool = Vec::new();
        let mut raw = Vec::new();
        self.run_slots(self.schedule.generation(0).collect(), &mut pool, &mut raw)?;
        if pool.is_empty() && raw.is_empty() {
            return Err(RunError::NoResponses { attempts: self.config.init_calls() });
        }
        if pool.is_empty() {
            let bundle = self.config.output_dir.join("init_failure_responses.json");
            let mut text = serde_json::to_string_pretty(&raw).expect("strings serialize");
            text.push('\n');
            std::fs::write(&bundle, text)?;
            return Err(RunError::NoValidHeuristics { attempts: self.config.init_calls(), bundle });
        }
        self.select(0, pool)
    }

    /// One generation: `repetitions` prompts per strategy, new heuristics
    /// joining the working pool at once, then truncation to `survivors`.
    pub fn run_generation(&self, population: &Population) -> Result<Population, RunError> {
        let generation = population.generation + 1;
        let mut pool = population.members.clone();
        let mut raw = Vec::new();
        self.run_slots(self.schedule.generation(generation).collect(), &mut pool, &mut raw)?;
        self.select(generation, pool)
    }

    fn start(&self, resumed_at_generation: Option<u32>) -> Result<(), RunError> {
        self.log.record(&RunEvent::RunStarted {
            tool_version: TOOL_VERSION.to_string(),
            config_digest: self.digest.clone(),
            problem: self.config.problem,
            mode: self.config.mode,
            prompts_planned: self.schedule.len(),
            resumed_at_generation,
        })?;
        Ok(())
    }

    /// Check that `snapshot` belongs to this run and sits on a generation
    /// boundary of its schedule.
    pub fn check_resume(&self, snapshot: &Snapshot) -> Result<(), RunError> {
        let expected = self.snapshot(&snapshot.population()).rng_state;
        if snapshot.config_digest != self.digest {
            return Err(RunError::Config(format!(
                "snapshot belongs to config {}, current config is {}",
                snapshot.config_digest, self.digest
            )));
        }
        if snapshot.rng_state != expected || snapshot.generation > self.config.generations {
            return Err(RunError::Config(format!(
                "snapshot random-stream position {:?} does not match generation {} (expected {:?})",
                snapshot.rng_state, snapshot.generation, expected
            )));
        }
        Ok(())
    }

    /// Run to the configured number of generations, optionally continuing
    /// from a snapshot.
    pub fn run(&self, resume: Option<&Snapshot>) -> Result<RunSummary, RunError> {
        let mut population = match resume {
            Some(snapshot) => {
                self.check_resume(snapshot)?;
                self.start(Some(snapshot.generation + 1))?;
                snapshot.population()
            }
            None => {
                self.start(None)?;
                self.initialize_population()?
            }
        };
        while population.generation < self.config.generations {
            population = self.run_generation(&population)?;
        }
        let prompts_issued = self.snapshot(&population).rng_state.prompts_issued;
        self.log.record(&RunEvent::RunFinished { prompts_issued, best_fitness: population.best_fitness() })?;
        let report = build_report(&self.config.output_dir)?;
        write_report(&self.config.output_dir, &report)?;
        Ok(RunSummary { population, prompts_issued, best_fitness_series: report.best_fitness })
    }
}

fn result_index(events: &[RunEvent]) -> u64 {
    match events.first() {
        Some(RunEvent::PromptIssued { prompt_index, .. }) => *prompt_index,
        _ => 0,
    }
}

/// Every parent id names a record that was in the pool before the child:
/// an earlier prompt index, present in some earlier snapshot or created
/// earlier in the same generation.
pub fn lineage_is_closed(snapshots: &[Snapshot], events: &[RunEvent]) -> bool {
    let mut created: HashSet<String> = HashSet::new();
    for e in events {
        match e {
            RunEvent::PromptIssued { parent_ids, .. } => {
                if !parent_ids.iter().all(|p| created.contains(p)) {
                    return false;
                }
            }
            RunEvent::Evaluation { id, fitness: Some(_), .. } => {
                created.insert(id.clone());
            }
            _ => {}
        }
    }
    snapshots.iter().flat_map(|s| &s.members).all(|m| m.parent_ids.iter().all(|p| created.contains(p)))
}
