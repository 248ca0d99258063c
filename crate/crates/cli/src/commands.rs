use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use ceoh_core::evaluator::{BuiltinScorer, Evaluator, NativeEvaluator, WorkerConfig, WorkerEvaluator};
use ceoh_core::evolution::{
    build_report, dry_run, list_snapshots, read_snapshot, write_report, Evolution, RunReport, TOOL_VERSION,
};
use ceoh_core::fitness::{fitness, solved_summary, InstanceResult, SolvedSummary};
use ceoh_core::instance::{read_instance, write_instances, Instance, InstanceParams, Problem};
use ceoh_core::llm::{HttpClient, LlmClient, ReplayClient};
use ceoh_core::prompt::{AugmentationMode, TemplateStore};
use ceoh_core::search::SearchLimits;
use serde::Serialize;

use crate::config::{Backend, RunConfig};
use crate::failure::{self, llm_kind, Failure, Outcome};
use crate::{Format, InstanceArgs, LimitArgs};

/// Parse `0-9,12,20-22` into seeds, in the order given.
pub fn parse_seeds(text: &str) -> anyhow::Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
                if b < a {
                    bail!("empty seed range `{part}`");
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().with_context(|| format!("bad seed `{part}`"))?),
        }
    }
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

fn instance_params(args: &InstanceArgs) -> InstanceParams {
    match InstanceParams::default_for(args.problem) {
        InstanceParams::Spp { n, shuffle_moves, allow_inversions } => InstanceParams::Spp {
            n: args.n.unwrap_or(n),
            shuffle_moves: args.shuffle_moves.unwrap_or(shuffle_moves),
            allow_inversions: args.allow_inversions || allow_inversions,
        },
        InstanceParams::Upmp { num_lanes, depth, num_classes, fill_fraction } => InstanceParams::Upmp {
            num_lanes: args.lanes.unwrap_or(num_lanes),
            depth: args.depth.unwrap_or(depth),
            num_classes: args.classes.unwrap_or(num_classes),
            fill_fraction: args.fill.unwrap_or(fill_fraction),
        },
    }
}

fn load_instances(args: &InstanceArgs) -> Result<Vec<Instance>, Failure> {
    let Some(dir) = &args.instances else {
        let params = instance_params(args);
        let seeds = parse_seeds(&args.seeds).map_err(failure::config)?;
        return seeds.iter().map(|&s| params.generate(s)).collect::<Result<_, _>>().map_err(failure::config);
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))
        .map_err(failure::config)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut instances = Vec::new();
    for path in paths {
        let instance = read_instance(&path).map_err(failure::config)?;
        if instance.problem() == args.problem {
            instances.push(instance);
        }
    }
    if instances.is_empty() {
        return Err(failure::config(anyhow!("no {} instances in {}", args.problem, dir.display())));
    }
    Ok(instances)
}

fn limits(problem: Problem, args: &LimitArgs) -> Result<SearchLimits, Failure> {
    let base = match problem {
        Problem::Spp => SearchLimits::SPP,
        Problem::Upmp => SearchLimits::UPMP,
    };
    let limits = SearchLimits {
        timeout_seconds: args.timeout.unwrap_or(base.timeout_seconds),
        max_evaluated_nodes: args.max_nodes.unwrap_or(base.max_evaluated_nodes),
        max_moves_penalty: args.penalty.unwrap_or(base.max_moves_penalty),
    };
    limits.validate().map_err(|e| failure::config(anyhow!(e)))?;
    Ok(limits)
}

fn evaluator(worker: Option<WorkerConfig>) -> NativeEvaluator {
    match worker {
        Some(config) => NativeEvaluator::new().with_fallback(Box::new(WorkerEvaluator::new(config))),
        None => NativeEvaluator::new(),
    }
}

fn worker_from_args(args: &LimitArgs) -> Option<WorkerConfig> {
    let command: Vec<String> = args.worker.as_deref()?.split_whitespace().map(String::from).collect();
    (!command.is_empty()).then(|| WorkerConfig { command, ..WorkerConfig::default() })
}

/// Program text from a `.py` file or from the `code` field of a JSON
/// heuristic record.
fn read_program(path: &Path) -> Result<String, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(failure::config)?;
    if path.extension().is_some_and(|x| x == "json") {
        let value: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))
            .map_err(failure::config)?;
        return value
            .get("code")
            .and_then(|c| c.as_str())
            .map(String::from)
            .ok_or_else(|| failure::config(anyhow!("{}: no `code` string field", path.display())));
    }
    Ok(text)
}

fn builtin(name: &str, problem: Problem) -> Result<BuiltinScorer, Failure> {
    let scorer = BuiltinScorer::parse(name).ok_or_else(|| failure::config(anyhow!("unknown heuristic `{name}`")))?;
    if !scorer.supports(problem) {
        return Err(failure::config(anyhow!("heuristic `{name}` does not apply to {problem}")));
    }
    Ok(scorer)
}

fn load_run_config(path: &Path) -> Result<RunConfig, Failure> {
    RunConfig::load(path).map_err(failure::config)
}

fn templates(config: &RunConfig) -> Result<TemplateStore, Failure> {
    match &config.templates_dir {
        Some(dir) => TemplateStore::from_dir(dir).map_err(failure::config),
        None => Ok(TemplateStore::builtin()),
    }
}

fn client(backend: &Backend) -> Result<Box<dyn LlmClient>, Failure> {
    match backend {
        Backend::Replay { fixture } => ReplayClient::load(fixture)
            .map(|c| Box::new(c) as Box<dyn LlmClient>)
            .map_err(|e| Failure { kind: llm_kind(&e), error: e.into() }),
        Backend::Http(http) => HttpClient::new(http.clone())
            .map(|c| Box::new(c) as Box<dyn LlmClient>)
            .map_err(|e| Failure { kind: llm_kind(&e), error: e.into() }),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn evolve(
    config_path: &Path,
    resume: Option<&Path>,
    dry: bool,
    mode: Option<AugmentationMode>,
    problem: Option<Problem>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
) -> Outcome {
    let mut config = load_run_config(config_path)?;
    if let Some(mode) = mode {
        config.evolution.mode = mode;
    }
    if let Some(problem) = problem {
        if problem != config.evolution.problem {
            config.evolution.instances = None;
            config.evolution.limits = None;
        }
        config.evolution.problem = problem;
    }
    if let Some(seed) = seed {
        config.evolution.rng_seed = seed;
    }
    if let Some(dir) = output_dir {
        config.evolution.output_dir = dir;
    }
    config.validate().map_err(failure::config)?;
    let store = templates(&config)?;

    if dry {
        let report = dry_run(&config.evolution, &store)?;
        println!("problem: {}  mode: {}", config.evolution.problem, config.evolution.mode);
        println!("init prompts: {}", report.init_prompts);
        println!("evolution prompts: {}", report.evolution_prompts);
        println!("total prompts: {}", report.total_prompts);
        for (strategy, count) in &report.per_strategy {
            println!("  {}: {count}", strategy.as_str());
        }
        println!("estimated input tokens: {}", report.estimated_input_tokens);
        return Ok(());
    }

    let output = config.evolution.output_dir.clone();
    let snapshot = match resume {
        None => None,
        Some(p) => {
            let path = if p.as_os_str().is_empty() {
                list_snapshots(&output).map_err(failure::config)?.pop().expect("list_snapshots is never empty")
            } else {
                p.to_path_buf()
            };
            Some(read_snapshot(&path, Some(&config.evolution.digest())).map_err(failure::config)?)
        }
    };
    let llm = client(&config.backend)?;
    let evaluator = evaluator(config.worker.worker_config());
    let evolution = Evolution::new(config.evolution.clone(), &store, llm.as_ref(), &evaluator)?;
    let summary = evolution.run(snapshot.as_ref())?;
    if config.report.csv {
        let report = build_report(&output).map_err(failure::runtime)?;
        write_csv(&output, &report).map_err(failure::runtime)?;
    }
    println!("prompts issued: {}", summary.prompts_issued);
    for point in &summary.best_fitness_series {
        println!("generation {:>3}  best fitness {:.6}", point.generation, point.best_fitness);
    }
    println!("output: {}", output.display());
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    heuristic: String,
    fitness: Option<f64>,
    #[serde(flatten)]
    summary: SolvedSummary,
    error: Option<String>,
}

pub fn bench(
    instance: &InstanceArgs,
    limit_args: &LimitArgs,
    names: &[String],
    stored: &[PathBuf],
    format: Format,
) -> Outcome {
    let problem = instance.problem;
    let instances = load_instances(instance)?;
    let limits = limits(problem, limit_args)?;
    let evaluator = evaluator(worker_from_args(limit_args));
    let mut programs: Vec<(String, String)> = Vec::new();
    for name in names {
        let scorer = builtin(name, problem)?;
        programs.push((scorer.name(), scorer.source()));
    }
    for path in stored {
        programs.push((path.display().to_string(), read_program(path)?));
    }
    if programs.is_empty() {
        for scorer in BuiltinScorer::catalog(problem).into_iter().filter(|s| s.weight == 1) {
            programs.push((scorer.name(), scorer.source()));
        }
    }
    let mut rows = Vec::new();
    for (name, code) in programs {
        let row = match evaluator.evaluate(&code, &instances, &limits, limit_args.policy) {
            Ok(results) => BenchRow {
                heuristic: name,
                fitness: fitness::<f64>(&results).ok(),
                summary: solved_summary(&results),
                error: None,
            },
            Err(e) => {
                BenchRow { heuristic: name, fitness: None, summary: solved_summary(&[]), error: Some(e.to_string()) }
            }
        };
        rows.push(row);
    }
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rows).map_err(failure::runtime)?),
        Format::Text => {
            println!("{} instances of {problem}, policy {:?}", instances.len(), limit_args.policy);
            println!(
                "{:<28} {:>8} {:>12} {:>14} {:>12}",
                "heuristic", "solved", "fitness", "fitness(sol)", "secs(sol)"
            );
            for r in &rows {
                if let Some(e) = &r.error {
                    println!("{:<28} {e}", r.heuristic);
                    continue;
                }
                println!(
                    "{:<28} {:>8} {:>12} {:>14} {:>12}",
                    r.heuristic,
                    format!("{}/{}", r.summary.solved, r.summary.instances),
                    opt(r.fitness, 4),
                    opt(r.summary.mean_fitness_solved, 4),
                    opt(r.summary.mean_seconds_solved, 3),
                );
            }
        }
    }
    Ok(())
}

fn opt(v: Option<f64>, places: usize) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.places$}"))
}

pub fn gen_instances(instance: &InstanceArgs, out: &Path) -> Outcome {
    let params = instance_params(instance);
    let seeds = parse_seeds(&instance.seeds).map_err(failure::config)?;
    let paths = write_instances(&params, &seeds, out).map_err(failure::runtime)?;
    for p in &paths {
        println!("{}", p.display());
    }
    Ok(())
}

fn write_csv(run_dir: &Path, report: &RunReport) -> std::io::Result<()> {
    let mut series = String::from("generation,best_fitness\n");
    for p in &report.best_fitness {
        let _ = writeln!(series, "{},{}", p.generation, p.best_fitness);
    }
    std::fs::write(run_dir.join("fitness_series.csv"), series)?;
    let mut usage = String::from(
        "problem,mode,prompts,total_input_tokens,total_output_tokens,mean_input_tokens,mean_output_tokens\n",
    );
    for r in &report.token_usage {
        let _ = writeln!(
            usage,
            "{},{},{},{},{},{},{}",
            r.problem,
            r.mode,
            r.prompts,
            r.total_input_tokens,
            r.total_output_tokens,
            r.mean_input_tokens,
            r.mean_output_tokens
        );
    }
    std::fs::write(run_dir.join("token_usage.csv"), usage)
}

pub fn report(run_dir: &Path, format: Format, csv: bool) -> Outcome {
    let report = build_report(run_dir).map_err(failure::config)?;
    write_report(run_dir, &report).map_err(failure::runtime)?;
    if csv {
        write_csv(run_dir, &report).map_err(failure::runtime)?;
    }
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).map_err(failure::runtime)?),
        Format::Text => {
            if report.tool_version != TOOL_VERSION {
                log::warn!("report written by {} from a {} run", TOOL_VERSION, report.tool_version);
            }
            println!("config digest: {}", report.config_digest);
            println!("prompts issued: {}", report.prompts_issued);
            for p in &report.best_fitness {
                println!("generation {:>3}  best fitness {:.6}", p.generation, p.best_fitness);
            }
            for r in &report.token_usage {
                println!(
                    "{} {}: {} prompts, mean input {:.1}, mean output {:.1}",
                    r.problem, r.mode, r.prompts, r.mean_input_tokens, r.mean_output_tokens
                );
            }
        }
    }
    Ok(())
}

pub fn eval(instance: &InstanceArgs, limit_args: &LimitArgs, name: Option<&str>, code: Option<&Path>) -> Outcome {
    let problem = instance.problem;
    let program = match (name, code) {
        (Some(n), _) => builtin(n, problem)?.source(),
        (None, Some(p)) => read_program(p)?,
        (None, None) => return Err(failure::config(anyhow!("give --heuristic or --code"))),
    };
    let instances = load_instances(instance)?;
    let limits = limits(problem, limit_args)?;
    let results: Vec<InstanceResult> = evaluator(worker_from_args(limit_args))
        .evaluate(&program, &instances, &limits, limit_args.policy)
        .map_err(|e| failure::runtime(anyhow!(e.to_string())))?;
    println!("{:>8} {:>8} {:>6} {:>7} {:>10} {:>9}", "seed", "moves", "lb", "solved", "nodes", "secs");
    for r in &results {
        println!(
            "{:>8} {:>8} {:>6} {:>7} {:>10} {:>9.3}",
            r.instance_seed, r.moves, r.lower_bound, r.solved, r.evaluated_nodes, r.elapsed_seconds
        );
    }
    println!("fitness: {:.6}", fitness::<f64>(&results).map_err(failure::runtime)?);
    Ok(())
}
