//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any fails.

#[path = "support/oracle.rs"]
mod oracle;
#[path = "support/smoke.rs"]
mod smoke;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use ceoh_core::evaluator::NativeEvaluator;
use ceoh_core::evolution::{
    dry_run, lineage_is_closed, list_snapshots, read_events, read_snapshot, run_log_path, Evolution, EvolutionConfig,
};
use ceoh_core::fitness::{fitness, InstanceResult};
use ceoh_core::instance::{write_instances, InstanceParams, Problem};
use ceoh_core::llm::ReplayClient;
use ceoh_core::prompt::{
    build_prompt, AugmentationMode, Parent, StrategyKind, TemplateStore, ALGORITHMIC_CONTEXT_MARKER,
    PROBLEM_CONTEXT_MARKER,
};
use ceoh_core::search::{astar, DuplicatePolicy, ScoreError, SearchLimits, Termination};
use ceoh_core::spp::{self, PuzzleState, SlidingPuzzle};
use ceoh_core::upmp::{self, Premarshalling, WarehouseState};
use num_rational::Ratio;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn puzzle_from(tiles: &[u16], n: usize) -> PuzzleState {
    let rows: Vec<Vec<u16>> = tiles.chunks(n).map(<[u16]>::to_vec).collect();
    PuzzleState::from_rows(&rows).unwrap()
}

fn strict_puzzle_optimum() -> Check {
    let started = Instant::now();
    let table = oracle::puzzle_distances(3);
    for seed in 0..100 {
        let shuffle = 1 + (seed % 20) as u32;
        let start = spp::generate(3, shuffle, seed, false).unwrap();
        let r = astar(
            &SlidingPuzzle,
            |s| Ok::<f64, ScoreError>(f64::from(spp::linear_conflict(s))),
            &start,
            &SearchLimits::SPP,
            DuplicatePolicy::Strict,
        )
        .unwrap();
        let optimum = table[start.tiles()];
        ensure(r.solved && r.objective_value == optimum, || {
            format!("seed {seed}: A* found {} moves, optimum {optimum}", r.objective_value)
        })?;
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("100 instances optimal in {secs:.2} s"))
}

fn strict_warehouse_optimum() -> Check {
    let bays = oracle::all_bays(3, 3, 3);
    let table = oracle::bay_distances(&bays);
    let (mut checked, mut stuck) = (0, 0);
    for bay in bays.iter().filter(|b| !oracle::bay_is_sorted(b)) {
        let start = WarehouseState::new(bay.clone(), 3, 3).unwrap();
        let search = || {
            astar(
                &Premarshalling,
                |s| Ok::<f64, ScoreError>(f64::from(upmp::blocking_count(s))),
                &start,
                &SearchLimits::UPMP,
                DuplicatePolicy::Strict,
            )
            .unwrap()
        };
        let Some(&optimum) = table.get(bay) else {
            let r = search();
            ensure(!r.solved && r.termination == Termination::Exhausted, || format!("{bay:?}: unsolvable but {r:?}"))?;
            stuck += 1;
            continue;
        };
        let lb = upmp::blocking_count(&start);
        ensure(lb <= optimum, || format!("{bay:?}: blocking_count {lb} exceeds optimum {optimum}"))?;
        let r = search();
        ensure(r.solved && r.objective_value == optimum, || {
            format!("{bay:?}: A* found {} moves, optimum {optimum}", r.objective_value)
        })?;
        checked += 1;
    }
    Ok(format!(
        "{checked} solvable non-goal layouts optimal, lower bound admissible; {stuck} unsolvable reported exhausted"
    ))
}

fn blocking_fixtures() -> Check {
    let cases: [(&[u8], u32); 4] = [(&[0, 4, 1], 1), (&[3, 3, 2], 2), (&[0, 5, 1, 5, 2], 2), (&[0, 4, 4, 3], 2)];
    for (lane, expected) in cases {
        let got = upmp::lane_blocking(lane);
        ensure(got == expected, || format!("{lane:?}: {got}, expected {expected}"))?;
    }
    Ok("4 lanes".into())
}

fn result(moves: u32, lower_bound: u32) -> InstanceResult {
    InstanceResult {
        instance_seed: 0,
        moves,
        lower_bound,
        solved: moves != 100,
        evaluated_nodes: 0,
        elapsed_seconds: 0.0,
    }
}

fn fitness_exact() -> Check {
    let sets: Vec<Vec<(u32, u32)>> = vec![
        vec![(100, 5)],
        vec![(7, 7)],
        vec![(10, 4), (12, 9), (100, 3)],
        vec![(3, 1), (4, 2), (5, 3), (6, 4), (7, 5), (100, 6), (9, 7), (31, 8), (11, 9), (27, 10)],
        vec![(4, 0), (2, 2)],
    ];
    for set in &sets {
        let results: Vec<InstanceResult> = set.iter().map(|&(m, lb)| result(m, lb)).collect();
        let float: f64 = fitness(&results).unwrap();
        let exact: Ratio<i64> = fitness(&results).unwrap();
        let reference = *exact.numer() as f64 / *exact.denom() as f64;
        ensure((float - reference).abs() <= 1e-12, || format!("{set:?}: {float} vs {exact}"))?;
    }
    let single: f64 = fitness(&[result(100, 5)]).unwrap();
    ensure((single - 19.0).abs() <= 1e-12, || format!("penalty case gave {single}"))?;
    Ok(format!("{} result sets within 1e-12; penalty case = {single}", sets.len()))
}

fn puzzle_bound_order() -> Check {
    let check = |tiles: &[u16], n: usize, optimum: u32| -> Result<(), String> {
        let s = puzzle_from(tiles, n);
        let (a, b, c) = (spp::misplaced_tiles(&s), spp::manhattan(&s), spp::linear_conflict(&s));
        ensure(a <= b && b <= c && c <= optimum, || format!("{tiles:?}: {a} {b} {c} vs {optimum}"))
    };
    let small = oracle::puzzle_distances(2);
    for (tiles, &d) in &small {
        check(tiles, 2, d)?;
    }
    let table = oracle::puzzle_distances(3);
    for seed in 0..500 {
        let s = spp::generate(3, 60, seed, false).unwrap();
        check(s.tiles(), 3, table[s.tiles()])?;
    }
    Ok(format!("{} 2×2 states and 500 3×3 states", small.len()))
}

fn zero_node_budget() -> Check {
    let no_nodes = |base: SearchLimits| SearchLimits { max_evaluated_nodes: 0, ..base };
    let start = spp::generate(3, 10, 1, false).unwrap();
    let p = astar(
        &SlidingPuzzle,
        |_| Ok::<f64, ScoreError>(0.0),
        &start,
        &no_nodes(SearchLimits::SPP),
        DuplicatePolicy::Paper,
    )
    .unwrap();
    ensure(!p.solved && p.objective_value == 200 && p.termination == Termination::NodeLimit, || {
        format!("puzzle: {p:?}")
    })?;
    let bay = WarehouseState::from_lanes(vec![vec![0, 2, 1], vec![0, 0, 3], vec![0, 0, 0]]).unwrap();
    let w = astar(
        &Premarshalling,
        |_| Ok::<f64, ScoreError>(0.0),
        &bay,
        &no_nodes(SearchLimits::UPMP),
        DuplicatePolicy::Paper,
    )
    .unwrap();
    ensure(!w.solved && w.objective_value == 100 && w.termination == Termination::NodeLimit, || format!("bay: {w:?}"))?;
    Ok("objective 200 / 100, node_limit".into())
}

fn prompt_matrix() -> Check {
    let store = TemplateStore::builtin();
    let parents: Vec<Parent> = (0..5)
        .map(|k| Parent { thought: format!("idea {k}"), code: format!("def score_state(state):\n    return {k}") })
        .collect();
    let mut built = 0;
    for problem in Problem::ALL {
        for mode in AugmentationMode::ALL {
            for strategy in StrategyKind::ALL {
                let count = strategy.parent_count(5);
                let spec =
                    build_prompt(&store, strategy, mode, problem, &parents[..count]).map_err(|e| e.to_string())?;
                let text = &spec.rendered_text;
                let tag = format!("{problem}/{}/{}", mode.as_str(), strategy.as_str());
                ensure(text.contains(ALGORITHMIC_CONTEXT_MARKER) == mode.includes_algorithmic_context(), || {
                    format!("{tag}: algorithmic context")
                })?;
                ensure(text.contains(PROBLEM_CONTEXT_MARKER) == mode.includes_problem_context(), || {
                    format!("{tag}: problem context")
                })?;
                let shown = (1..=5).filter(|k| text.contains(&format!("No. {k} algorithm"))).count();
                ensure(shown == count, || format!("{tag}: {shown} parents shown, expected {count}"))?;
                let wrong = match strategy {
                    StrategyKind::I1 | StrategyKind::M1 | StrategyKind::M2 => count + 1,
                    StrategyKind::E1 | StrategyKind::E2 => 0,
                };
                ensure(build_prompt(&store, strategy, mode, problem, &parents[..wrong]).is_err(), || {
                    format!("{tag}: accepted {wrong} parents")
                })?;
                built += 1;
            }
        }
    }
    ensure(built == 40, || format!("{built} prompts"))?;
    Ok("40 prompts".into())
}

fn dry_run_counts() -> Check {
    let config = EvolutionConfig::default();
    let r = dry_run(&config, &TemplateStore::builtin()).map_err(|e| e.to_string())?;
    ensure(r.init_prompts == 40 && r.evolution_prompts == 1600 && r.total_prompts == 1640, || format!("{r:?}"))?;
    Ok(format!("{} + {} prompts", r.init_prompts, r.evolution_prompts))
}

fn run_replay(dir: &Path) -> Result<(), String> {
    let client = ReplayClient::load(&smoke::fixture_path()).map_err(|e| e.to_string())?;
    let store = TemplateStore::builtin();
    let evaluator = NativeEvaluator::new();
    let evolution = Evolution::new(smoke::smoke_config(dir), &store, &client, &evaluator).map_err(|e| e.to_string())?;
    evolution.run(None).map_err(|e| e.to_string())?;
    Ok(())
}

fn replay_determinism() -> Check {
    let started = Instant::now();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_replay(a.path())?;
    let first_secs = started.elapsed().as_secs_f64();
    run_replay(b.path())?;
    let paths = list_snapshots(a.path()).map_err(|e| e.to_string())?;
    ensure(paths.len() == 4, || format!("{} snapshots", paths.len()))?;
    let mut snapshots = Vec::new();
    for p in &paths {
        let other = b.path().join(p.strip_prefix(a.path()).unwrap());
        ensure(std::fs::read(p).unwrap() == std::fs::read(&other).unwrap(), || format!("{} differs", other.display()))?;
        snapshots.push(read_snapshot(p, None).map_err(|e| e.to_string())?);
    }
    let best: Vec<f64> = snapshots.iter().map(|s| s.members[0].fitness).collect();
    ensure(best.windows(2).all(|w| w[1] <= w[0]), || format!("best fitness {best:?}"))?;
    let events = read_events(&run_log_path(a.path())).map_err(|e| e.to_string())?;
    ensure(lineage_is_closed(&snapshots, &events), || "lineage refers outside the pool".into())?;
    ensure(first_secs < 30.0, || format!("run took {first_secs:.1} s"))?;
    Ok(format!("4 identical snapshots, best {best:?}, {first_secs:.2} s per run"))
}

fn generator_determinism() -> Check {
    let seeds: Vec<u64> = (0..10).collect();
    for params in [InstanceParams::spp_default(), InstanceParams::upmp_default()] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let first = write_instances(&params, &seeds, a.path()).map_err(|e| e.to_string())?;
        let second = write_instances(&params, &seeds, b.path()).map_err(|e| e.to_string())?;
        for (x, y) in first.iter().zip(&second) {
            ensure(std::fs::read(x).unwrap() == std::fs::read(y).unwrap(), || format!("{} differs", x.display()))?;
        }
    }
    for seed in seeds {
        let state = upmp::generate(5, 5, 5, 0.6, seed).unwrap();
        ensure(state.load_count() == 15, || format!("seed {seed}: {} loads", state.load_count()))?;
    }
    Ok("20 files identical, 15 loads per bay".into())
}

fn main() {
    let checks: [Criterion; 10] = [
        ("strict A* with linear_conflict is optimal on 3×3 puzzles", strict_puzzle_optimum),
        ("strict A* with blocking_count is optimal on all 3×3×3 bays", strict_warehouse_optimum),
        ("blocking counts of reference lanes", blocking_fixtures),
        ("fitness matches exact rational evaluation", fitness_exact),
        ("misplaced ≤ manhattan ≤ linear_conflict ≤ optimum", puzzle_bound_order),
        ("zero node budget reports the penalty", zero_node_budget),
        ("prompt contexts and parent counts for 40 combinations", prompt_matrix),
        ("dry run of the default schedule", dry_run_counts),
        ("replayed run is deterministic and lineage-closed", replay_determinism),
        ("instance generators are deterministic", generator_determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {reason}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
