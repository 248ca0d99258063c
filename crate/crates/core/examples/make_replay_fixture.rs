//! Record the replay fixture used by the smoke run.
//!
//! Answers come from a fixed script over the built-in scorers, with a few
//! malformed, forbidden, reformatted and unknown programs mixed in.
//!
//! ```text
//! cargo run -p ceoh-core --example make_replay_fixture [OUT]
//! ```

#[path = "../tests/support/smoke.rs"]
mod smoke;

use ceoh_core::evaluator::{BuiltinScorer, NativeEvaluator, ScorerKind};
use ceoh_core::evolution::Evolution;
use ceoh_core::llm::{RecordingClient, ScriptedClient};
use ceoh_core::prompt::{render_answer, ParsedResponse, TemplateStore};

fn raw(thought: &str, code: &str) -> String {
    render_answer(&ParsedResponse { thought: thought.into(), code: code.into() })
}

fn answer(thought: &str, scorer: BuiltinScorer) -> String {
    raw(thought, &scorer.source())
}

fn reformatted(thought: &str, scorer: BuiltinScorer) -> String {
    let code: String = scorer
        .source()
        .lines()
        .map(|l| if l.trim().is_empty() { String::new() } else { format!("{l}   # step\n\n") })
        .collect();
    format!("Here is my idea. {{{thought}}}\n\n{code}\nThis should work well.\n")
}

fn script_entry(call: u64) -> String {
    use ScorerKind::*;
    let b = BuiltinScorer::new;
    let w = BuiltinScorer::weighted;
    match call {
        0 => answer("Count loads that sit above a load retrieved sooner.", b(BlockingCount)),
        1 => answer("Weight the blocking count heavily to dive towards the goal.", w(BlockingCount, 5)),
        2 => "I would count blocking loads per lane.".to_string(),
        3 => answer("Penalise every lane that is not sorted.", w(UnsortedLanes, 3)),
        4 => reformatted("Count loads that sit above a load retrieved sooner.", b(BlockingCount)),
        5 => {
            raw("Use a library sort.", "import heapq\ndef score_state(state):\n    return len(heapq.nsmallest(1, [0]))")
        }
        6 => answer("Blocking loads plus a strong unsorted-lane term.", w(BlockingPlusUnsorted, 5)),
        7 => answer("Scaled blocking count.", w(BlockingCount, 3)),
        8 => raw(
            "Sum the priorities of the top loads.",
            "def score_state(state):\n    return sum(lane[-1] for lane in state if lane)",
        ),
        9 => answer("Blocking count doubled.", w(BlockingCount, 2)),
        _ => {
            let pool = [
                w(BlockingPlusUnsorted, 2),
                w(UnsortedLanes, 4),
                b(BlockingPlusUnsorted),
                w(BlockingCount, 4),
                w(BlockingPlusUnsorted, 3),
                w(UnsortedLanes, 2),
                w(BlockingPlusUnsorted, 4),
                w(UnsortedLanes, 5),
            ];
            let s = pool[(call as usize - 10) % pool.len()];
            if call % 7 == 3 {
                return "{Loop until sorted.}\n```python\ndef score_state(state):\n    while True:\n        return 0\n```\n".into();
            }
            answer(&format!("Variant {} of the combined estimate.", call - 9), s)
        }
    }
}

fn main() {
    let out = std::env::args().nth(1).map(Into::into).unwrap_or_else(smoke::fixture_path);
    let dir = tempfile::tempdir().expect("temporary run directory");
    let client = RecordingClient::new(ScriptedClient::new(|_, call| script_entry(call)));
    let store = TemplateStore::builtin();
    let evaluator = NativeEvaluator::new();
    let evolution = Evolution::new(smoke::smoke_config(dir.path()), &store, &client, &evaluator).expect("smoke config");
    let summary = evolution.run(None).expect("scripted run");
    client.write_fixture(&out).expect("writing fixture");
    println!("{} exchanges written to {}", client.entries().len(), out.display());
    for p in summary.best_fitness_series {
        println!("generation {}: {:.6}", p.generation, p.best_fitness);
    }
}
