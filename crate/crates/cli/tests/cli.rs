use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn ceoh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ceoh")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn dry_run_counts_full_schedule() {
    let config = repo().join("configs/full_upmp.toml");
    let out = ceoh(&["evolve", config.to_str().unwrap(), "--dry-run"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("init prompts: 40"), "{text}");
    assert!(text.contains("evolution prompts: 1600"), "{text}");
    assert!(text.contains("total prompts: 1640"), "{text}");
    let out = ceoh(&["evolve", config.to_str().unwrap(), "--dry-run", "--mode", "eoh", "--problem", "spp"]);
    assert!(stdout(&out).contains("problem: spp  mode: eoh"));
}

#[test]
fn replay_run_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    let config = repo().join("configs/replay_smoke.toml");
    let out = ceoh(&["evolve", config.to_str().unwrap(), "--output-dir", run_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("prompts issued: 34"));
    for f in ["report.json", "run_log.jsonl", "fitness_series.csv", "token_usage.csv", "snapshots/gen_003.json"] {
        assert!(run_dir.join(f).is_file(), "{f} missing");
    }
    let series = std::fs::read_to_string(run_dir.join("fitness_series.csv")).unwrap();
    assert_eq!(series.lines().count(), 5);

    std::fs::remove_file(run_dir.join("report.json")).unwrap();
    let out = ceoh(&["report", run_dir.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["prompts_issued"], 34);
    assert_eq!(report["best_fitness"].as_array().unwrap().len(), 4);
    assert!(run_dir.join("report.json").is_file());

    // a different seed changes the digest, so the snapshots no longer apply
    let out = ceoh(&[
        "evolve",
        config.to_str().unwrap(),
        "--output-dir",
        run_dir.to_str().unwrap(),
        "--seed",
        "9",
        "--resume",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = write_config(dir.path(), "[backend]\nkind = \"replay\"\nfixture = \"absent.json\"\n");
    assert_eq!(ceoh(&["evolve", missing.to_str().unwrap()]).status.code(), Some(3));

    std::fs::write(dir.path().join("empty.json"), "[]").unwrap();
    let empty = write_config(
        dir.path(),
        "[evolution]\nsurvivors = 1\ngenerations = 1\nrepetitions = 1\noutput_dir = \"out\"\n[backend]\nkind = \"replay\"\nfixture = \"empty.json\"\n",
    );
    assert_eq!(ceoh(&["evolve", empty.to_str().unwrap()]).status.code(), Some(3));

    let bad = write_config(dir.path(), "[evolution]\nsurvivors = 0\n[backend]\nkind = \"replay\"\nfixture = \"f\"\n");
    assert_eq!(ceoh(&["evolve", bad.to_str().unwrap()]).status.code(), Some(2));

    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    drop(listener);
    let http = write_config(
        dir.path(),
        &format!(
            "[evolution]\nsurvivors = 1\ngenerations = 1\nrepetitions = 1\noutput_dir = \"out2\"\n[backend]\nkind = \"http\"\nbase_url = \"http://127.0.0.1:{port}/v1\"\nmax_retries = 0\n"
        ),
    );
    assert_eq!(ceoh(&["evolve", http.to_str().unwrap()]).status.code(), Some(4));

    assert_eq!(ceoh(&["report", dir.path().join("nothing").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn generated_instances_are_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = ceoh(&["gen-instances", "--problem", "upmp", "--seeds", "0-9", "--out", d.path().to_str().unwrap()]);
        assert!(out.status.success());
        assert_eq!(stdout(&out).lines().count(), 10);
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 10);
    for n in names {
        assert_eq!(std::fs::read(a.path().join(&n)).unwrap(), std::fs::read(b.path().join(&n)).unwrap());
    }
}

#[test]
fn bench_and_eval_on_stored_instances() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    let gen = ceoh(&[
        "gen-instances",
        "--problem",
        "upmp",
        "--seeds",
        "0-4",
        "--lanes",
        "3",
        "--depth",
        "3",
        "--classes",
        "3",
        "--out",
        inst.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    let record = dir.path().join("h.json");
    std::fs::write(&record, serde_json::json!({ "code": "def score_state(state):\n    return 0\n" }).to_string())
        .unwrap();
    let out = ceoh(&[
        "bench",
        "--problem",
        "upmp",
        "--instances",
        inst.to_str().unwrap(),
        "--heuristic",
        "blocking_count",
        "--heuristic",
        "unsorted_lanes_x2",
        "--stored",
        record.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["heuristic"], "blocking_count");
    assert_eq!(rows[0]["instances"], 5);
    assert!(rows[2]["error"].as_str().unwrap().starts_with("UNSUPPORTED"));

    let out =
        ceoh(&["eval", "--problem", "upmp", "--instances", inst.to_str().unwrap(), "--heuristic", "blocking_count"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 7, "{text}");
    assert!(text.lines().last().unwrap().starts_with("fitness: "));

    let out = ceoh(&["bench", "--problem", "spp", "--heuristic", "blocking_count"]);
    assert_eq!(out.status.code(), Some(2));
}
