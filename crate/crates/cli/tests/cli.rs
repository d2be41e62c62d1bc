use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arena_core::io::{load_state, write_battle_log};
use arena_core::rng::seeded;
use arena_core::simulator::{generate_battles, Strategy, SyntheticWorld};

fn arena(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arena")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_log(dir: &Path, name: &str, strategy: Strategy, budget: usize, seed: u64) -> PathBuf {
    let world = SyntheticWorld::uniform(8, 700.0, 1300.0, 5, 0.05).unwrap();
    let battles = generate_battles(&world, strategy, budget, &mut seeded(seed)).unwrap();
    let path = dir.join(name);
    write_battle_log(&battles.records, File::create(&path).unwrap()).unwrap();
    path
}

/// Data rows of a CSV output: comment lines and the header are dropped.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn rank_writes_leaderboard_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_log(dir.path(), "log.jsonl", Strategy::Uniform, 4_000, 1);
    let snap = dir.path().join("state.snap");
    let out = dir.path().join("board.csv");
    let o = arena(&["rank", s(&log), "--snapshot", s(&snap), "--out", s(&out), "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# arena rank seed=3 config="));
    assert_eq!(lines.next().unwrap(), "rank,model,rating,battles");
    let board = rows(&text);
    assert_eq!(board.len(), 8);
    let ratings: Vec<f64> = board.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(ratings.windows(2).all(|w| w[0] >= w[1]));
    let mean = ratings.iter().sum::<f64>() / 8.0;
    assert!((mean - 1000.0).abs() < 1e-6);

    let state = load_state(&snap).unwrap();
    assert_eq!(state.matrices.total_battles(), 4_000);
    assert!(state.ratings.is_some());
}

#[test]
fn exit_codes_separate_input_and_numerical_failures() {
    let dir = tempfile::tempdir().unwrap();
    let split = dir.path().join("split.jsonl");
    fs::write(
        &split,
        [("a", "b", "a"), ("b", "a", "a"), ("c", "d", "d"), ("d", "c", "c")]
            .iter()
            .enumerate()
            .map(|(t, (a, b, w))| {
                format!("{{\"schema_version\":1,\"timestamp\":{t},\"model_a\":\"{a}\",\"model_b\":\"{b}\",\"winner\":\"{w}\"}}\n")
            })
            .collect::<String>(),
    )
    .unwrap();
    let o = arena(&["rank", s(&split)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("disconnected"));

    let future = dir.path().join("future.jsonl");
    fs::write(&future, "{\"schema_version\":9,\"timestamp\":0,\"model_a\":\"a\",\"model_b\":\"b\",\"winner\":\"a\"}\n").unwrap();
    assert_eq!(arena(&["rank", s(&future)]).status.code(), Some(2));
    assert_eq!(arena(&["rank", s(&dir.path().join("missing.jsonl"))]).status.code(), Some(2));
    assert_eq!(arena(&["rank"]).status.code(), Some(2));

    let corrupt = dir.path().join("bad.snap");
    fs::write(&corrupt, "ARENA-SNAPSHOT v1 sha256=00\n{}\n").unwrap();
    assert_eq!(arena(&["schedule", s(&corrupt)]).status.code(), Some(2));
}

#[test]
fn schedule_is_reproducible_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_log(dir.path(), "log.jsonl", Strategy::Uniform, 3_000, 2);
    let snap = dir.path().join("s.snap");
    assert!(arena(&["rank", s(&log), "--snapshot", s(&snap)]).status.success());

    let draw = |seed: &str| {
        let o = arena(&["schedule", s(&snap), "--k", "3", "--h", "250", "--count", "20", "--seed", seed]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        rows(&stdout(&o))
    };
    let a = draw("7");
    assert_eq!(a, draw("7"));
    assert_ne!(a, draw("8"));
    for set in a.chunk_by(|x, y| x[0] == y[0]) {
        assert!((2..=3).contains(&set.len()));
        let r: Vec<f64> = set.iter().map(|row| row[3].parse().unwrap()).collect();
        for i in 0..r.len() {
            for j in i + 1..r.len() {
                assert!((r[i] - r[j]).abs() < 250.0 || set.len() == 2);
            }
        }
    }
}

#[test]
fn place_runs_a_session_from_results() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_log(dir.path(), "log.jsonl", Strategy::Uniform, 3_000, 3);
    let snap = dir.path().join("s.snap");
    assert!(arena(&["rank", s(&log), "--snapshot", s(&snap)]).status.success());

    let partial = dir.path().join("partial.txt");
    fs::write(&partial, "# first round\n8,2\n").unwrap();
    let o = arena(&["place", s(&snap), "--new-model", "fresh", "--results", s(&partial)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 2);
    assert_eq!((r[0][2].as_str(), r[0][5].as_str(), r[0][6].as_str()), ("4", "1", "4"));
    assert_eq!(r[1][7], "next");

    let full = dir.path().join("full.txt");
    fs::write(&full, "8,2\n3,7\n5,5\n").unwrap();
    let r = rows(&stdout(&arena(&["place", s(&snap), "--new-model", "fresh", "--results", s(&full)])));
    let last = r.last().unwrap();
    assert_eq!(last[7], "finished");
    assert!(last[8].parse::<f64>().is_ok());

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "8,1\n").unwrap();
    assert_eq!(
        arena(&["place", s(&snap), "--new-model", "fresh", "--results", s(&bad)]).status.code(),
        Some(2)
    );
}

#[test]
fn metrics_compares_rating_files() {
    let dir = tempfile::tempdir().unwrap();
    let est = dir.path().join("est.csv");
    let gold = dir.path().join("gold.csv");
    fs::write(&est, "# comment\nmodel,rating\na,1200\nb,1000\nc,900\n").unwrap();
    fs::write(&gold, "rating,model\n1100,c\n1250,a\n1000,b\n").unwrap();
    let o = arena(&["metrics", s(&est), s(&gold)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&stdout(&o));
    assert_eq!(r[0][0], "3");
    let tau: f64 = r[0][2].parse().unwrap();
    assert!((tau - 1.0 / 3.0).abs() < 1e-12);

    let other = dir.path().join("other.csv");
    fs::write(&other, "model,rating\na,1\nb,2\nz,3\n").unwrap();
    assert_eq!(arena(&["metrics", s(&est), s(&other)]).status.code(), Some(2));
}

#[test]
fn bootstrap_reports_reduction_against_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let prox = write_log(dir.path(), "prox.jsonl", Strategy::Proximity { h: 400.0 }, 5_000, 4);
    let unif = write_log(dir.path(), "unif.jsonl", Strategy::Uniform, 5_000, 5);
    let run = || stdout(&arena(&["bootstrap", s(&prox), "--rounds", "20", "--baseline", s(&unif), "--seed", "9"]));
    let text = run();
    assert_eq!(text, run());
    assert!(text.lines().nth(1).unwrap().contains("mean_variance_reduction="));
    let r = rows(&text);
    assert_eq!(r.len(), 8);
    assert!(r.iter().all(|row| row.len() == 8));
}

#[test]
fn disc_fit_reports_transitivity() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_log(dir.path(), "log.jsonl", Strategy::Uniform, 3_000, 6);
    let o = arena(&["disc-fit", s(&log), "--iterations", "3000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().contains("dominant_axis=true"));
    assert_eq!(rows(&text).len(), 8);
}

#[test]
fn simulations_emit_one_row_per_cell() {
    let o = arena(&[
        "simulate", "sweep-threshold", "--models", "20", "--hs", "200,1000", "--budgets", "5000", "--seeds", "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("h,budget,strategy,seed,rmse"));
    assert_eq!(rows(&text).len(), 2 * 2 * 2);

    let o = arena(&["simulate", "sweep-fim", "--models", "20", "--mode", "practical", "--hs", "300,600", "--budgets", "5000", "--seeds", "1"]);
    assert!(o.status.success());
    assert_eq!(rows(&stdout(&o)).len(), 2);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("replay.csv");
    let o = arena(&[
        "simulate", "replay", "--models", "10", "--records", "6000", "--initial-models", "4", "--refit-every", "1000",
        "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let timeline = rows(&fs::read_to_string(&out).unwrap());
    assert!(timeline.len() >= 4);
    assert_eq!(timeline.last().unwrap()[3], "10");
}
