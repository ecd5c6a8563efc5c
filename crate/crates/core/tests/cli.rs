use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vecot::demo::{club_pack, nyskohus_scenario, write_nyskohus_corpus};

fn vecot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vecot"))
        .args(args)
        .env_remove("VECOT_API_KEY")
        .env_remove("VECOT_SEARCH_KEY")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = vecot(args);
    assert!(
        out.status.success(),
        "vecot {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: PathBuf) -> Vec<u8> {
    std::fs::read(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

struct Pack {
    _dir: tempfile::TempDir,
    root: PathBuf,
    dataset: PathBuf,
}

fn pack(count: usize) -> Pack {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let dataset = club_pack(count)
        .unwrap()
        .write_replay_pack(&root.join("fixtures"))
        .unwrap();
    Pack {
        _dir: dir,
        root,
        dataset,
    }
}

fn run_args<'a>(p: &'a Pack, out: &'a Path) -> Vec<String> {
    [
        "--task",
        "hotpotqa",
        "--dataset",
        s(&p.dataset),
        "--retriever",
        "dataset",
        "--replay",
        s(&p.root.join("fixtures")),
        "--out",
        s(out),
    ]
    .iter()
    .map(|x| x.to_string())
    .collect()
}

fn run(sub: &[&str], p: &Pack, out: &Path) -> Output {
    let mut args: Vec<String> = sub.iter().map(|x| x.to_string()).collect();
    args.extend(run_args(p, out));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    ok(&refs)
}

#[test]
fn replayed_runs_are_byte_identical() {
    let p = pack(12);
    let (a, b) = (p.root.join("a"), p.root.join("b"));
    for out in [&a, &b] {
        run(&["run", "--seed", "7"], &p, out);
        run(&["ablate", "--seed", "7"], &p, &out.join("ablate"));
        ok(&[
            "density",
            "--results",
            s(&out.join("results.jsonl")),
            "--out",
            s(&out.join("density.csv")),
        ]);
    }
    for file in ["traces.jsonl", "results.jsonl", "density.csv", "ablate/ablation.csv"] {
        let (x, y) = (read(a.join(file)), read(b.join(file)));
        assert!(!x.is_empty(), "{file} is empty");
        assert_eq!(x, y, "{file} differs between replays");
    }
    let traces = String::from_utf8(read(a.join("traces.jsonl"))).unwrap();
    assert_eq!(traces.lines().count(), 12);
    let manifest: serde_json::Value = serde_json::from_slice(&read(a.join("manifest.json"))).unwrap();
    assert_eq!(manifest["seed"], 7);
}

#[test]
fn fixtures_replay_checks_traces() {
    let p = pack(12);
    let first = p.root.join("first");
    run(&["run"], &p, &first);
    let expected = first.join("traces.jsonl");
    run(
        &["fixtures", "replay", "--expected", s(&expected)],
        &p,
        &p.root.join("check"),
    );

    let tampered = p.root.join("tampered.jsonl");
    let text = std::fs::read_to_string(&expected)
        .unwrap()
        .replacen("Portsmere", "Elsewhere", 1);
    std::fs::write(&tampered, text).unwrap();
    let mut args: Vec<String> = ["fixtures", "replay", "--expected", s(&tampered)]
        .iter()
        .map(|x| x.to_string())
        .collect();
    args.extend(run_args(&p, &p.root.join("check2")));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = vecot(&refs);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn baseline_cot_sc_replays_the_same_samples() {
    let p = pack(12);
    let (ve, sc) = (p.root.join("ve"), p.root.join("sc"));
    run(&["run"], &p, &ve);
    run(&["baseline", "--mode", "cot-sc"], &p, &sc);
    let ve_traces = String::from_utf8(read(ve.join("traces.jsonl"))).unwrap();
    let sc_traces = String::from_utf8(read(sc.join("traces.jsonl"))).unwrap();
    for (v, c) in ve_traces.lines().zip(sc_traces.lines()) {
        let vt: serde_json::Value = serde_json::from_str(v).unwrap();
        if vt["edited"] == false {
            assert_eq!(v, c);
        }
    }
}

#[test]
fn opencorpus_replay_uses_local_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let sc = nyskohus_scenario().unwrap();
    let fixtures = dir.path().join("fixtures");
    let dataset = sc.write_replay_pack(&fixtures).unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    write_nyskohus_corpus(&corpus).unwrap();
    let out = dir.path().join("out");
    ok(&[
        "run",
        "--task",
        "hotpotqa",
        "--dataset",
        s(&dataset),
        "--retriever",
        "opencorpus",
        "--corpus",
        s(&corpus),
        "--replay",
        s(&fixtures),
        "--out",
        s(&out),
    ]);
    let row: serde_json::Value = serde_json::from_slice(&read(out.join("results.jsonl"))).unwrap();
    assert_eq!(row["predicted"], "Adelaide City");
    assert_eq!(row["correct"], true);
    assert_eq!(row["edited"], true);
}

#[test]
fn subsample_is_deterministic() {
    let p = pack(12);
    let out = p.root.join("run");
    run(&["run"], &p, &out);
    let results = out.join("results.jsonl");
    let (x, y) = (p.root.join("x.txt"), p.root.join("y.txt"));
    for f in [&x, &y] {
        ok(&[
            "subsample",
            "--results",
            s(&results),
            "--target",
            "4",
            "--seed",
            "3",
            "--out",
            s(f),
        ]);
    }
    assert_eq!(read(x.clone()), read(y));
    assert_eq!(String::from_utf8(read(x)).unwrap().lines().count(), 4);

    let odd = vecot(&[
        "subsample",
        "--results",
        s(&results),
        "--target",
        "3",
        "--out",
        s(&p.root.join("z")),
    ]);
    assert_eq!(odd.status.code(), Some(1));
}

#[test]
fn missing_credential_exits_2() {
    let p = pack(1);
    let out = vecot(&[
        "run",
        "--task",
        "hotpotqa",
        "--dataset",
        s(&p.dataset),
        "--retriever",
        "dataset",
        "--out",
        s(&p.root.join("live")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("VECOT_API_KEY"));
}

#[test]
fn bad_config_exits_1() {
    let p = pack(1);
    let cfg = p.root.join("bad.json");
    std::fs::write(&cfg, r#"{"sampling": {"n_sample": 3}}"#).unwrap();
    let out = vecot(&["run", "--config", s(&cfg), "--out", s(&p.root.join("o"))]);
    assert_eq!(out.status.code(), Some(1));

    let out = vecot(&[
        "run",
        "--task",
        "fever",
        "--dataset",
        s(&p.dataset),
        "--retriever",
        "dataset",
        "--out",
        s(&p.root.join("o2")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
