use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn holesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holesim")).args(args).output().expect("binary runs")
}

fn preset(name: &str) -> String {
    format!("{}/presets/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

fn small_config(dir: &Path) -> PathBuf {
    let text = std::fs::read_to_string(preset("desk")).unwrap().replace("duration_s = 1000", "duration_s = 150");
    let p = dir.join("small.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_twice_gives_identical_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = holesim(&["run", s(&cfg), "--seed", "42", "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("# holesim"));
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().contains(",42,proposed,"));
    let meta = std::fs::read_to_string(dir.path().join("a.meta.toml")).unwrap();
    assert!(meta.contains("seed = 42") && meta.contains("prng"));
}

#[test]
fn sweep_is_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let mut outs = Vec::new();
    for jobs in ["1", "8"] {
        let out = dir.path().join(format!("j{jobs}.csv"));
        let o = holesim(&["sweep", s(&cfg), "--nodes", "40,80", "--seeds", "2", "--jobs", jobs, "--out", s(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outs.push(std::fs::read_to_string(out).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    let rows: Vec<&str> = outs[0].lines().skip(2).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows[0].starts_with("small-n40-f0,1,baseline,40,"));
    assert!(rows[7].starts_with("small-n80-f0,2,proposed,80,"));
}

#[test]
fn trace_is_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let trace = dir.path().join("t.jsonl");
    let o = holesim(&["run", s(&cfg), "--trace", s(&trace)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(trace).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("t").is_some() && v.get("event").is_some());
    }
    assert!(text.lines().last().unwrap().contains("SimEnd"));
}

#[test]
fn invalid_config_exits_with_validation_code_and_lists_problems() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[nodes]\nmobile_fraction = 2\n").unwrap();
    let o = holesim(&["run", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    for key in ["sim.seed", "sim.duration_s", "grid.width", "nodes.count", "mobile_fraction"] {
        assert!(err.contains(key), "{err}");
    }
    let typo = dir.path().join("typo.toml");
    std::fs::write(&typo, "[grid]\nwdth = 3\n").unwrap();
    assert_eq!(holesim(&["run", s(&typo)]).status.code(), Some(1));
    assert_eq!(holesim(&["run", "/nonexistent.toml"]).status.code(), Some(1));
}

#[test]
fn sweep_without_axis_is_rejected() {
    let o = holesim(&["sweep", &preset("desk")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn plot_writes_svg_and_rejects_unknown_metric() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let csv = dir.path().join("s.csv");
    assert!(holesim(&["sweep", s(&cfg), "--nodes", "40,60", "--seeds", "2", "--out", s(&csv)]).status.success());
    let svg = dir.path().join("p.svg");
    let o = holesim(&["plot", s(&csv), "--metric", "avg_energy_j", "--x", "nodes", "--out", s(&svg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("baseline") && text.contains("proposed"));
    let o = holesim(&["plot", s(&csv), "--metric", "nope", "--out", s(&svg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("load_balance"));
}
