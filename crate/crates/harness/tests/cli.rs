use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use waso_core::fixtures::{example_graph, greedy_trap};
use waso_core::io::{load_graph, write_edge_list, write_scores, LoadOptions};
use waso_core::SocialGraph;

fn waso(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waso")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn save(dir: &Path, name: &str, g: &SocialGraph) {
    fs::write(dir.join(format!("{name}.edges")), write_edge_list(g)).unwrap();
    fs::write(dir.join(format!("{name}.scores")), write_scores(g)).unwrap();
}

#[test]
fn brute_force_on_the_example() {
    let dir = tempfile::tempdir().unwrap();
    save(dir.path(), "ex", &example_graph());
    let out = waso(&["solve", "--graph", "ex.edges", "--scores", "ex.scores", "--k", "5", "--algo", "brute"], dir.path());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["willingness"].as_f64().unwrap() - 9.7).abs() < 1e-9);
    assert_eq!(v["labels"], serde_json::json!(["v3", "v4", "v5", "v6", "v7"]));
    assert_eq!(v["connected"], true);
    assert_eq!(v["breakdown"]["members"].as_array().unwrap().len(), 5);
}

#[test]
fn greedy_and_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    save(dir.path(), "trap", &greedy_trap());
    let out = waso(
        &["solve", "--graph", "trap.edges", "--scores", "trap.scores", "--k", "3", "--algo", "dgreedy", "--format", "csv"],
        dir.path(),
    );
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "node,label,interest,social");
    assert_eq!(lines.len(), 4);
    // interest 10 + 5 + 6, ties 2 + 4
    let total: f64 = lines[1..]
        .iter()
        .map(|l| l.split(',').skip(2).map(|x| x.parse::<f64>().unwrap()).sum::<f64>())
        .sum();
    assert_eq!(total, 27.0);
}

#[test]
fn seeded_solve_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    save(dir.path(), "ex", &example_graph());
    let args = ["solve", "--graph", "ex.edges", "--scores", "ex.scores", "--k", "4", "--budget", "200", "--stages", "3", "--seed", "11"];
    assert_eq!(stdout(&waso(&args, dir.path())), stdout(&waso(&args, dir.path())));
}

#[test]
fn scenario_and_lp_export() {
    let dir = tempfile::tempdir().unwrap();
    save(dir.path(), "ex", &example_graph());
    let scenario = r#"{"kind": "couple-merge", "params": {"pairs": [[2, 3]]}}"#;
    let out = waso(
        &[
            "solve", "--graph", "ex.edges", "--scores", "ex.scores", "--k", "4", "--algo", "brute",
            "--scenario", scenario, "--export-lp", "model.lp",
        ],
        dir.path(),
    );
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    // four slots, one of them the merged couple: five people
    assert_eq!(v["k"], 4);
    assert_eq!(v["members"].as_array().unwrap().len(), 5);
    let lp = fs::read_to_string(dir.path().join("model.lp")).unwrap();
    assert!(lp.contains("Maximize") && lp.trim_end().ends_with("End"));

    fs::write(dir.path().join("sep.json"), r#"{"kind": "separate-groups", "params": {}}"#).unwrap();
    let out = waso(
        &["solve", "--graph", "ex.edges", "--scores", "ex.scores", "--k", "3", "--algo", "brute", "--scenario", "@sep.json"],
        dir.path(),
    );
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["members"].as_array().unwrap().len(), 3);
    assert_eq!(v["samples"], Value::Null);
}

#[test]
fn errors_exit_nonzero_with_a_code() {
    let dir = tempfile::tempdir().unwrap();
    save(dir.path(), "ex", &example_graph());
    let out = waso(&["solve", "--graph", "ex.edges", "--scores", "ex.scores", "--k", "11"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error [invalid_argument]"));

    let out = waso(&["solve", "--graph", "missing.edges", "--k", "3"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error [io_error]"));

    fs::write(dir.path().join("bad.edges"), "1 2 x\n").unwrap();
    let out = waso(&["solve", "--graph", "bad.edges", "--k", "2"], dir.path());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error [parse_error]"));

    let out = waso(&["solve", "--graph", "ex.edges", "--k", "3", "--algo", "nope"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn synth_writes_a_loadable_graph() {
    let dir = tempfile::tempdir().unwrap();
    let out = waso(&["synth", "--nodes", "120", "--topology", "er", "--degree", "4", "--seed", "7", "--out", "g"], dir.path());
    stdout(&out);
    let g = load_graph(&dir.path().join("g.edges"), Some(&dir.path().join("g.scores")), LoadOptions::default()).unwrap();
    assert_eq!(g.n(), 120);
    let max = (0..g.n()).map(|v| g.interest(v)).fold(f64::MIN, f64::max);
    assert_eq!(max, 1.0);

    let out = waso(&["synth", "--nodes", "10", "--beta", "0.5", "--out", "h"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn bench_writes_the_spec_output() {
    let dir = tempfile::tempdir().unwrap();
    save(dir.path(), "ex", &example_graph());
    fs::write(
        dir.path().join("spec.json"),
        r#"{"graph": {"file": {"edges": "ex.edges", "scores": "ex.scores"}}, "axis": "k",
            "values": [3, 5], "solvers": ["brute", "dgreedy"], "output": "out.csv"}"#,
    )
    .unwrap();
    let out = waso(&["bench", "--spec", "spec.json", "--summary"], dir.path());
    stdout(&out);
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().any(|l| l.starts_with("5,brute,0,0,9.7")));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dgreedy"));
}
