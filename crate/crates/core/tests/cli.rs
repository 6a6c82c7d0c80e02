use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sliceplan::io::{parse_scenario, scenario_to_json, PlanDocument};
use sliceplan::{fixtures, Scenario};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sliceplan"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn fixture_files_match_builtin_fixtures() {
    let cases: [(&str, Scenario<f64>); 4] = [
        ("tiny.json", fixtures::tiny()),
        ("tiny_q5.json", fixtures::tiny_q5()),
        ("urllc_fix.json", fixtures::urllc_fix()),
        ("two_tiny.json", fixtures::two_tiny()),
    ];
    for (name, builtin) in cases {
        let on_disk = std::fs::read_to_string(fixture(name)).unwrap();
        let parsed: Scenario<f64> = parse_scenario(&on_disk).unwrap();
        assert_eq!(parsed, builtin, "{name}");
        assert_eq!(scenario_to_json(&builtin), on_disk, "{name}");
    }
}

#[test]
fn validate_exit_codes() {
    let ok = run(&["validate", p(&fixture("tiny.json"))]);
    assert_eq!(code(&ok), 0, "{}", text(&ok.stderr));
    assert_eq!(code(&run(&["validate", "--exact", p(&fixture("tiny.json"))])), 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let json = scenario_to_json(&fixtures::tiny()).replacen("\"2\": \"5\"", "\"2\": \"2.5\"", 1);
    std::fs::write(&bad, json).unwrap();
    let out = run(&["validate", p(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(text(&out.stdout).contains("Eq3"), "{}", text(&out.stdout));

    let mut value: serde_json::Value = serde_json::from_str(&scenario_to_json(&fixtures::tiny())).unwrap();
    value["pairs"][0].as_object_mut().unwrap().remove("costs");
    std::fs::write(&bad, value.to_string()).unwrap();
    let out = run(&["validate", p(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(text(&out.stdout).contains("STRUCT") || text(&out.stderr).contains("STRUCT"));

    std::fs::write(&bad, "{\n  \"layers\": [,]\n}").unwrap();
    let out = run(&["validate", p(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(text(&out.stderr).contains("line 2"), "{}", text(&out.stderr));

    assert_eq!(code(&run(&["validate", p(&dir.path().join("missing.json"))])), 2);
}

#[test]
fn solve_exit_codes_and_plans() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");

    let out = run(&["solve", p(&fixture("tiny.json")), "--out", p(&plan)]);
    assert_eq!(code(&out), 0, "{}", text(&out.stderr));
    let doc = PlanDocument::parse(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    assert_eq!(doc.objective, Some(7.0));

    let exact = dir.path().join("exact.json");
    assert_eq!(
        code(&run(&[
            "solve",
            p(&fixture("tiny.json")),
            "--exact",
            "--out",
            p(&exact)
        ])),
        0
    );
    assert_eq!(std::fs::read(&plan).unwrap(), std::fs::read(&exact).unwrap());

    let out = run(&[
        "solve",
        p(&fixture("tiny_q5.json")),
        "--method",
        "exhaustive",
        "--out",
        p(&plan),
    ]);
    assert_eq!(code(&out), 3);
    let doc = PlanDocument::parse(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    assert!(doc.slices.is_empty());
    assert_eq!(doc.infeasible.len(), 1);

    let out = run(&[
        "solve",
        p(&fixture("tiny.json")),
        "--node-limit",
        "0",
        "--out",
        p(&plan),
    ]);
    assert_eq!(code(&out), 4);
    let doc = PlanDocument::parse(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    assert!(doc.limit.is_some());
}

#[test]
fn sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let tiny = fixture("tiny.json");

    let out = run(&[
        "sweep",
        p(&tiny),
        "--dim",
        "tenant-control-floor",
        "--slice",
        "1",
        "--values",
        "0.8",
        "--out",
        p(&csv_path),
    ]);
    assert_eq!(code(&out), 0, "{}", text(&out.stderr));
    let body = std::fs::read_to_string(&csv_path).unwrap();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    let cost = headers.iter().position(|h| h == "optimal_cost").unwrap();
    assert_eq!(rows[0][cost].parse::<f64>().unwrap(), 8.0);

    let out = run(&[
        "sweep",
        p(&tiny),
        "--dim",
        "isolation-floor",
        "--slice",
        "1",
        "--values",
        "7",
        "--out",
        p(&csv_path),
    ]);
    assert_eq!(code(&out), 2);

    let out = run(&[
        "sweep",
        p(&tiny),
        "--dim",
        "isolation-floor",
        "--slice",
        "9",
        "--out",
        p(&csv_path),
    ]);
    assert_eq!(code(&out), 2);

    let out = run(&[
        "sweep",
        p(&tiny),
        "--dim",
        "frontier",
        "--slice",
        "1",
        "--out",
        p(&csv_path),
    ]);
    assert_eq!(code(&out), 0);
    let body = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(body.lines().count(), 3, "{body}");
}

#[test]
fn report_formats() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let tiny = fixture("tiny.json");
    assert_eq!(code(&run(&["solve", p(&tiny), "--out", p(&plan)])), 0);

    let out = run(&["report", p(&tiny), "--plan", p(&plan), "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", text(&out.stderr));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["sections"].as_array().unwrap().len(), 8);

    let out = run(&["report", p(&tiny), "--plan", p(&plan)]);
    assert_eq!(code(&out), 0);
    assert!(!out.stdout.is_empty());

    let infeasible = dir.path().join("q5.json");
    run(&["solve", p(&fixture("tiny_q5.json")), "--out", p(&infeasible)]);
    let out = run(&["report", p(&fixture("tiny_q5.json")), "--plan", p(&infeasible)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn presets_lists_slice_types() {
    let out = run(&["presets"]);
    assert_eq!(code(&out), 0);
    let stdout = text(&out.stdout);
    for t in ["eMBB", "mMTC", "URLLC"] {
        assert!(stdout.contains(t), "{stdout}");
    }
}
