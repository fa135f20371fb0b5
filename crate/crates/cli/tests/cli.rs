mod common;

use std::net::TcpListener;

use serde_json::{json, Value};

use common::{command, fixture, run, stderr, stdout, Server};

fn path_str(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn catalog_list_filters() {
    let out = run(&["catalog", "list", "--dimension", "functional"]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<String> = stdout(&out).lines().map(str::to_string).collect();
    assert!(lines[0].starts_with("ID"));
    assert_eq!(lines.len(), 1 + 11);

    let out = run(&["catalog", "list", "--layer", "DL", "--dimension", "functional", "--format", "json"]);
    let ids: Vec<String> = serde_json::from_slice::<Vec<Value>>(&out.stdout)
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap().to_string())
        .collect();
    assert!(ids.contains(&"data-storing".to_string()));
    assert!(!ids.contains(&"data-visualization".to_string()));

    let all = run(&["catalog", "list", "--format", "json"]);
    assert_eq!(serde_json::from_slice::<Vec<Value>>(&all.stdout).unwrap().len(), 27);
    assert_eq!(run(&["catalog", "list", "--format", "json"]).stdout, all.stdout);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["catalog", "list", "--layer", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["catalog", "list", "--dimension", "both"]).status.code(), Some(2));
    assert_eq!(run(&["rank"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn alternate_catalog_via_flag_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let custom = dir.path().join("catalog.json");
    std::fs::write(
        &custom,
        json!({"schema_version": 1, "criteria": [{"id": "latency", "name": "Latency",
            "dimension": "non-functional", "description": "d",
            "questions": [{"id": "latency-q1", "text": "fast?", "layers": ["PL"]}]}]})
        .to_string(),
    )
    .unwrap();
    let out = run(&["--catalog", path_str(&custom), "catalog", "list", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(serde_json::from_slice::<Value>(&out.stdout).unwrap()[0]["id"], "latency");

    let out = command(&["catalog", "list"])
        .env("PLATFORM_RATER_CATALOG", &custom)
        .output()
        .unwrap();
    assert!(stdout(&out).contains("latency"));

    let lint = run(&["--catalog", path_str(&custom), "catalog", "lint", "--format", "json"]);
    assert_eq!(lint.status.code(), Some(0));
    assert!(stdout(&lint).contains("MC7"));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"schema_version\": 1, \"criteria\": [").unwrap();
    assert_eq!(
        run(&["--catalog", path_str(&broken), "catalog", "list"]).status.code(),
        Some(3)
    );
    let invalid = dir.path().join("invalid.json");
    std::fs::write(
        &invalid,
        json!({"schema_version": 1, "criteria": [{"id": "x", "name": "X",
            "dimension": "functional", "description": "d", "questions": []}]})
        .to_string(),
    )
    .unwrap();
    let out = run(&["--catalog", path_str(&invalid), "catalog", "list"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("MC8"));
    assert_eq!(
        run(&["--catalog", "/nonexistent/catalog.json", "catalog", "list"]).status.code(),
        Some(3)
    );
}

#[test]
fn assess_report_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("report.csv");
    let layers = dir.path().join("layers.csv");
    let project = fixture("rose-project.json");
    let out = run(&[
        "assess", "report", "--project", path_str(&project),
        "--out", path_str(&csv), "--layers-out", path_str(&layers), "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["project_version"], 16);

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("criterion_id,raw,normalized,coverage"));
    let normalized: Vec<(String, f64)> = rows
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[2].parse().unwrap())
        })
        .collect();
    let want = [
        ("resource-discovery", 0.6667),
        ("data-accumulation", 1.0),
        ("security", 0.5),
        ("interoperability", 0.5),
    ];
    assert_eq!(normalized.len(), 4);
    for ((id, got), (wid, w)) in normalized.iter().zip(want) {
        assert_eq!(id, wid);
        assert!((got - w).abs() < 1e-4);
    }
    assert!(std::fs::read_to_string(&layers).unwrap().starts_with("layer,score,coverage\nUL,"));

    // byte-stable
    let again = dir.path().join("again.csv");
    run(&["assess", "report", "--project", path_str(&project), "--out", path_str(&again)]);
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn assess_report_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut project: Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("rose-project.json")).unwrap()).unwrap();

    let empty = dir.path().join("empty.json");
    let mut e = project.clone();
    e["responses"] = json!([]);
    std::fs::write(&empty, e.to_string()).unwrap();
    let out = run(&["assess", "report", "--project", path_str(&empty), "--out", path_str(&dir.path().join("e.csv"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("e.csv")).unwrap(),
        "criterion_id,raw,normalized,coverage\n"
    );

    let malformed = dir.path().join("malformed.json");
    std::fs::write(&malformed, "{\"id\": \"rose\",").unwrap();
    assert_eq!(run(&["assess", "report", "--project", path_str(&malformed)]).status.code(), Some(3));
    assert_eq!(
        run(&["assess", "report", "--project", "/no/such/file.json"]).status.code(),
        Some(3)
    );

    project["responses"][0]["rating"] = json!(9);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, project.to_string()).unwrap();
    assert_eq!(run(&["assess", "report", "--project", path_str(&bad)]).status.code(), Some(1));

    project["responses"][0]["rating"] = json!(4);
    project["selected_criteria"] = json!(["security"]);
    std::fs::write(&bad, project.to_string()).unwrap();
    let out = run(&["assess", "report", "--project", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not selected"), "{}", stderr(&out));
}

#[test]
fn rank_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let out_json = dir.path().join("result.json");
    let out_csv = dir.path().join("result.csv");
    let input = fixture("worked-example.json");
    let out = run(&[
        "rank", "--input", path_str(&input), "--out", path_str(&out_json),
        "--csv", path_str(&out_csv), "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let result: Value = serde_json::from_slice(&out.stdout).unwrap();
    let order: Vec<&str> = result["ranking"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["platform"].as_str().unwrap())
        .collect();
    assert_eq!(order, ["AWS", "IBM", "Azure"]);
    assert_eq!(std::fs::read(&out_json).unwrap(), out.stdout);
    assert!(stderr(&out).contains("warning: matrix criteria"));
    let csv = std::fs::read_to_string(&out_csv).unwrap();
    assert!(csv.starts_with("platform,composite_weight,rank\nAWS,"));

    let table = run(&["rank", "--input", path_str(&input)]);
    assert!(stdout(&table).lines().nth(1).unwrap().contains("AWS"));
}

#[test]
fn rank_single_criterion_is_that_criterions_priorities() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("one.json");
    std::fs::write(
        &input,
        json!({"criteria": ["security"], "criteria_judgments": [], "platforms": ["AWS", "IBM", "Azure"],
               "platform_judgments": {"security": [
                   {"i": "AWS", "j": "IBM", "value": 4}, {"i": "AWS", "j": "Azure", "value": 6},
                   {"i": "IBM", "j": "Azure", "value": 3}]}})
        .to_string(),
    )
    .unwrap();
    let out = run(&["rank", "--input", path_str(&input), "--format", "json"]);
    let result: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        result["composite"]["weights"],
        result["platform_priorities"]["security"]["weights"]
    );
}

#[test]
fn rank_reports_missing_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let mut input: Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("worked-example.json")).unwrap()).unwrap();
    input["platform_judgments"]["security"].as_array_mut().unwrap().pop();
    let path = dir.path().join("incomplete.json");
    std::fs::write(&path, input.to_string()).unwrap();
    let out = run(&["rank", "--input", path_str(&path), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(
        stderr(&out).contains("[platforms/security] missing judgment for pair (IBM, Azure)"),
        "{}",
        stderr(&out)
    );

    std::fs::write(&path, "[1, 2").unwrap();
    assert_eq!(run(&["rank", "--input", path_str(&path)]).status.code(), Some(3));
    std::fs::write(&path, "{\"criteria\": 5}").unwrap();
    assert_eq!(run(&["rank", "--input", path_str(&path)]).status.code(), Some(1));
}

#[test]
fn serve_binds_ephemeral_port_and_answers() {
    let data = tempfile::tempdir().unwrap();
    let server = Server::start(data.path());
    assert_ne!(server.addr.port(), 0);
    let (status, _, body) = server.request("GET", "/api/catalog/criteria?dimension=functional", None);
    assert_eq!(status, 200);
    assert_eq!(serde_json::from_str::<Vec<Value>>(&body).unwrap().len(), 11);
    let (status, _, body) = server.request("GET", "/", None);
    assert_eq!(status, 200);
    assert!(body.contains("<html"));
    let (status, _, _) = server.request("GET", "/api/catalog/criteria?layer=XX", None);
    assert_eq!(status, 422);
    assert!(data.path().join("single-assessment").is_dir());
}

#[test]
fn serve_on_occupied_port_exits_3() {
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let data = tempfile::tempdir().unwrap();
    let out = run(&["serve", "--port", &port, "--data", path_str(data.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("cannot bind"));
}

#[test]
fn serve_defaults_to_port_8080() {
    // Whether or not this listener gets 8080, the server cannot, and the
    // error names the address it tried.
    let _hold = TcpListener::bind("127.0.0.1:8080");
    let data = tempfile::tempdir().unwrap();
    let out = run(&["serve", "--data", path_str(data.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("127.0.0.1:8080"), "{}", stderr(&out));

    let out = command(&["serve", "--data", path_str(data.path())])
        .env("PLATFORM_RATER_PORT", "8080")
        .output()
        .unwrap();
    assert!(stderr(&out).contains("127.0.0.1:8080"));
}
