use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn hues(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hues")).args(args).output().unwrap()
}

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn board_validate_reports_problems() {
    let ok = hues(&["board", "validate", s(&fixture("synthetic_board.csv"))]);
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("ok: 480 cells"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    let text = std::fs::read_to_string(fixture("synthetic_board.csv")).unwrap();
    std::fs::write(&bad, text.lines().take(200).collect::<Vec<_>>().join("\n")).unwrap();
    let out = hues(&["board", "validate", s(&bad)]);
    assert!(!out.status.success());
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("missing cell G20"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn synth_matches_fixture_and_stimuli_render() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("board.csv");
    assert!(hues(&["board", "synth", "--out", s(&csv)]).status.success());
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(fixture("synthetic_board.csv")).unwrap());

    let stim = dir.path().join("stim");
    assert!(hues(&["board", "stimuli", "--board", s(&csv), "--out", s(&stim), "--size", "8"]).status.success());
    assert_eq!(std::fs::read_dir(&stim).unwrap().count(), 480);
    assert!(stim.join("B7.png").exists());
}

#[test]
fn eval_then_export_diagram() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let anchors = format!("mock:{}", s(&fixture("mock_anchors.json")));
    let run = hues(&[
        "eval",
        "--board",
        s(&fixture("synthetic_board.csv")),
        "--words",
        s(&fixture("words.txt")),
        "--provider",
        &anchors,
        "--humans",
        s(&fixture("humans.jsonl")),
        "--out",
        s(&out),
        "--permutations",
        "200",
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("mismatches:"));
    assert!(dir.path().join("report.csv").exists());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["words"].as_array().unwrap().len(), 34);
    assert!(report["words"][0]["permutation_p_value"].is_number());

    assert!(hues(&["export-diagram", "--report", s(&out)]).status.success());
    let csv = std::fs::read_to_string(dir.path().join("report.diagram.csv")).unwrap();
    assert!(csv.starts_with("word,kind,label,grid_row,grid_col,x,y,weight"));
    assert!(dir.path().join("report.diagram.json").exists());
}

#[test]
fn provider_failure_writes_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let out = dir.path().join("r.json");
    let run = hues(&[
        "eval",
        "--board",
        s(&fixture("synthetic_board.csv")),
        "--provider",
        &format!("http://127.0.0.1:{port}"),
        "--humans",
        s(&fixture("humans.jsonl")),
        "--out",
        s(&out),
    ]);
    assert!(!run.status.success());
    assert!(!out.exists());
    let partial: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("r.partial.json")).unwrap()).unwrap();
    assert_eq!(partial["complete"], false);
}

#[test]
fn insufficient_humans_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let humans = dir.path().join("h.jsonl");
    std::fs::write(&humans, r#"{"subject":"a","word":"SEA","row":1,"col":1}"#).unwrap();
    let words = dir.path().join("w.txt");
    std::fs::write(&words, "SEA\n").unwrap();
    let run = hues(&[
        "eval",
        "--board",
        s(&fixture("synthetic_board.csv")),
        "--words",
        s(&words),
        "--provider",
        &format!("mock:{}", s(&fixture("mock_anchors.json"))),
        "--humans",
        s(&humans),
        "--out",
        s(&dir.path().join("r")),
    ]);
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("at least 2"));
}
