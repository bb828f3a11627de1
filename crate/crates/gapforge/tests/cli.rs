use std::path::Path;
use std::process::{Command, Output};

fn gapforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapforge")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn certify_good_box_exits_zero() {
    let o = gapforge(&["certify", "--family", "box", "--D", "2", "--L", "1", "--d", "4", "--r", "1", "--mode", "good"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("verdict: certified-gapped"), "{s}");
    assert!(s.contains("margin"));
}

#[test]
fn invalid_configuration_exits_two() {
    let o = gapforge(&["certify", "--family", "box", "--d", "1", "--r", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("local dimension d: 1 >= 2"));
    let o = gapforge(&["certify", "--family", "chain1d", "--L", "4", "--d", "2", "--r", "1", "--mode", "cap:2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gapforge(&["certify", "--d", "2", "--r", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_with_overrides_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"family":"chain1d","L":5,"d":3,"r":2,"mode":"haar","trials":4,"seed":3,"checks":["certify","exact-gap","entropy"]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let args = ["ff-check", "--config", cfg.to_str().unwrap(), "--r", "1", "--out", out.to_str().unwrap()];
    let o = gapforge(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("min kernel dim"));
    for f in ["report.json", "trials.csv", "hist_gamma3.svg", "hist_gap.svg", "hist_pq_max.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("trial,verdict,gamma3"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["r"], 1);
    assert_eq!(report["summary"]["ff"]["kernel_lower_bound"], "144");
    let first = std::fs::read(out.join("report.json")).unwrap();
    assert_eq!(gapforge(&args).status.code(), Some(0));
    assert_eq!(std::fs::read(out.join("report.json")).unwrap(), first);
}

#[test]
fn zpoly_reports_exact_rationals() {
    let o = gapforge(&["zpoly", "--family", "chain1d", "--L", "3", "--d", "2", "--r", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["coefficients"], serde_json::json!([1, 2]));
    assert_eq!(v["qsat"]["z_value"], "1/2");
    assert_eq!(v["qsat"]["kernel_lower_bound"], "4");
    assert_eq!(v["positivity"]["pmax"], "1/4");
}

#[test]
fn sample_writes_graph_and_frames() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = gapforge(&[
        "sample", "--family", "honeycomb", "--L", "2", "--d", "3", "--r", "2", "--trials", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(Path::new(out).join("samples.json")).unwrap()).unwrap();
    assert_eq!(v["graph"]["boundary"], "periodic");
    assert_eq!(v["graph"]["edges"].as_array().unwrap().len(), 12);
    let frames = v["assignments"][1]["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 3);
    assert_eq!(frames[0]["data"].as_array().unwrap().len(), 18);
}

#[test]
fn knabe_and_entropy_subcommands() {
    let o = gapforge(&["knabe", "--family", "chain1d", "--L", "5", "--d", "3", "--r", "2", "--mode", "good", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("violations 0"));
    let o = gapforge(&["entropy", "--family", "chain1d", "--L", "4", "--d", "2", "--r", "1", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("trial 1: S = "));
}
