use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fcomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcomp")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fcomp-test-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn lists_every_scenario_and_builder() {
    let o = fcomp(&["list-examples", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["scenarios"].as_array().unwrap().len(), 11);
    assert!(v["builders"].as_array().unwrap().iter().any(|b| b == "halfline_r2"));
}

#[test]
fn punctured_disk_scenario_passes() {
    let o = fcomp(&["run-example", "ex-3.22", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    let names: Vec<&str> = v["verdicts"].as_array().unwrap().iter().map(|x| x["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["forward_dl", "backward_dl"]);
}

#[test]
fn half_line_scenario_verdicts() {
    let o = fcomp(&["run-example", "ex-3.8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for line in ["forward_cauchy", "alt_cauchy", "extraction_ok"] {
        assert!(text.lines().any(|l| l.contains(line) && l.ends_with(",true")), "{line} missing in\n{text}");
    }
}

#[test]
fn flat_static_is_symmetric() {
    let o = fcomp(&["run-example", "flat-static", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let cone = v["verdicts"].as_array().unwrap().iter().find(|x| x["name"] == "cone_static_symmetric").unwrap();
    assert_eq!(cone["value"], true);
}

#[test]
fn unknown_scenario_is_an_input_error() {
    let o = fcomp(&["run-example", "fig-99"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown scenario"));
}

#[test]
fn failing_verdict_exits_with_one() {
    // Gromov limits of the double chimney sit 2 apart, below 5 * tol here.
    let o = fcomp(&["run-example", "fig-7b", "--tol", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn build_is_reproducible() {
    let (a, b) = (scratch("build-a"), scratch("build-b"));
    for d in [&a, &b] {
        let o = fcomp(&["build", "--space", "halfline_r2", "--out-dir", d.to_str().unwrap()]);
        assert!(o.status.success());
    }
    for f in ["graph.csv", "summary.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    let points: usize = summary.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(points > 100);
}

#[test]
fn strong_wind_spec_is_rejected() {
    let dir = scratch("spec");
    let path = dir.join("space.json");
    let spec = r#"{"kind":"grid","dim":2,"domain":[{"min":0,"max":1},{"min":0,"max":1}],"resolution":[0.25],
        "fields":{"form":"standard","g0":["1","0","1"],"omega":["1.2","0"]}}"#;
    fs::write(&path, spec).unwrap();
    let o = fcomp(&["build", "--space", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let ok = spec.replace("1.2", "0.5");
    fs::write(&path, ok).unwrap();
    assert!(fcomp(&["build", "--space", path.to_str().unwrap()]).status.success());
}

#[test]
fn dist_row_from_a_sample() {
    let o = fcomp(&["dist", "--space", "ladder_fig6", "--from", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("id,x,y,distance"));
    assert_eq!(lines.next().unwrap().split(',').nth(3), Some("0"));
}

#[test]
fn busemann_of_annotated_curve() {
    let o = fcomp(&["busemann", "--space", "chimney2", "--curve", "c3", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["finite"], true);
    assert_eq!(v["kind"]["kind"], "cauchy_type");
    assert_eq!(v["kind"]["class"], "z3");
}

#[test]
fn two_strip_boundary_has_four_pairs() {
    let o = fcomp(&["cboundary", "--space", "double_fig2", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 4);
    assert_eq!(v["simple"], false);
}

#[test]
fn artifacts_are_written_to_out_dir() {
    let dir = scratch("artifacts");
    let o = fcomp(&["run-example", "comb", "--out-dir", dir.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success());
    assert!(dir.join("comb.json").exists());
    assert!(dir.join("comb_details.json").exists());
}
