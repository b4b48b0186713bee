use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SIMPLEX: &str = r#"{"dimension": 2,
  "F": {"kind": "vpolytope", "vertices": [[1,0],[0,1],[-1,-1]]},
  "Omega": {"kind": "points", "points": [[3,0],[0,4]]}}"#;

const HALFPLANE: &str = r#"{"dimension": 2,
  "F": {"kind": "ball", "p": 2, "radius": 1},
  "Omega": {"kind": "halfspaces", "rows": [{"normal": [0,1], "offset": 0}]}}"#;

const TWO_POINTS: &str = r#"{"dimension": 2,
  "F": {"kind": "ball", "p": 2, "radius": 1},
  "Omega": {"kind": "points", "points": [[3,0],[0,4]]},
  "J": {"kind": "table", "entries": [{"point": [3,0], "value": 6}, {"point": [0,4], "value": 0}]}}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infconv")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn gauge_of_a_simplex() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "simplex.json", SIMPLEX);
    let o = run(&["gauge", "--scene", s.to_str().unwrap(), "--point", "2,2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "{\"value\":4}\n");
    let o = run(&["gauge", "--scene", s.to_str().unwrap(), "--point", "-2,-2"]);
    assert_eq!(stdout(&o), "{\"value\":2}\n");
}

#[test]
fn infinite_gauge_prints_as_string() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "ray.json",
        r#"{"dimension": 1, "F": {"kind": "vpolytope", "vertices": [[1],[2]]}, "Omega": {"kind": "points", "points": [[0]]}}"#,
    );
    let o = run(&["gauge", "--scene", s.to_str().unwrap(), "--point", "-1"]);
    assert_eq!(stdout(&o), "{\"value\":\"inf\"}\n");
}

#[test]
fn infconv_with_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "two.json", TWO_POINTS);
    let o = run(&["infconv", "--scene", s.to_str().unwrap(), "--point", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], 4.0);
    let p: Vec<f64> = serde_json::from_value(v["minimizers"][0]["point"].clone()).unwrap();
    assert_eq!(p, [0.0, 4.0]);
    assert_eq!(v["approximate"], false);
    let o = run(&["s0", "--scene", s.to_str().unwrap(), "--point", "3,0"]);
    assert_eq!(stdout(&o), "{\"in_s0\":false}\n");
    let o = run(&["s0", "--scene", s.to_str().unwrap(), "--point", "0,4"]);
    assert_eq!(stdout(&o), "{\"in_s0\":true}\n");
}

#[test]
fn subdiff_polar_failure() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "halfplane.json", HALFPLANE);
    let scene = s.to_str().unwrap();
    let o = run(&["subdiff", "--scene", scene, "--point", "0,0", "--covector", "0,2", "--kind", "frechet:0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("{\"verdict\":\"NonMember\""), "{text}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["rhs"]["verdict"], "NonMember");
    let o = run(&["subdiff", "--scene", scene, "--point", "0,0", "--covector", "0,0.5", "--kind", "holder:2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "Member");
    assert_eq!(v["rhs"]["verdict"], "Member");
}

#[test]
fn emitted_csv() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "simplex.json", SIMPLEX);
    let o = run(&["emit-ball", "--scene", s.to_str().unwrap(), "--resolution", "4"]);
    assert_eq!(stdout(&o), "x,y\n1,0\n6.123233995736766e-17,1\n-0.5,6.123233995736766e-17\n-9.1848509936051497e-17,-0.50000000000000011\n1,0\n");

    let h = write(dir.path(), "halfplane.json", HALFPLANE);
    let o = run(&["emit-subdiff", "--scene", h.to_str().unwrap(), "--point", "0,0", "--resolution", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("angle,radius"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, r) = l.split_once(',').unwrap();
            (a.parse().unwrap(), r.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 4);
    // The set is the segment from 0 to (0, 1).
    assert!((rows[1].1 - 1.0).abs() < 1e-6);
    for i in [0, 2, 3] {
        assert!(rows[i].1 < 1e-6);
    }
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "halfplane.json", HALFPLANE);
    let args = ["subdiff", "--scene", s.to_str().unwrap(), "--point", "-1,0", "--covector", "0.3,0.6", "--kind", "holder:0.5"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "simplex.json", SIMPLEX);
    let scene = s.to_str().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"dimension": 2, "F": {"kind": "ball", "p": 2, "radius": 1}, "Omega": {"kind": "points", "points": [[0,0]]}, "extra": 1}"#,
    );
    let cases: Vec<Vec<&str>> = vec![
        vec!["gauge", "--scene", scene, "--point", "1"],
        vec!["gauge", "--scene", scene, "--point", "1,x"],
        vec!["gauge", "--scene", "/nonexistent/scene.json", "--point", "1,1"],
        vec!["gauge", "--scene", bad.to_str().unwrap(), "--point", "1,1"],
        vec!["subdiff", "--scene", scene, "--point", "3,0", "--covector", "0,0", "--kind", "proximal:1"],
        vec!["subdiff", "--scene", scene, "--point", "3,0", "--covector", "0,0", "--kind", "holder:0"],
        vec!["subdiff", "--scene", scene, "--point", "1,1", "--covector", "0,0", "--kind", "frechet:0"],
        vec!["emit-ball", "--scene", scene, "--resolution", "0"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    let o = run(&["gauge", "--scene", bad.to_str().unwrap(), "--point", "1,1"]);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("extra") && err.contains("line 1"), "{err}");
}

#[test]
fn verify_with_config_and_fault() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"fixtures": ["ray_interval_1d"], "gauge_trials": 500, "covectors": 100}"#);
    let out = dir.path().join("report.jsonl");
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(written, stdout(&o));
    for line in written.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            ["check_id", "counterexamples", "disagreements", "fixture", "trials", "undetermined", "verdict", "worst_gap"]
        );
    }

    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--seed", "3", "--inject-fault", "gauge-radius"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().any(|l| l.contains("\"verdict\":\"fail\"")));

    let empty = write(dir.path(), "empty.json", r#"{"fixtures": []}"#);
    assert_eq!(run(&["verify", "--config", empty.to_str().unwrap()]).status.code(), Some(2));
    let unknown = write(dir.path(), "unknown.json", r#"{"fixtures": ["nope"]}"#);
    assert_eq!(run(&["verify", "--config", unknown.to_str().unwrap()]).status.code(), Some(2));
}
