use std::process::{Command, Output};

fn widths(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_widths")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let out = widths(&a);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn width_at_n3() {
    let v = json(&["widths", "--h", "1", "--beta", "0", "--n", "3"]);
    let r = &v["rows"][0];
    assert!((r["value"].as_f64().unwrap() - 0.1263636471128838).abs() < 1e-12);
    assert_eq!(r["theta"].as_f64().unwrap(), 0.5);
    assert_eq!(r["valid_E"], true);
    assert_eq!(r["valid_width"], false);
}

#[test]
fn default_command_is_widths() {
    let a = widths(&["--h", "1", "--beta", "1", "--n", "5", "--format", "json"]);
    let b = widths(&["widths", "--h", "1", "--beta", "1", "--n", "5", "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["rows"][0]["theta"].as_f64().unwrap(), 0.0);
}

#[test]
fn ranges_expand_in_order() {
    let v = json(&["widths", "--h", "0.5:1:0.5", "--beta", "0:1:1", "--n", "3:5:2"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let key = |r: &serde_json::Value| (r["h"].as_f64().unwrap(), r["beta"].as_f64().unwrap(), r["n"].as_u64().unwrap());
    assert_eq!(key(&rows[0]), (0.5, 0.0, 3));
    assert_eq!(key(&rows[1]), (0.5, 0.0, 5));
    assert_eq!(key(&rows[7]), (1.0, 1.0, 5));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(widths(&["--h", "-1"]).status.code(), Some(1));
    assert_eq!(widths(&["widths", "--n", "0"]).status.code(), Some(1));
    assert_eq!(widths(&["widths", "--format", "xml"]).status.code(), Some(1));
    assert_eq!(widths(&["nosuch"]).status.code(), Some(1));
    assert_eq!(widths(&["--help"]).status.code(), Some(0));
}

#[test]
fn unreachable_tolerance_exits_3() {
    assert_eq!(widths(&["selfcheck", "--tol", "1e-20"]).status.code(), Some(3));
    assert_eq!(widths(&["verify", "--tol", "1e-20"]).status.code(), Some(3));
}

#[test]
fn thresholds() {
    let r = &json(&["thresholds", "--h", "1"])["rows"][0];
    assert_eq!(r["n_star"], 3);
    assert_eq!(r["n_h"], 81);
    assert_eq!(r["classical_range"], false);
    let r = &json(&["thresholds", "--h", "1.3"])["rows"][0];
    assert_eq!(r["n_star"], 1);
    let r = &json(&["thresholds", "--h", "2", "--beta", "0.5"])["rows"][0];
    assert_eq!(r["classical_range"], true);
}

#[test]
fn verify_certified_points() {
    for args in [
        ["--h", "1", "--beta", "0.5", "--n", "81"],
        ["--h", "2", "--beta", "0", "--n", "3"],
        ["--h", "1", "--beta", "0.5", "--n", "9"],
    ] {
        let mut a = vec!["verify"];
        a.extend(args);
        let v = json(&a);
        let r = &v["rows"][0];
        assert_eq!(r["satisfied"], true, "{args:?}");
        assert_eq!(v["checks"][0]["passed"], true);
        assert!(r["margin"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn verify_failure_exits_2() {
    // below the threshold the sign pattern breaks
    let out = widths(&["verify", "--h", "0.5", "--beta", "0", "--n", "3", "--format", "json"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"][0]["satisfied"], false);
}

#[test]
fn spline_rows() {
    let v = json(&["spline", "--h", "1", "--beta", "0", "--n", "4"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows[0]["derivative"].is_null());
    let sum: f64 = rows[1..].iter().map(|r| r["alpha"].as_f64().unwrap()).sum();
    assert!(sum.abs() < 1e-12);
    let v = json(&["spline", "--n", "4", "--y", "0.1"]);
    assert_eq!(v["rows"][0]["y"].as_f64().unwrap(), 0.1);
}

#[test]
fn sweep_matches_widths() {
    let args = ["--h", "1:2:1", "--beta", "0:0.5:0.5", "--n", "3"];
    let mut s = vec!["sweep"];
    s.extend(args);
    let mut w = vec!["widths"];
    w.extend(args);
    let sv = json(&s);
    let wv = json(&w);
    for (a, b) in sv["rows"].as_array().unwrap().iter().zip(wv["rows"].as_array().unwrap()) {
        assert_eq!(a["value"], b["value"]);
        assert!(a["certified"].is_boolean());
    }
}

#[test]
fn output_is_deterministic() {
    for fmt in ["json", "csv", "text"] {
        let args = ["sweep", "--h", "1:2:0.5", "--beta", "0:1:0.5", "--n", "3:9:3", "--format", fmt];
        let a = widths(&args);
        let b = Command::new(env!("CARGO_BIN_EXE_widths")).args(args).env("WIDTHS_THREADS", "1").output().unwrap();
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{fmt}");
    }
}

#[test]
fn csv_has_header_and_rows() {
    let out = widths(&["widths", "--n", "3:5:1", "--format", "csv"]);
    let s = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("h,beta,n,value,"));
}

#[test]
fn out_writes_file() {
    let dir = std::env::temp_dir().join(format!("widths-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("r.json");
    let out = widths(&["widths", "--n", "3", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "widths");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bad_thread_count() {
    let out = Command::new(env!("CARGO_BIN_EXE_widths")).args(["--n", "3"]).env("WIDTHS_THREADS", "0").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
