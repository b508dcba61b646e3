use std::process::Command;

use bieberbach_lab::{run, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS};

fn lab(args: &[&str]) -> (i32, String, String) {
    lab_env(args, None)
}

fn lab_env(args: &[&str], threads: Option<&str>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["bieberbach-lab"];
    argv.extend_from_slice(args);
    let code = run(argv, threads.map(String::from), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn records(csv_text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(csv_text.as_bytes()).records().map(|r| r.unwrap()).collect()
}

fn float(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn theorem_on_single_surfaces() {
    let (code, out, _) = lab(&["verify-theorem", "--surface", "plane"]);
    assert_eq!(code, EXIT_PASS);
    let rows = records(&out);
    assert_eq!(rows.len(), 1);
    assert!((float(&rows[0][4]) - 2.0 * std::f64::consts::SQRT_2).abs() <= 1e-12);

    let (code, out, _) = lab(&["verify-theorem", "--surface", "koebe_plane", "--param", "c=1"]);
    assert_eq!(code, EXIT_PASS);
    assert!(float(&records(&out)[0][4]).abs() <= 1e-9);

    let (code, _, _) = lab(&["verify-theorem", "--surface", "helicoid", "--param", "r=0.5", "--mobius", "a=0.4"]);
    assert_eq!(code, EXIT_PASS);
}

#[test]
fn default_battery_has_at_least_a_hundred_passing_cases() {
    let (code, out, err) = lab(&["verify-theorem"]);
    assert_eq!(code, EXIT_PASS, "{err}");
    let rows = records(&out);
    assert!(rows.len() >= 100);
    assert!(rows.iter().all(|r| &r[7] == "true"));
    let ids: Vec<&str> = rows.iter().map(|r| r.get(0).unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn lemma_commands() {
    let (code, out, _) = lab(&["verify-lemma", "--which", "2.1", "--field", "bernoulli", "--param", "a=0.3"]);
    assert_eq!(code, EXIT_PASS);
    let rows = records(&out);
    let closed = rows.iter().find(|r| &r[0] == "lemma21-closed-form-t1").unwrap();
    assert!(float(&closed[6]) <= 1e-7);

    let (code, out, _) = lab(&["verify-lemma", "--which", "2.4", "--surface", "graph", "--seed", "7"]);
    assert_eq!(code, EXIT_PASS);
    let rows = records(&out);
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| float(&r[6]) <= 1e-5));

    let (code, out, _) = lab(&["verify-lemma", "--which", "2.2", "--surface", "plane", "--phi", "half"]);
    assert_eq!(code, EXIT_PASS);
    // 4 / ‖g_z(0)‖ with ‖g_z(0)‖ = ½ · (1/√2).
    assert!((float(&records(&out)[0][4]) - 8.0 * std::f64::consts::SQRT_2).abs() <= 1e-12);

    for args in [
        &["verify-lemma", "--which", "2.1", "--field", "helicoid"][..],
        &["verify-lemma", "--which", "2.1", "--field", "linear", "--param", "n=2"],
        &["verify-lemma", "--which", "2.2", "--surface", "helicoid", "--phi", "mobius"],
        &["verify-lemma", "--which", "2.3", "--surface", "catenoid_patch"],
        &["verify-lemma", "--which", "2.4", "--surface", "helicoid", "--attractor", "tangential"],
    ] {
        let (code, _, err) = lab(args);
        assert_eq!(code, EXIT_PASS, "{args:?}: {err}");
    }
}

#[test]
fn helicoid_scan_table() {
    let (code, out, _) = lab(&["helicoid-scan", "--R", "1,2,4,8"]);
    assert_eq!(code, EXIT_PASS);
    let rows = records(&out);
    assert_eq!(rows.len(), 4);
    for w in rows.windows(2) {
        assert!((float(&w[1][1]) / float(&w[0][1]) - 2.0).abs() <= 1e-12);
    }
    assert!(float(&rows[0][2]).abs() <= 1e-10);

    let (code, out, _) = lab(&["helicoid-scan", "--R", "1,2,4,8", "--format", "json"]);
    assert_eq!(code, EXIT_PASS);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        for key in ["R", "naive_ratio", "geometric_ratio", "slack"] {
            assert!(r[key].is_f64(), "{key}");
        }
    }
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        &["verify-theorem", "--surface", "torus"][..],
        &["verify-theorem", "--surface", "helicoid", "--param", "r"],
        &["verify-theorem", "--surface", "helicoid", "--param", "r=abc"],
        &["verify-theorem", "--surface", "helicoid", "--param", "q=1"],
        &["verify-theorem", "--surface", "helicoid", "--mobius", "a=1.5"],
        &["verify-theorem", "--surface", "graph"],
        &["verify-theorem", "--param", "r=1"],
        &["verify-lemma", "--which", "3.1"],
        &["verify-lemma", "--which", "2.1", "--field", "bernoulli", "--param", "r=1"],
        &["helicoid-scan", "--R", "1,-2"],
        &["helicoid-scan", "--R", "x"],
        &["helicoid-scan"],
        &["verify-theorem", "--tol.unknown=1"],
        &["verify-theorem", "--tol", "slack=-1"],
        &["frobnicate"],
        &[],
    ] {
        let (code, _, err) = lab(args);
        assert_eq!(code, EXIT_CONFIG, "{args:?}");
        assert!(!err.is_empty());
    }
    let (code, _, _) = lab_env(&["verify-theorem", "--surface", "plane"], Some("zero"));
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn tolerance_overrides_apply() {
    let (code, out, _) = lab(&["verify-lemma", "--which", "2.4", "--tol.lemma24=0"]);
    assert_eq!(code, EXIT_FAIL);
    assert!(records(&out).iter().any(|r| &r[7] == "false"));
    let (code, _, _) = lab(&["--tol", "lemma24=1e-3", "verify-lemma", "--which", "2.4"]);
    assert_eq!(code, EXIT_PASS);
}

#[test]
fn help_exits_cleanly() {
    let (code, out, _) = lab(&["--help"]);
    assert_eq!(code, EXIT_PASS);
    assert!(out.contains("verify-theorem"));
}

#[test]
fn output_file_and_process_exit_codes() {
    let dir = std::env::temp_dir().join(format!("bieberbach-lab-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let bin = env!("CARGO_BIN_EXE_bieberbach-lab");
    let status = Command::new(bin)
        .args(["verify-theorem", "--surface", "plane", "--format", "json", "--output"])
        .arg(&path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(doc["command"], "verify-theorem");
    assert_eq!(doc["rows"][0]["pass"], true);
    assert!(doc["rows"][0]["reference_value"].is_null());

    let status = Command::new(bin).args(["verify-theorem", "--surface", "nope"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = Command::new(bin)
        .args(["verify-lemma", "--which", "2.4", "--tol.lemma24=0"])
        .env("BIEBERBACH_LAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn battery_is_reproducible() {
    let a = lab_env(&["verify-theorem", "--seed", "5"], Some("1")).1;
    let b = lab_env(&["verify-theorem", "--seed", "5"], Some("3")).1;
    let c = lab_env(&["verify-theorem", "--seed", "6"], Some("3")).1;
    assert_eq!(a, b);
    assert_ne!(a, c);
}
