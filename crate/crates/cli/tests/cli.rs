use std::fs;
use std::process::{Command, Output};

fn hiertree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hiertree")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a CSV with a `# check=` line and a header.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(2).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

const ROTATION: &str = r#"{"domain":["00","01","1","2"],"range":["0","10","11","2"],"match":{"00":"0","01":"10","1":"11","2":"2"},"interior":{"":"","0":"1"}}"#;

#[test]
fn sigma_on_t2_brackets_the_critical_value() {
    let o = hiertree(&["sigma", "--family", "preset:t2", "--expect", "0.7071"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("# check=critical_exponent\nlambda,depth,partial_norm,ratio,convergent\n"));
    let last: f64 = rows(&csv).last().unwrap()[0].parse().unwrap();
    assert!((last - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.02);
}

#[test]
fn sigma_far_from_expectation_fails() {
    let o = hiertree(&["sigma", "--expect", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("FAIL critical_exponent"));
}

#[test]
fn cocycle_fuzz_two_hundred_trials() {
    let o = hiertree(&["cocycle-fuzz", "--seed", "1", "--trials", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 200);
    assert!(r.iter().all(|row| row.last().unwrap() == "pass"));
    let o = hiertree(&["cocycle-fuzz", "--family", "freegroup:1,2", "--trials", "50"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn zero_measure_gives_a_zero_column() {
    let o = hiertree(&["norm-table", "--measure", "zero", "--depth", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 6);
    assert!(r.iter().all(|row| row[2] == "0"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["rank-stability", "transform-check", "norm-table"] {
        let a = dir.path().join(format!("{cmd}-a.csv"));
        let b = dir.path().join(format!("{cmd}-b.csv"));
        for p in [&a, &b] {
            let o = hiertree(&[cmd, "--trials", "3", "--lambda", "0.75,0.8", "--seed", "5", "--out", p.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stderr(&o));
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"family":"t3","lambda":"0.3:0.5:0.1","depth":4}"#).unwrap();
    let o = hiertree(&["gram-check", "--config", cfg.to_str().unwrap(), "--depth", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    // Three λ values times depths 1 and 2; T_3 has 17 vertices to depth 2.
    assert_eq!(r.len(), 6);
    assert_eq!(r[1][2], "17");
    assert_eq!(r[2][0], "0.4");
}

#[test]
fn element_file_drives_rank_and_transform_checks() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("rotation.json");
    fs::write(&g, ROTATION).unwrap();
    let o = hiertree(&["rank-stability", "--element", g.to_str().unwrap(), "--lambda", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(rows(&stdout(&o)).iter().all(|r| r[4] == "2"));
    let o = hiertree(&["transform-check", "--element", g.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["check"], "boundary_action");
    assert_eq!(v["rows"][0][5], "false");
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["sigma", "--family", "nope"],
        vec!["gram-check", "--lambda", "1.2"],
        vec!["norm-table", "--format", "xml"],
        vec!["transform-check", "--element", "/nonexistent/g.json"],
        vec!["frobnicate"],
        vec![],
    ] {
        let o = hiertree(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn invalid_element_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("bad.json");
    fs::write(&g, r#"{"domain":["0","1","2"],"range":["0","1","2"],"match":{"0":"1","1":"1","2":"2"}}"#).unwrap();
    let o = hiertree(&["transform-check", "--element", g.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bijection"));
}
