use std::process::{Command, Output};

fn psea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psea")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn snf_prints_singular_numbers() {
    let out = psea(&["snf", "--p", "2", "--d", "3", "--matrix", "[[2,3],[4,6]]"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["sn"], serde_json::json!([3, 0]));
}

#[test]
fn formulas_are_exact() {
    let out = psea(&["formulas", "stay", "--r", "3", "--N", "4", "--len", "1", "--t", "1/2"]);
    assert_eq!(json(&out)["prob"], "4/5");
    let out = psea(&["formulas", "cn", "--kind", "iid-haar", "--N", "2", "--p", "2", "--d", "1", "--r", "1"]);
    assert_eq!(json(&out)["exact"], "32/9");
    let out = psea(&["formulas", "lowest-pmf", "--t", "0.5", "--T", "1", "--from", "-40", "--to", "40"]);
    let total: f64 = json(&out).as_array().unwrap().iter().map(|r| r["p"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn stochastic_commands_require_seed() {
    let out = psea(&["sample", "--kind", "iid-haar", "--N", "2", "--p", "2", "--d", "1"]);
    assert!(!out.status.success());
    let out = psea(&["sea", "--mode", "finite", "--t", "0.5", "--T", "1", "--init", "[1,0]"]);
    assert!(!out.status.success());
}

#[test]
fn sea_trajectory_and_histogram() {
    let args = ["sea", "--mode", "edge", "--t", "0.5", "--T", "1", "--d", "2", "--init", "[2,2,1,1,0,0]", "--seed", "3"];
    let a = psea(&args);
    let b = psea(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# {"));
    assert_eq!(text.lines().nth(1), Some("time,index,new_value"));
    let h = psea(&["sea", "--mode", "finite", "--t", "0.5", "--T", "1", "--init", "[1,0]", "--samples", "50", "--seed", "1"]);
    let text = String::from_utf8(h.stdout).unwrap();
    let counts: u64 = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(counts, 50);
}

#[test]
fn gen_prob_two_state() {
    let out = psea(&[
        "gen-prob", "--d", "1", "--t", "1/2", "--N", "0",
        "--from", r#"{"offset":2,"window":[1,0],"left":"inf","right":"-inf"}"#,
        "--to", r#"{"offset":2,"window":[1,1],"left":"inf","right":"-inf"}"#,
        "--T", "1",
    ]);
    assert!(out.status.success());
    let p = json(&out)["prob"].as_f64().unwrap();
    assert!((p - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
}

#[test]
fn edge_converge_writes_report() {
    let dir = std::env::temp_dir().join(format!("psea-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("edge.json");
    let out = psea(&[
        "edge-converge", "--kind", "fixed-sn", "--lambda", "1,0,0", "--p", "2", "--d", "2",
        "--init", "2,1,0", "--T", "0.5,1", "--samples", "300", "--seed", "9",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(2), "{out:?}");
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(r["reference"], "generator");
    assert_eq!(r["config"]["seed"], 9);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bad_input_exits_one() {
    let out = psea(&["snf", "--p", "4", "--d", "2", "--matrix", "[[1]]"]);
    assert_eq!(out.status.code(), Some(1));
    let out = psea(&["bulk-converge", "--kind", "iid-haar", "--N", "4", "--p", "2", "--d", "1", "--r", "9", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
}
