use std::path::Path;
use std::process::{Command, Output};

const EXAMPLE: &str = "1/16,1/6,1/4,1/8,7/24";

fn coupon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coupon"))
        .args(args)
        .env_remove("COUPON_MODE")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

#[test]
fn tail_csv_matches_golden() {
    let out = coupon(&["tail", "--p", EXAMPLE, "--c", "5", "--kmax", "20", "--mode", "exact"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text, golden("tail_example_c5.csv"));
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "k,tail");
    for k in 0..5 {
        assert_eq!(rows[k + 1], format!("{k},1/1"));
    }
}

#[test]
fn flatten_traces_match_golden() {
    let out = coupon(&["flatten", "--p", EXAMPLE, "--schedule", "4:5,2:5,1:3,5:3", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), golden("flatten_schedule.csv"));
    assert!(stdout(&out).contains("\"1/16,1/6,1/4,43/240,19/80\""));
    let out = coupon(&["flatten", "--p", EXAMPLE, "--format", "csv"]);
    assert_eq!(stdout(&out), golden("flatten_default.csv"));
}

#[test]
fn pmf_csv_columns() {
    let out = coupon(&["pmf", "--p", "0.5,0.5", "--c", "2", "--kmax", "3"]);
    assert_eq!(stdout(&out), "k,tail,pmf\n1,1/1,0/1\n2,1/2,1/2\n3,1/4,1/4\n");
    let out = coupon(&["pmf", "--p", "0.5,0.5", "--c", "2", "--k", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn json_record_echoes_input_exactly() {
    let out = coupon(&["tail", "--p", "1/3,0.25", "--c", "1", "--k", "2", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["command"], "tail");
    assert_eq!(v["args"]["p"], "1/3,0.25");
    assert_eq!(v["mode"], "exact");
    assert_eq!(v["input_sha256"].as_str().unwrap().len(), 64);
    // p_0 = 5/12, so Pr{T_1 > 2} = 25/144
    let point = &v["result"]["points"][0];
    assert_eq!(point["k"], 2);
    assert_eq!(point["tail"]["numerator"], "25");
    assert_eq!(point["tail"]["denominator"], "144");
}

#[test]
fn mode_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_coupon"))
        .args(["tail", "--p", "0.5,0.5", "--c", "2", "--kmax", "2"])
        .env("COUPON_MODE", "float")
        .output()
        .unwrap();
    assert_eq!(stdout(&out), "k,tail\n0,1\n1,1\n2,0.5\n");
    // the flag wins over the environment
    let out = Command::new(env!("CARGO_BIN_EXE_coupon"))
        .args(["tail", "--p", "0.5,0.5", "--c", "2", "--kmax", "2", "--mode", "exact"])
        .env("COUPON_MODE", "float")
        .output()
        .unwrap();
    assert_eq!(stdout(&out), "k,tail\n0,1/1\n1,1/1\n2,1/2\n");
}

#[test]
fn methods_agree_on_output() {
    let base = ["tail", "--p", EXAMPLE, "--c", "3", "--kmax", "12", "--method"];
    let closed = coupon(&[&base[..], &["closed-form"]].concat());
    let rec = coupon(&[&base[..], &["recurrence"]].concat());
    let dp = coupon(&[&base[..], &["oracle-dp"]].concat());
    assert!(closed.status.success());
    assert_eq!(closed.stdout, rec.stdout);
    assert_eq!(closed.stdout, dp.stdout);
}

#[test]
fn almost_uniform_input() {
    let out = coupon(&["tail", "--n", "3", "--v0", "1/4", "--c", "1", "--k", "2"]);
    assert_eq!(stdout(&out), "k,tail\n2,1/16\n");
    // large n stays feasible through the layer formula
    let out = coupon(&["tail", "--n", "200", "--c", "150", "--k", "100"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "k,tail\n100,1/1\n");
}

#[test]
fn moments_output() {
    let out = coupon(&["moments", "--p", "0.7", "--c", "1", "--format", "csv"]);
    assert_eq!(stdout(&out), "quantity,value,truncation_bound\nexpectation,10/7,\nsecond_moment,130/49,\nvariance,30/49,\n");
}

#[test]
fn exit_codes() {
    // malformed rational: position reported, exit 1
    let out = coupon(&["tail", "--p", "1/2,1/x", "--c", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte 6"));
    // mass above one
    assert_eq!(coupon(&["tail", "--p", "0.6,0.6", "--c", "1"]).status.code(), Some(1));
    // c out of range
    assert_eq!(coupon(&["tail", "--p", "0.5", "--c", "2"]).status.code(), Some(1));
    // unknown flag
    assert_eq!(coupon(&["tail", "--p", "0.5", "--c", "1", "--bogus"]).status.code(), Some(1));
    // schedule not straddling the target
    assert_eq!(coupon(&["flatten", "--p", EXAMPLE, "--schedule", "1:4"]).status.code(), Some(1));
    // enumeration cap
    let many = vec!["1/40"; 30].join(",");
    assert_eq!(coupon(&["tail", "--p", &many, "--c", "28", "--kmax", "3"]).status.code(), Some(2));
    // scan beyond the feasible size
    assert_eq!(coupon(&["scan", "--n", "9", "--c", "3"]).status.code(), Some(2));
    // help is not an error
    assert_eq!(coupon(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_suite_passes() {
    let out = coupon(&["verify", "--suite", "theorem5", "--nmax", "4", "--kmax", "12", "--seed", "7", "--samples", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["result"][0]["failed"], 0);
    assert_eq!(coupon(&["verify", "--suite", "theorem9"]).status.code(), Some(1));
}

#[test]
fn scan_reports_without_counterexample() {
    let out = coupon(&["scan", "--n", "3", "--c", "2", "--resolution", "8", "--kmax", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["result"]["samples"], 56);
    assert!(v["result"]["counterexample"].is_null());
}

#[test]
fn out_file_and_iceberg_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "version = 1\nrounds = 500\nseed = 4\n\n[[router]]\nname = \"flat\"\nc = 2\nweights = [\"1/4\", \"1/4\", \"1/4\"]\n\n[[router]]\nname = \"skew\"\nc = 2\nweights = [0.1, 0.25, 0.4]\n",
    )
    .unwrap();
    let out_path = dir.path().join("report.csv");
    let out = coupon(&[
        "iceberg",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("flat,3,2,1/4,500,0,"));

    let out = coupon(&["iceberg", "--config", config.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v["result"]["comparison"]["rows"].as_array().unwrap();
    assert_eq!(rows[0]["minimizer"], true);
    assert_eq!(rows[1]["minimizer"], false);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "version = 3\nrounds = 1\nseed = 1\n").unwrap();
    assert_eq!(coupon(&["iceberg", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn simulate_is_seeded() {
    let args = ["simulate", "--p", "0.3,0.5", "--c", "2", "--reps", "2000", "--seed", "3", "--kmax", "5"];
    let a = coupon(&args);
    let b = coupon(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = coupon(&["simulate", "--p", "0.3,0.5", "--c", "2", "--reps", "2000", "--seed", "4", "--kmax", "5"]);
    assert_ne!(a.stdout, c.stdout);
}
