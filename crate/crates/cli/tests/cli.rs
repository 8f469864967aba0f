use std::process::{Command, Output};

fn cyclo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclo"))
        .args(args)
        .env_remove("CYCLO_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = cyclo(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn poly_text() {
    assert_eq!(stdout(&["poly", "6"]), "1 -1 1\n");
    assert_eq!(stdout(&["poly", "1"]), "-1 1\n");
}

#[test]
fn poly_zero_is_usage_error() {
    let out = cyclo(&["poly", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn poly_csv_and_json_agree() {
    let csv = stdout(&["--format", "csv", "poly", "105"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("degree,coefficient"));
    let from_csv: Vec<(u64, i64)> = lines
        .map(|l| {
            let (d, c) = l.split_once(',').unwrap();
            (d.parse().unwrap(), c.parse().unwrap())
        })
        .collect();
    let json = stdout(&["--format", "json", "poly", "105"]);
    let from_json: Vec<(u64, i64)> = json
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            (
                v["degree"].as_u64().unwrap(),
                v["coefficient"].as_str().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(from_csv.len(), 49);
    assert_eq!(from_csv, from_json);
    assert_eq!(from_csv[7], (7, -2));
}

#[test]
fn heights() {
    assert_eq!(stdout(&["height", "105"]), "2\n");
    assert_eq!(stdout(&["height", "7"]), "1\n");
    assert_eq!(stdout(&["height", "210"]), "2\n");
}

#[test]
fn bounds() {
    assert_eq!(field(&stdout(&["bounds", "3,5,7"]), "bateman"), "3");
    assert_eq!(field(&stdout(&["bounds", "3,5"]), "bateman"), "1");
    assert_eq!(field(&stdout(&["bounds", "3,5,7,11,13"]), "c_k"), "3/8");
    assert!(!cyclo(&["bounds", "3,9"]).status.success());
}

#[test]
fn witness() {
    let text = stdout(&["witness", "3,5,7"]);
    assert_eq!(field(&text, "a"), "2");
    assert!(field(&text, "value").starts_with("5.789636406996412537"));
    assert_eq!(field(&text, "status"), "COPRIME");

    let text = stdout(&["witness", "5,7,11,13"]);
    assert_eq!(field(&text, "status"), "DEGENERATE(gcd=5)");
    assert_eq!(field(&text, "product_value"), "");

    let out = cyclo(&["witness", "3,5,2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cyclo"))
        .args(["witness", "3,5,7"])
        .env("CYCLO_PRECISION", "10")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_cyclo"))
        .args(["witness", "3,5,7"])
        .env("CYCLO_PRECISION", "512")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn scan_rows() {
    let csv = stdout(&["--format", "csv", "scan", "--k", "3", "--pattern", "1,3", "--max", "50"]);
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("timestamp,primes,"));
    let json = stdout(&["--format", "json", "scan", "--k", "2", "--window", "2", "--max", "20"]);
    assert_eq!(json.lines().count(), 4);
}

#[test]
fn scan_warns_on_inadmissible_pattern() {
    let out = cyclo(&["scan", "--k", "3", "--pattern", "1,2", "--max", "100"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("inadmissible"));
}

#[test]
fn scan_store_matches_structured_output() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("records.jsonl");
    let json = stdout(&[
        "--format",
        "json",
        "scan",
        "--k",
        "2",
        "--window",
        "2",
        "--max",
        "100",
        "--timestamp",
        "7",
        "--store",
        store.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read_to_string(&store).unwrap(), json);
}

#[test]
fn asympt() {
    let csv = stdout(&[
        "--format",
        "csv",
        "asympt",
        "--pattern",
        "1,3",
        "--selector",
        "growth_ratio",
        "--count",
        "20",
        "--min",
        "10000",
    ]);
    let ratios: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 20);
    assert!(ratios.iter().all(|r| (r - 0.01075).abs() < 1e-4));

    let empty = stdout(&["--format", "csv", "asympt", "--pattern", "1,3", "--selector", "growth_ratio", "--count", "0"]);
    assert_eq!(empty.lines().count(), 1);

    let out = cyclo(&["asympt", "--pattern", "1,3", "--selector", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_suites() {
    assert!(stdout(&["verify", "--suite", "identity", "--max-n", "300"]).starts_with("PASS 300/300"));
    assert!(stdout(&["verify", "--suite", "bounds", "--max-n", "2000"]).starts_with("PASS"));
    assert!(stdout(&["verify", "--suite", "witness", "--max-n", "20000"]).starts_with("PASS"));
    let out = cyclo(&["verify", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn deterministic_output() {
    let args = ["--format", "csv", "witness", "11,13,17"];
    assert_eq!(stdout(&args), stdout(&args));
}
