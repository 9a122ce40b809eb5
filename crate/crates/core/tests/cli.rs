use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_chaos-certs"));
    c.current_dir(env!("CARGO_MANIFEST_DIR")).env_remove("CHAOS_CERTS_PRECISION");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json report")
}

const UNIT: [&str; 4] = ["--theta", "0.5", "--phi-p-norm", "1"];

fn with<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(tail).copied().collect()
}

#[test]
fn constants_report_has_bundle_and_bounds() {
    let o = run(&with(&["constants"], &with(&UNIT, &["--optimize", "rate"])));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    assert_eq!(r["command"], "constants");
    assert_eq!(r["passed"], true);
    assert!(r["bundles"][0]["admissible"].as_bool().unwrap());
    let quantities: Vec<&str> = r["rows"].as_array().unwrap().iter().map(|x| x["quantity"].as_str().unwrap()).collect();
    for s in ["correlation bound", "clt error at", "ldp bound", "lln threshold"] {
        assert!(quantities.iter().any(|x| x.starts_with(s)), "missing {s} in {quantities:?}");
    }
    assert!(r.get("wall_clock_seconds").is_none());
}

#[test]
fn timing_is_opt_in() {
    let o = run(&["toral", "--d", "1", "--timing"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn csv_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let args = with(
        &["constants"],
        &with(&UNIT, &["--epsilon", "0.1", "--z0", "1.001", "--format", "csv", "--out", path.to_str().unwrap()]),
    );
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["section", "quantity", "theoretical", "observed", "deviation", "tolerance", "verdict"]
    );
    let verdicts: Vec<String> = rdr.records().map(|r| r.unwrap()[6].to_string()).collect();
    assert!(!verdicts.is_empty());
    assert!(verdicts.iter().all(|v| ["pass", "info", "vacuous"].contains(&v.as_str())));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cases: [&[&str]; 6] = [
        &["renewal-verify", "--theta", "0.5", "--phi-p-norm", "1", "--paths", "5000", "--kmax", "1000", "--seed", "7"],
        &["shift", "--model", "models/twostate.json", "--trials", "500", "--seed", "3", "verify", "--n-max", "20", "--horizon", "8"],
        &["shift", "--model", "models/twostate.json", "--trials", "500", "--seed", "3", "clt", "--n", "64"],
        &["shift", "--model", "models/coin.json", "--trials", "500", "--seed", "3", "ldp", "--n", "50", "--u", "0.3"],
        &["shift", "--model", "models/twostate.json", "--trials", "10", "--seed", "3", "lln", "--horizon", "200"],
        &["toral", "--d", "2", "--format", "csv"],
    ];
    for args in cases {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn seed_changes_monte_carlo_rows_only() {
    let base = ["shift", "--model", "models/twostate.json", "--trials", "500"];
    let a = json(&run(&with(&base, &["--seed", "1", "clt", "--n", "64"])));
    let b = json(&run(&with(&base, &["--seed", "2", "clt", "--n", "64"])));
    assert_eq!(a["bundles"], b["bundles"]);
    assert_ne!(a["rows"], b["rows"]);
    assert_eq!(a["seeds"]["monte_carlo"], 1);
}

#[test]
fn one_block_toral_report_matches_golden_file() {
    let o = run(&["toral", "--d", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/toral_d1.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &o.stdout).unwrap();
    }
    let expected = std::fs::read(&golden).expect("golden file present");
    assert!(o.stdout == expected, "report differs from {}", golden.display());
}

#[test]
fn three_block_report_carries_the_quoted_ledger() {
    let o = run(&["toral", "--d", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    let ledger = r["ledger"].as_array().unwrap();
    let find = |q: &str| ledger.iter().find(|e| e["quantity"] == q).unwrap_or_else(|| panic!("no {q}"));
    assert_eq!(find("clt leading coefficient")["quoted"], "357.15265e56");
    assert!(find("ldp linear coefficient")["relative_deviation"].as_f64().unwrap() > 0.0);
    let labels: Vec<&str> = r["bundles"].as_array().unwrap().iter().map(|b| b["label"].as_str().unwrap()).collect();
    assert!(labels.len() >= 2, "{labels:?}");
}

#[test]
fn precision_from_flag_and_environment() {
    let o = run(&["toral", "--d", "1", "--precision", "80"]);
    assert_eq!(json(&o)["precision_digits"], 80);
    let o = bin().args(["toral", "--d", "1"]).env("CHAOS_CERTS_PRECISION", "90").output().unwrap();
    assert_eq!(json(&o)["precision_digits"], 90);
    let o = bin().args(["toral", "--d", "1"]).env("CHAOS_CERTS_PRECISION", "lots").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_input_exits_with_two() {
    let o = run(&["constants", "--theta", "1.5", "--phi-p-norm", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("theta"));

    let o = run(&["constants", "--theta", "abc", "--phi-p-norm", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`theta`"), "{}", stderr(&o));

    let o = run(&["toral", "--matrix", "no/such/file.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_str().unwrap().to_string()
    };

    let model = write("model.json", r#"{"alphabet_size": 2, "depth": "one", "theta": 0.5, "log_weights": {}}"#);
    let o = run(&["shift", "--model", &model, "verify"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`model.depth`"), "{}", stderr(&o));

    let obs = write("obs.json", r#"{"depth": 0, "values": {"0": 1, "1": "x"}, "center": true}"#);
    let o = run(&["shift", "--model", "models/twostate.json", "--observable", &obs, "verify"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`observable.values.1`"), "{}", stderr(&o));

    let m = write("m.json", r#"{"dimension": 2, "rows": [[2, 1], [1, 1.5]]}"#);
    let o = run(&["toral", "--matrix", &m]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`matrix.rows[1][1]`"), "{}", stderr(&o));
}

#[test]
fn unsupported_models_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("obs.json");
    std::fs::write(&obs, r#"{"depth": 0, "values": {"0": 1, "1": 0}, "center": false}"#).unwrap();
    let o = run(&["shift", "--model", "models/twostate.json", "--observable", obs.to_str().unwrap(), "verify"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nonzero mean"));

    let m = dir.path().join("m.json");
    std::fs::write(&m, r#"{"dimension": 2, "rows": [[1, 1], [0, 1]]}"#).unwrap();
    let o = run(&["toral", "--matrix", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_verdict_exits_with_one() {
    // an unattainable identity tolerance turns one verdict into a failure
    let o = run(&with(&["renewal-verify"], &with(&UNIT, &["--paths", "1000", "--kmax", "1000", "--tol", "1e-30"])));
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    assert_eq!(r["passed"], false);
    assert!(r["rows"].as_array().unwrap().iter().any(|x| x["verdict"] == "fail"));

    // a non-hyperbolic symmetric unimodular matrix
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(&m, r#"{"dimension": 2, "rows": [[0, 1], [1, 0]]}"#).unwrap();
    let o = run(&["toral", "--matrix", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn matrix_file_equals_family_member() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(&m, r#"{"dimension": 2, "rows": [[10, 7], [7, 5]]}"#).unwrap();
    let a = json(&run(&["toral", "--matrix", m.to_str().unwrap()]));
    let b = json(&run(&["toral", "--d", "1"]));
    assert_eq!(a["passed"], true);
    let spectrum = |r: &serde_json::Value| {
        r["rows"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|x| x["section"] == "spectrum" && x["quantity"].as_str().unwrap().starts_with("lambda"))
            .cloned()
            .collect::<Vec<_>>()
    };
    assert_eq!(spectrum(&a), spectrum(&b));
}
