use std::path::Path;
use std::process::{Command, Output};

use gibbs_partitions::combinatorics::PartitionShape;
use gibbs_partitions::eppf::{pd_v_weights, Eppf, VTableDocument};

fn gibbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gibbs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[derive(Debug, serde::Deserialize)]
struct Row {
    shape: String,
    blocks: usize,
    multiplicity: f64,
    probability: f64,
    log_probability: f64,
}

fn csv_rows(text: &str) -> Vec<Row> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn ewens_pair_table() {
    let o = gibbs(&["eppf", "--model", "pd", "--alpha", "0", "--theta", "1", "--n", "2"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].shape, "2");
    assert_eq!(rows[1].shape, "1,1");
    for r in &rows {
        assert!((r.probability - 0.5).abs() < 1e-15);
        assert!((r.log_probability - 0.5f64.ln()).abs() < 1e-15);
    }
}

#[test]
fn single_element_json() {
    let o = gibbs(&["eppf", "--model", "pd", "--alpha", "0.5", "--theta", "0.5", "--n", "1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"][0]["shape"], "1");
    assert_eq!(v["rows"][0]["probability"], 1.0);
    assert_eq!(v["total"], 1.0);
}

#[test]
fn generalized_gamma_table_sums_to_one() {
    let o = gibbs(&["eppf", "--model", "gg", "--alpha", "0.5", "--delta", "1", "--zeta", "1", "--n", "4"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 5);
    let total: f64 = rows.iter().map(|r| r.multiplicity * r.probability).sum();
    assert!((total - 1.0).abs() < 1e-6);
}

#[test]
fn fisher_zero_probability_is_minus_infinity() {
    let o = gibbs(&["eppf", "--model", "fisher", "--alpha", "-1", "--m", "2", "--n", "3", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let last = &v["rows"][2];
    assert_eq!(last["shape"], "1,1,1");
    assert_eq!(last["probability"], 0.0);
    assert_eq!(last["log_probability"], "-inf");
}

#[test]
fn csv_round_trip_reproduces_normalization() {
    let args = ["eppf", "--model", "pd", "--alpha", "0.3", "--theta", "2", "--n", "7"];
    let rows = csv_rows(&stdout(&gibbs(&args)));
    let model = pd_v_weights(0.3, 2.0, 7).unwrap();
    let mut parsed = 0.0;
    let mut direct = 0.0;
    for r in &rows {
        let shape: PartitionShape = r.shape.parse().unwrap();
        assert_eq!(shape.k(), r.blocks);
        let p = model.eppf(&shape).unwrap();
        assert_eq!(r.probability, p);
        parsed += r.multiplicity * r.probability;
        direct += shape.set_partition_count() * p;
    }
    assert_eq!(parsed, direct);
    assert!((parsed - 1.0).abs() < 1e-10);

    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&gibbs(&json_args))).unwrap();
    assert_eq!(v["total"].as_f64().unwrap(), direct);
}

#[test]
fn trivial_samples() {
    let o = gibbs(&["sample", "--model", "pd", "--alpha", "0", "--theta", "1", "--n", "1", "--count", "5", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().all(|l| l.ends_with(",{{1}},1")));
}

#[test]
fn fisher_samples_have_at_most_m_blocks() {
    let o = gibbs(&["sample", "--model", "fisher", "--alpha", "-1", "--m", "2", "--n", "6", "--count", "1000", "--seed", "1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.len(), 1000);
    for s in &v {
        let shape: PartitionShape = s["shape"].as_str().unwrap().parse().unwrap();
        assert!(shape.k() <= 2);
    }
}

#[test]
fn samples_depend_only_on_seed() {
    let args = ["sample", "--model", "gg", "--alpha", "0.5", "--delta", "1", "--zeta", "1", "--n", "9", "--count", "200", "--seed", "42"];
    let a = stdout(&gibbs(&args));
    assert_eq!(a, stdout(&gibbs(&args)));
    let mut other = args.to_vec();
    *other.last_mut().unwrap() = "43";
    assert_ne!(a, stdout(&gibbs(&other)));
}

#[test]
fn histogram_matches_eppf_table() {
    #[derive(serde::Deserialize)]
    struct H {
        shape: String,
        count: u64,
    }
    let count = 1_000_000;
    let o = gibbs(&["sample", "--model", "pd", "--alpha", "0.5", "--theta", "0.5", "--n", "5", "--count", &count.to_string(), "--seed", "5", "--histogram"]);
    assert_eq!(code(&o), 0);
    let hist: Vec<H> = csv::Reader::from_reader(stdout(&o).as_bytes())
        .deserialize()
        .map(|r| r.unwrap())
        .collect();
    let table = csv_rows(&stdout(&gibbs(&["eppf", "--model", "pd", "--alpha", "0.5", "--theta", "0.5", "--n", "5"])));
    assert_eq!(hist.len(), table.len());
    for (h, t) in hist.iter().zip(&table) {
        assert_eq!(h.shape, t.shape);
        let p = t.multiplicity * t.probability;
        let se = (p * (1.0 - p) / count as f64).sqrt();
        assert!((h.count as f64 / count as f64 - p).abs() < 4.0 * se, "{}", h.shape);
    }
}

fn write_table(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("pd.json");
    let o = gibbs(&["eppf", "--model", "pd", "--alpha", "0.4", "--theta", "1.5", "--n", "6", "--table-out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    path
}

#[test]
fn table_export_import() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_table(dir.path());
    let doc = VTableDocument::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc.n, 7);
    assert_eq!(doc.alpha, 0.4);

    let from_table = gibbs(&["eppf", "--table-in", path.to_str().unwrap(), "--n", "6"]);
    let direct = gibbs(&["eppf", "--model", "pd", "--alpha", "0.4", "--theta", "1.5", "--n", "6"]);
    assert_eq!(code(&from_table), 0);
    assert_eq!(stdout(&from_table), stdout(&direct));

    let o = gibbs(&["verify", "--table-in", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);

    // the table only reaches n = 7
    let o = gibbs(&["eppf", "--table-in", path.to_str().unwrap(), "--n", "9"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn corrupted_table_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_table(dir.path());
    let mut doc = VTableDocument::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    doc.rows[4][2] = "0.25".into();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, doc.to_json().unwrap()).unwrap();
    let report = dir.path().join("report.json");
    let o = gibbs(&["verify", "--table-in", bad.to_str().unwrap(), "--output", report.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let recursion = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"].as_str().unwrap().contains("recursion"))
        .unwrap();
    assert_eq!(recursion["passed"], false);
}

#[test]
fn suite_filter() {
    let o = gibbs(&["verify", "--suite", "tilting", "--n", "3"]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["schema_version"], 1);
    let checks = r["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        let name = c["name"].as_str().unwrap();
        assert!(!name.contains("recursion") && !name.contains("sampler"), "{name}");
        assert!(c["anchor"].as_str().is_some_and(|a| !a.is_empty()));
    }

    let o = gibbs(&["verify", "--suite", "gibbs", "--n", "4", "--count", "20000", "--format", "text"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("recursion") && !text.contains("tilt invariance"));
}

#[test]
fn usage_errors() {
    for args in [
        vec!["eppf", "--model", "pd", "--alpha", "0.5", "--n", "3"],
        vec!["eppf", "--model", "pd", "--alpha", "1.5", "--theta", "1", "--n", "3"],
        vec!["eppf", "--model", "fisher", "--alpha", "-1", "--m", "0", "--n", "3"],
        vec!["eppf", "--model", "gg", "--alpha", "0.5", "--delta", "-1", "--zeta", "1", "--n", "3"],
        vec!["eppf", "--model", "pd", "--alpha", "0", "--theta", "1", "--n", "0"],
        vec!["eppf", "--model", "nope", "--n", "3"],
        vec!["eppf", "--n", "3"],
        vec!["eppf", "--table-in", "/nonexistent/table.json", "--n", "3"],
        vec!["sample", "--model", "pd", "--alpha", "0", "--theta", "1", "--n", "3", "--bogus"],
        vec!["eppf", "--model", "gg", "--alpha", "0.5", "--delta", "1", "--zeta", "1", "--n", "3", "--abs-tol", "0"],
    ] {
        let o = gibbs(&args);
        assert_eq!(code(&o), 2, "{args:?}");
    }
}

#[test]
fn numerical_failure() {
    // a relative tolerance below machine precision cannot be met
    let o = gibbs(&["eppf", "--model", "gg", "--alpha", "0.5", "--delta", "1", "--zeta", "1", "--n", "3", "--rel-tol", "1e-17"]);
    assert_eq!(code(&o), 3);
}
