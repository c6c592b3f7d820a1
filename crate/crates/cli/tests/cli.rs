use std::path::PathBuf;
use std::process::{Command, Output};

use qsys::output::{parse_csv, parse_json, Cell, OutputRecord};

fn qsys(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsys"))
        .args(args)
        .env_remove("QSYS_WORKERS")
        .output()
        .expect("binary runs")
}

fn ok_csv(args: &[&str]) -> OutputRecord {
    let out = qsys(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    parse_csv(&String::from_utf8(out.stdout).unwrap(), "").unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn col(rec: &OutputRecord, name: &str) -> Vec<f64> {
    let i = rec.column(name).unwrap_or_else(|| panic!("no column {name}"));
    rec.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect()
}

fn temp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("qsys-cli-{}-{name}", std::process::id()))
}

#[test]
fn sample_fixed_size_is_ascending() {
    let rec = ok_csv(&["sample", "--process", "syst-binomial", "--n", "10", "--r", "5", "--seed", "1"]);
    assert_eq!(rec.columns, ["replicate_id", "point_index", "x"]);
    let x = col(&rec, "x");
    assert_eq!(x.len(), 10);
    assert!(x.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn sample_systematic_spacing() {
    let rec = ok_csv(&["sample", "--process", "systematic", "--c", "0.1", "--seed", "7"]);
    let x = col(&rec, "x");
    assert_eq!(x.len(), 10);
    assert!(x.windows(2).all(|w| (w[1] - w[0] - 0.1).abs() < 1e-12));
}

#[test]
fn sample_syst_poisson_mean_size() {
    let rec = ok_csv(&[
        "sample", "--process", "syst-poisson", "--r", "30", "--lambda", "300", "--seed", "1", "--replicates", "1000",
    ]);
    let mean = rec.rows.len() as f64 / 1000.0;
    assert!((mean - 10.0).abs() < 0.1, "{mean}");
}

#[test]
fn csv_and_json_round_trip() {
    let out = qsys(&["sample", "--process", "syst-binomial", "--n", "5", "--r", "0.7", "--replicates", "20"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(parse_csv(&text, "qsys-sample/1").unwrap().to_csv().unwrap(), text);
    let out = qsys(&["sample", "--process", "binomial", "--n", "4", "--format", "json"]);
    let rec = parse_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rec.schema_version, "qsys-sample/1");
    assert_eq!(rec.rows.len(), 4);
}

#[test]
fn inconsistent_flags_are_usage_errors() {
    let o = qsys(&["sample", "--process", "systematic", "--c", "0.1", "--n", "3", "--r", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--n, --r"), "{}", stderr(&o));
    let o = qsys(&["sample", "--process", "syst-binomial", "--n", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--r"));
    let o = qsys(&["sample", "--process", "syst-binomial", "--n", "3", "--r", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qsys(&["sample", "--process", "triangle"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn density_curves() {
    let rec = ok_csv(&["density", "--process", "syst-poisson", "--r", "1", "--lambda", "10", "--resolution", "20"]);
    assert_eq!(rec.columns, ["h", "pi2"]);
    assert!(col(&rec, "pi2").iter().all(|v| (v - 100.0).abs() < 1e-9));

    let rec = ok_csv(&[
        "density", "--process", "syst-binomial", "--n", "10", "--r", "2", "--x", "0.4", "--resolution", "10",
    ]);
    let i = col(&rec, "y").iter().position(|&y| y == 0.4).unwrap();
    assert_eq!(col(&rec, "pi2")[i], 0.0);

    let rec = ok_csv(&["density", "--process", "syst-binomial", "--n", "10", "--r", "2", "--order", "1"]);
    assert!(col(&rec, "pi").iter().all(|&v| v == 10.0));

    let o = qsys(&["density", "--process", "syst-binomial", "--n", "10", "--r", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qsys(&["density", "--process", "systematic", "--c", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

fn summary_row(rec: &OutputRecord) -> &Vec<Cell> {
    let last = rec.rows.last().unwrap();
    assert_eq!(last[0], Cell::Text("summary".into()));
    last
}

#[test]
fn estimate_constant_expression() {
    let rec = ok_csv(&[
        "estimate", "--process", "syst-binomial", "--n", "30", "--r", "2", "--function", "expr", "--expr", "3.0",
        "--replicates", "5",
    ]);
    assert_eq!(rec.rows.len(), 6);
    let mean = rec.column("mean_hat").unwrap();
    let syg = rec.column("var_hat_syg").unwrap();
    for row in &rec.rows {
        assert_eq!(row[mean], Cell::Float(3.0));
        assert_eq!(row[syg], Cell::Float(0.0));
    }
}

#[test]
fn estimate_bad_expression_lists_grammar() {
    let o = qsys(&[
        "estimate", "--process", "syst-binomial", "--n", "30", "--r", "2", "--function", "expr", "--expr", "sin(x",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("atom   :="), "{}", stderr(&o));
    let o = qsys(&["estimate", "--process", "binomial", "--n", "3", "--function", "h", "--expr", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn estimate_rmse_matches_reference() {
    for (f, want) in [("h", 2.89), ("h-folded", 2.94)] {
        let rec = ok_csv(&[
            "estimate", "--process", "syst-binomial", "--n", "30", "--r", "2", "--function", f, "--replicates",
            "10000", "--seed", "11",
        ]);
        let rmse = summary_row(&rec)[rec.column("rmse").unwrap()].as_f64().unwrap();
        assert!((rmse - want).abs() / want < 0.03, "{f}: {rmse}");
    }
}

#[test]
fn simulate_rmse_table() {
    let rec = ok_csv(&["simulate", "--table", "1", "--seed", "42"]);
    let want = [4.01, 2.89, 2.17, 1.63, 1.09, 0.99, 0.91, 0.82];
    let keys = ["r=1", "r=2", "r=4", "r=8", "r=30", "r=50", "r=100", "systematic"];
    let rmse = &rec.rows[0];
    assert_eq!(rmse[0], Cell::Text("rmse".into()));
    for (k, w) in keys.iter().zip(want) {
        let v = rmse[rec.column(k).unwrap()].as_f64().unwrap();
        assert!((v - w).abs() / w < 0.03, "{k}: {v}");
    }
}

#[test]
fn simulate_coverage_table() {
    let rec = ok_csv(&["simulate", "--table", "5", "--seed", "42"]);
    assert_eq!(rec.rows.len(), 4);
    assert_eq!(rec.columns.len(), 9);
    let r = col(&rec, "r");
    let i = r.iter().position(|&v| v == 2.0).unwrap();
    let c = col(&rec, "n=30_coverage")[i];
    assert!((c - 0.9385).abs() <= 0.01, "{c}");
}

#[test]
fn simulate_variance_table_smoke() {
    let rec = ok_csv(&["simulate", "--table", "2", "--replicates", "100"]);
    assert_eq!(rec.rows.len(), 5);
    assert_eq!(rec.columns.len(), 1 + 4 * 5);
    assert!(col(&rec, "n=30_true_var").iter().all(|v| v.is_finite() && *v > 0.0));
}

const CONFIG: &str = r#"{
  "schema": "qsys-config/1",
  "spec_grid": [
    {"kind": "syst-binomial", "n": 20, "r": 3},
    {"kind": "syst-poisson", "r": 2, "lambda": 40}
  ],
  "function": {"user-supplied": "x^2 + sin(2*pi*x)"},
  "replicates": 500,
  "master_seed": 3,
  "outputs": ["rmse", "coverage"]
}"#;

#[test]
fn simulate_config_is_worker_invariant() {
    let path = temp("cfg.json");
    std::fs::write(&path, CONFIG).unwrap();
    let p = path.to_str().unwrap();
    let a = qsys(&["simulate", "--config", p, "--workers", "1"]);
    let b = qsys(&["simulate", "--config", p, "--workers", "8"]);
    let c = Command::new(env!("CARGO_BIN_EXE_qsys"))
        .args(["simulate", "--config", p])
        .env("QSYS_WORKERS", "3")
        .output()
        .unwrap();
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let rec = parse_csv(&String::from_utf8(a.stdout).unwrap(), "").unwrap();
    assert_eq!(rec.rows.len(), 2);
    let target = col(&rec, "target_mean")[0];
    assert!((target - 1.0 / 3.0).abs() < 1e-12);
    std::fs::remove_file(path).ok();
}

#[test]
fn simulate_config_errors_name_the_field() {
    let path = temp("bad.json");
    std::fs::write(&path, CONFIG.replace("\"replicates\": 500", "\"replicates\": 0")).unwrap();
    let o = qsys(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`replicates`"), "{}", stderr(&o));
    std::fs::remove_file(path).ok();
    let o = qsys(&["simulate"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qsys(&["simulate", "--table", "6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_suites() {
    for suite in ["renewal", "densities"] {
        let o = qsys(&["validate", "--suite", suite]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
        assert!(String::from_utf8_lossy(&o.stdout).contains("0 failed"));
    }
    let o = qsys(&["validate", "--suite", "equivalence"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}
