use std::path::Path;
use std::process::{Command, Output};

fn qgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgeom")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Header and numeric rows of a CSV table; text cells become NaN.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect()).collect();
    (header, rows)
}

fn summary(text: &str, key: &str) -> f64 {
    let prefix = format!("# {key},");
    text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("no {key}")).parse().unwrap()
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn qubit_sweep_metric_column_is_constant() {
    let o = qgeom(&["sweep", "--model", "qubit", "--grid", "0:3.141592653589793:9,0:0:1", "--kind", "fs"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = parse_csv(&stdout(&o));
    assert_eq!(rows.len(), 9);
    let g00 = col(&h, "g.00");
    let g11 = col(&h, "g.11");
    for r in &rows {
        assert!((r[g00] - 0.25).abs() < 1e-8);
        assert!((r[g11] - 0.25 * r[0].sin().powi(2)).abs() < 1e-8);
    }
    let c01 = col(&h, "curv.re.01");
    assert!(rows.iter().all(|r| (r[c01] - 0.5 * r[0].sin()).abs() < 1e-8));
}

#[test]
fn hermitian_model_gives_identical_kinds() {
    let tables: Vec<Vec<Vec<f64>>> = ["lr", "rl", "ll", "rr"]
        .iter()
        .map(|k| {
            let o = qgeom(&["tensor", "--model", "spin_field", "--grid", "0.5:2.5:3,0:1:2", "--kind", k]);
            assert!(o.status.success(), "{}", stderr(&o));
            parse_csv(&stdout(&o)).1
        })
        .collect();
    let kind_col = 3;
    for t in &tables[1..] {
        for (a, b) in t.iter().zip(&tables[0]) {
            for (c, (x, y)) in a.iter().zip(b).enumerate() {
                if c != kind_col {
                    assert!((x - y).abs() < 1e-8, "column {c}: {x} vs {y}");
                }
            }
        }
    }
}

#[test]
fn exceptional_point_in_grid_exits_three() {
    let o = qgeom(&["tensor", "--model", "pt_two_level", "--grid", "0.5:1:2,1:1:1", "--kind", "lr"]);
    assert_eq!(o.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(err["code"], "EXCEPTIONAL_POINT");
    assert_eq!(err["theta"], serde_json::json!([1.0, 1.0]));
}

#[test]
fn config_errors_exit_two() {
    for args in [
        vec!["tensor", "--model", "nope"],
        vec!["tensor", "--kind", "xx"],
        vec!["tensor", "--alpha", "-1"],
        vec!["tensor", "--params", "1,2,3"],
        vec!["sweep"],
        vec!["validate", "--check", "nope"],
        vec!["connections", "--kind", "case1"],
        vec!["tensor", "--unknown-flag"],
    ] {
        let o = qgeom(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn config_file_rejects_unknown_keys_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "model = qubit\nmodle = qubit\n").unwrap();
    let o = qgeom(&["tensor", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("modle"));

    let good = dir.path().join("good.cfg");
    std::fs::write(&good, "# point on the sphere\nmodel = qubit\nparams = 0.5, 0.0\n").unwrap();
    let from_file = parse_csv(&stdout(&qgeom(&["tensor", "--config", good.to_str().unwrap()]))).1;
    assert_eq!(from_file[0][0], 0.5);
    let overridden = parse_csv(&stdout(&qgeom(&["tensor", "--config", good.to_str().unwrap(), "--params", "1.5,0"]))).1;
    assert_eq!(overridden[0][0], 1.5);
}

#[test]
fn meta_file_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let o = qgeom(&["sweep", "--model", "gaussian_wave", "--grid", "-1:1:3,0.2:0.8:2", "--kind", "fs,case2", "--alpha", "-0.3,0.5", "--out", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let meta = Path::new(&format!("{}.meta", a.display())).to_path_buf();
    let b = dir.path().join("b.csv");
    let o = qgeom(&["sweep", "--config", meta.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 1 + 6 * 3);
}

#[test]
fn json_output_parses() {
    let o = qgeom(&["connections", "--model", "qubit", "--kind", "fs,case2", "--alpha", "0.3", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["config"]["model"], "qubit");
    let cols = doc["columns"].as_array().unwrap();
    assert_eq!(cols.len(), 2 + 2 + 4 * 8);
    assert!(cols.iter().any(|c| c == "gamma1.110.re"));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn connections_fs_row_matches_round_sphere() {
    let o = qgeom(&["connections", "--model", "qubit", "--params", "1.1,0.4", "--kind", "fs"]);
    let (h, rows) = parse_csv(&stdout(&o));
    let (s, c) = f64::sin_cos(1.1);
    assert!((rows[0][col(&h, "gamma1.110.re")] + 0.25 * s * c).abs() < 1e-10);
    assert!((rows[0][col(&h, "gamma2.011.re")] - 0.25 * s * c).abs() < 1e-10);
}

#[test]
fn optimize_qubit_ground_state() {
    let o = qgeom(&["optimize", "--model", "qubit", "--params", "2.5,0.3", "--eta", "0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!((summary(&text, "final.cost.re") + 1.0).abs() < 1e-6);
    assert!(summary(&text, "iterations") <= 200.0);
    let (h, rows) = parse_csv(&text);
    assert_eq!(h[0], "iter");
    assert!(h.contains(&"incompatibility".to_string()));
    assert_eq!(rows.len() as f64, summary(&text, "iterations"));
}

#[test]
fn optimize_rr_finds_eigenvalue() {
    let o = qgeom(&["optimize", "--cost", "rr", "--model", "qubit", "--params", "1,0", "--operator", "pt_two_level:0.6,1.0", "--max-iters", "500"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let e = summary(&text, "final.energy.re").hypot(summary(&text, "final.energy.im"));
    assert!((e - 0.8).abs() < 1e-5);
    assert!(summary(&text, "final.cost.re") < 1e-8);
}

#[test]
fn optimize_zero_iterations_is_header_only() {
    let o = qgeom(&["optimize", "--max-iters", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn optimize_dual_scheme_logs_incompatibility() {
    let o = qgeom(&["optimize", "--cost", "biortho", "--model", "pt_two_level", "--params", "0.3,1.0", "--max-iters", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = parse_csv(&stdout(&o));
    let c = col(&h, "incompatibility");
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[c].is_finite()));
    let o = qgeom(&["optimize", "--cost", "biortho", "--model", "qubit"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_single_check_and_tightened_tolerance() {
    let o = qgeom(&["validate", "--check", "alpha_overlap"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains("PASS") || l.contains("FAIL")).count(), 1);
    // analytic-mode residuals sit far below their tolerance
    assert!(qgeom(&["validate", "--check", "alpha_omega_tilde", "--tol-scale", "0.01"]).status.success());
    let o = qgeom(&["validate", "--check", "alpha_overlap", "--tol-scale", "1e-9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("alpha_overlap"));
}

#[test]
fn validate_writes_table_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("checks.csv");
    let o = qgeom(&["validate", "--check", "qfi_trace_forms", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("check,group,residual,tolerance,comparison,status\nqfi_trace_forms,"));
}

#[test]
fn models_lists_registry() {
    let text = stdout(&qgeom(&["models"]));
    for name in ["qubit", "gaussian_wave", "exp_family", "pt_two_level", "spin_field", "unitary_product"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
