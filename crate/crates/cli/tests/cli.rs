//! End-to-end runs of the compiled binary: artifact layout, exit codes,
//! and the numerical content of the files it writes.

use dscov::SymMatrix;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const GRAPH_SIX: &str =
    r#"{"p": 6, "edges": [[1,2],[1,3],[1,4],[2,3],[2,4],[3,4],[3,5],[3,6],[4,5],[4,6],[5,6]]}"#;

const V_SIX: &str = "13,8,4,2,0,0\n8,13,2,1,0,0\n4,2,10,6,1,1\n2,1,6,13,10,10\n\
                     0,0,1,10,13,8\n0,0,1,10,8,13\n";

const S_SIX: &str = "16.703,8.774,4.113,2.629,-0.25,1.16\n\
                     8.774,11.559,1.92,0.01,-1.605,-0.854\n\
                     4.113,1.92,10.07,5.813,1.245,0.947\n\
                     2.629,0.01,5.813,12.424,10.227,9.68\n\
                     -0.25,-1.605,1.245,10.227,13.958,7.88\n\
                     1.16,-0.854,0.947,9.68,7.88,13.345\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dscov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_chordal_reports_the_golden_cliques() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", GRAPH_SIX);
    let out = dir.path().join("chk");
    let o = run(&[
        "check-chordal",
        "--graph",
        g.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("chordal: yes"), "{text}");
    assert!(text.contains("{1,2,3,4}") && text.contains("{3,4,5,6}"), "{text}");
    assert!(text.contains("separators: {3,4}"), "{text}");
    assert!(dir.path().join("chk.cliquetree.json").exists());
}

#[test]
fn four_cycle_fails_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(
        dir.path(),
        "c4.json",
        r#"{"p": 4, "edges": [[1,2],[2,3],[3,4],[1,4]]}"#,
    );
    let o = run(&["check-chordal", "--graph", g.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.contains("chordal: no"), "{text}");
    assert!(text.contains("chordless cycle"), "{text}");
}

#[test]
fn unreadable_and_malformed_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.json", "");
    let o = run(&["check-chordal", "--graph", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    let missing = dir.path().join("nope.json");
    let o = run(&["check-chordal", "--graph", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn local_inverse_reproduces_the_golden_precision_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", GRAPH_SIX);
    let v = write(dir.path(), "v.csv", V_SIX);
    let out = dir.path().join("inv");
    let o = run(&[
        "local-inverse",
        "--matrix",
        v.to_str().unwrap(),
        "--graph",
        g.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let theta = SymMatrix::read_path(dir.path().join("inv.theta.csv")).unwrap();
    let expected = dscov::fixtures::precision_six();
    assert!(theta.max_abs_diff(&expected) <= 1e-10);

    // the JSON artifact carries the same matrix
    let theta_json = SymMatrix::read_path(dir.path().join("inv.theta.json")).unwrap();
    assert_eq!(theta_json.max_abs_diff(&theta), 0.0);
}

#[test]
fn singular_clique_block_exits_three_and_names_the_block() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", GRAPH_SIX);
    let m = write(
        dir.path(),
        "singular.csv",
        "1,1,1,1,0,0\n1,1,1,1,0,0\n1,1,2,1,0.5,0.5\n1,1,1,3,1,1\n\
         0,0,0.5,1,2,0.5\n0,0,0.5,1,0.5,2\n",
    );
    let out = dir.path().join("x");
    let o = run(&[
        "local-inverse",
        "--matrix",
        m.to_str().unwrap(),
        "--graph",
        g.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("{1,2,3,4}"), "{}", stderr(&o));
}

#[test]
fn estimate_fits_the_reference_sample_and_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", GRAPH_SIX);
    let s = write(dir.path(), "s.csv", S_SIX);
    let out = dir.path().join("fit");
    let o = run(&[
        "estimate",
        "--cov",
        s.to_str().unwrap(),
        "--graph",
        g.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("converged: yes"));

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fit.result.json")).unwrap())
            .unwrap();
    assert_eq!(json["converged"], serde_json::Value::Bool(true));
    assert!(json["constraint_norm"].as_f64().unwrap() <= 1e-4);
    assert!(json["trace"].as_array().unwrap().len() >= 1);

    let mhat = SymMatrix::read_path(dir.path().join("fit.mhat.csv")).unwrap();
    let theta = SymMatrix::read_path(dir.path().join("fit.thetahat.csv")).unwrap();
    assert_eq!(mhat.dim(), 6);
    assert_eq!(theta.dim(), 6);
    // estimates stay on the pattern: (1,5) is a non-edge
    assert_eq!(mhat.get(0, 4), 0.0);
    assert_eq!(theta.get(0, 4), 0.0);
}

#[test]
fn estimate_hitting_its_budget_exits_four_but_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", GRAPH_SIX);
    let s = write(dir.path(), "s.csv", S_SIX);
    let out = dir.path().join("nc");
    let o = run(&[
        "estimate",
        "--cov",
        s.to_str().unwrap(),
        "--graph",
        g.to_str().unwrap(),
        "--max-outer",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(dir.path().join("nc.mhat.csv").exists());
    assert!(dir.path().join("nc.result.json").exists());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("nc.result.json")).unwrap())
            .unwrap();
    assert_eq!(json["converged"], serde_json::Value::Bool(false));
}

#[test]
fn estimate_rejects_a_non_chordal_graph_before_optimizing() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(
        dir.path(),
        "c4.json",
        r#"{"p": 4, "edges": [[1,2],[2,3],[3,4],[1,4]]}"#,
    );
    let s = write(dir.path(), "s.csv", "2,0,0,0\n0,2,0,0\n0,0,2,0\n0,0,0,2\n");
    let out = dir.path().join("x");
    let o = run(&[
        "estimate",
        "--cov",
        s.to_str().unwrap(),
        "--graph",
        g.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not chordal"), "{}", stderr(&o));
    assert!(!dir.path().join("x.result.json").exists());
}

#[test]
fn simulate_then_estimate_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", GRAPH_SIX);
    let v = write(dir.path(), "v.csv", V_SIX);
    let draws = dir.path().join("draws");
    let o = run(&[
        "simulate",
        "--truth",
        v.to_str().unwrap(),
        "--n",
        "4000",
        "--seed",
        "5",
        "--out",
        draws.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let data = dir.path().join("draws.data.csv");
    assert!(data.exists());

    let out = dir.path().join("fit");
    let o = run(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--graph",
        g.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // the derived sample covariance is written alongside the fit
    assert!(dir.path().join("fit.s.csv").exists());
}

#[test]
fn simulation_is_reproducible_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let v = write(dir.path(), "v.csv", V_SIX);
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = run(&[
            "simulate",
            "--truth",
            v.to_str().unwrap(),
            "--n",
            "20",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = fs::read_to_string(dir.path().join("a.data.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b.data.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn residuals_pipeline_writes_panel_and_regression() {
    let dir = tempfile::tempdir().unwrap();
    let prices = write(
        dir.path(),
        "prices.csv",
        "date,IDX,AAA,BBB\n\
         2026-01-05,100.0,50.0,20.0\n\
         2026-01-06,101.0,50.8,20.1\n\
         2026-01-07,99.5,49.9,\n\
         2026-01-08,102.2,51.5,20.6\n\
         2026-01-09,103.1,52.0,20.9\n\
         2026-01-12,102.0,51.2,20.5\n",
    );
    let out = dir.path().join("res");
    let o = run(&[
        "residuals",
        "--prices",
        prices.to_str().unwrap(),
        "--index",
        "IDX",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("1 incomplete price row(s) dropped"));

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res.regression.json")).unwrap())
            .unwrap();
    assert_eq!(json["tickers"].as_array().unwrap().len(), 2);
    assert_eq!(json["betas"].as_array().unwrap().len(), 2);

    let (names, data) =
        dscov::dataio::read_observations_csv(fs::File::open(dir.path().join("res.residuals.csv")).unwrap())
            .unwrap();
    assert_eq!(names, vec!["AAA".to_string(), "BBB".to_string()]);
    assert_eq!(data.nrows(), 4);
}

#[test]
fn heatmap_exports_the_golden_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let v = write(dir.path(), "v.csv", V_SIX);
    let out = dir.path().join("hm");
    let o = run(&[
        "heatmap",
        "--matrix",
        v.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (corr, labels) =
        dscov::dataio::read_heatmap_csv(fs::File::open(dir.path().join("hm.correlation.csv")).unwrap())
            .unwrap();
    assert_eq!(labels.len(), 6);
    assert!((corr.get(0, 1) - 8.0 / 13.0).abs() <= 1e-15);
    for i in 0..6 {
        assert_eq!(corr.get(i, i), 1.0);
    }
}

#[test]
fn bench_reports_tiny_discrepancy_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let o = run(&[
        "bench",
        "--family",
        "banded",
        "--sizes",
        "30,50",
        "--reps",
        "3",
        "--seed",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("b.bench.json")).unwrap())
            .unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert!(row["max_rel_discrepancy"].as_f64().unwrap() <= 1e-8);
        assert_eq!(row["deterministic"], serde_json::Value::Bool(true));
    }
    let csv = fs::read_to_string(dir.path().join("b.bench.csv")).unwrap();
    assert!(csv.starts_with("family,p,reps,"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn conflicting_estimate_inputs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", GRAPH_SIX);
    let s = write(dir.path(), "s.csv", S_SIX);
    let out = dir.path().join("x");
    let o = run(&[
        "estimate",
        "--cov",
        s.to_str().unwrap(),
        "--truth",
        s.to_str().unwrap(),
        "--graph",
        g.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exactly one input"), "{}", stderr(&o));
}
