//! End-to-end runs of the `causal-twin` binary against the fixture files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causal-twin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_accepts_good_graph() {
    let out = run(&["validate", fixture("confounder.json").to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("ok: 3 nodes, 3 edges"));
}

#[test]
fn validate_rejects_cycle_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cyclic.json");
    std::fs::write(
        &path,
        r#"{"nodes": [{"name": "A", "cardinality": 2}, {"name": "B", "cardinality": 2}],
            "edges": [["A", "B"], ["B", "A"]]}"#,
    )
    .unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("cycle") && text.contains("A") && text.contains("B"), "{text}");
}

#[test]
fn validate_rejects_bad_json_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error"));
}

#[test]
fn validate_reports_all_problems() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("multi.json");
    std::fs::write(
        &path,
        r#"{"nodes": [{"name": "A", "cardinality": 1}, {"name": "B*", "cardinality": 2}],
            "edges": [["A", "C"]]}"#,
    )
    .unwrap();
    let out = run(&["validate", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["problems"].as_array().unwrap().len(), 3);
}

#[test]
fn twin_dot_is_deterministic_and_fully_shaped() {
    let graph = fixture("confounder.json");
    let args = ["twin", graph.to_str().unwrap(), "--do", "T=1"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "twin DOT output must be byte-stable");
    let dot = stdout(&a);
    assert!(dot.contains("cluster_plate") && dot.contains("m=1..M"));
    assert!(dot.contains("\"theta(Z)\" -> \"Z*\""));
    assert!(dot.contains("\"theta(T)\" -> \"T\""));
    assert!(!dot.contains("-> \"T*\""));
}

#[test]
fn twin_json_round_trips() {
    let out = run(&[
        "twin",
        fixture("confounder.json").to_str().unwrap(),
        "--do",
        "T=0",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let twin: causal_twin::TwinPgm = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(twin.post_nodes, vec!["Z*", "T*", "Y*"]);
    assert!(causal_twin::validate_twin(&twin).is_valid());
}

#[test]
fn twin_on_latent_target_exits_1() {
    let out = run(&[
        "twin",
        fixture("confounder_latent.json").to_str().unwrap(),
        "--do",
        "Z=1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("latent"));
}

#[test]
fn identify_finds_backdoor_rule() {
    let out = run(&[
        "identify",
        fixture("confounder.json").to_str().unwrap(),
        "--do",
        "T",
        "--y",
        "Y",
        "--z",
        "Z",
        "--json",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rules = report["rules"].as_array().unwrap();
    assert_eq!(rules[1]["rule"], 2);
    assert_eq!(rules[1]["applies"], true);
    assert_eq!(rules[2]["applies"], false);
    assert_eq!(report["identified"], true);
}

#[test]
fn identify_reports_unidentified_query() {
    let out = run(&[
        "identify",
        fixture("confounder.json").to_str().unwrap(),
        "--do",
        "T",
        "--y",
        "Y",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("not identified by Rules 1-3"), "{text}");
}

#[test]
fn identify_disconnected_target_satisfies_rule_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disc.json");
    std::fs::write(
        &path,
        r#"{"nodes": [{"name": "T", "cardinality": 2}, {"name": "Y", "cardinality": 2}],
            "edges": []}"#,
    )
    .unwrap();
    let out = run(&["identify", path.to_str().unwrap(), "--do", "T", "--y", "Y", "--json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["rules"][2]["applies"], true);
}

#[test]
fn identify_rejects_malformed_query() {
    // Missing required --y is a usage error: clap exits 2.
    let out = run(&["identify", fixture("confounder.json").to_str().unwrap(), "--do", "T"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    let model = fixture("confounder_model.json");
    for (path, seed) in [(&out_a, "11"), (&out_b, "11")] {
        let out = run(&[
            "simulate",
            "--model",
            model.to_str().unwrap(),
            "--n",
            "500",
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b);
    let data = causal_twin::Dataset::read_csv(&out_a).unwrap();
    assert_eq!(data.n_rows(), 500);
    assert_eq!(data.columns(), &["Z", "T", "Y"]);
}

#[test]
fn simulate_clamps_and_hides() {
    let out = run(&[
        "simulate",
        "--model",
        fixture("confounder_model.json").to_str().unwrap(),
        "--n",
        "50",
        "--do",
        "T=1",
        "--hide",
        "Z",
        "--seed",
        "3",
        "--out",
        "-",
    ]);
    assert!(out.status.success());
    let data = causal_twin::Dataset::from_csv_str(&stdout(&out)).unwrap();
    for row in data.rows() {
        assert_eq!(row[0], None, "Z hidden");
        assert_eq!(row[1], Some(1), "T clamped");
    }
}

#[test]
fn infer_exact_recovers_interventional_value() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("obs.csv");
    let sim = run(&[
        "simulate",
        "--model",
        fixture("confounder_model.json").to_str().unwrap(),
        "--n",
        "20000",
        "--seed",
        "5",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(sim.status.success());
    let out = run(&[
        "infer",
        "--graph",
        fixture("confounder.json").to_str().unwrap(),
        "--data",
        csv.to_str().unwrap(),
        "--do",
        "T=1",
        "--target",
        "Y",
        "--json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let p1 = report["states"][1].as_f64().unwrap();
    assert!((p1 - 0.41).abs() < 0.02, "P(Y*=1) = {p1}");
    assert_eq!(report["m"], 20000);
}

#[test]
fn infer_mc_reports_standard_errors() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("obs.csv");
    run(&[
        "simulate",
        "--model",
        fixture("confounder_model.json").to_str().unwrap(),
        "--n",
        "200",
        "--seed",
        "6",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let out = run(&[
        "infer",
        "--graph",
        fixture("confounder.json").to_str().unwrap(),
        "--data",
        csv.to_str().unwrap(),
        "--do",
        "T=1",
        "--target",
        "Y",
        "--method",
        "mc",
        "--samples",
        "2000",
        "--seed",
        "9",
        "--json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report["std_error"][0].as_f64().unwrap() > 0.0);
}

#[test]
fn infer_gibbs_handles_latent_graph() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("hidden.csv");
    run(&[
        "simulate",
        "--model",
        fixture("confounder_model.json").to_str().unwrap(),
        "--n",
        "500",
        "--hide",
        "Z",
        "--seed",
        "8",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let out = run(&[
        "infer",
        "--graph",
        fixture("confounder_latent.json").to_str().unwrap(),
        "--data",
        csv.to_str().unwrap(),
        "--do",
        "T=1",
        "--target",
        "Y",
        "--method",
        "gibbs",
        "--burn",
        "100",
        "--samples",
        "400",
        "--seed",
        "10",
        "--json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let states = report["states"].as_array().unwrap();
    let total: f64 = states.iter().map(|v| v.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!(report["spread"].is_array());
}

#[test]
fn compare_runs_the_fixture_experiment() {
    let out = run(&["compare", fixture("compare.json").to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let truth1 = report["truth"][1].as_f64().unwrap();
    assert!((truth1 - 0.41).abs() < 1e-9);

    let rows = report["rows"].as_array().unwrap();
    // M = 0: prior predictive is symmetric and there is no empirical column.
    assert_eq!(rows[0]["m"], 0);
    assert!((rows[0]["bayes"]["flat"][1].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!(rows[0]["empirical"].is_null());
    // M = 20,000: posterior predictive within 0.02 of the oracle.
    assert_eq!(rows[2]["m"], 20000);
    assert!(rows[2]["bayes_gap"]["flat"].as_f64().unwrap() < 0.02);
    assert!(rows[2]["empirical_gap"].as_f64().unwrap() < 0.02);
}

#[test]
fn compare_empirical_column_concentrates_at_scale() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("big.json");
    let fixtures = fixture("");
    std::fs::write(
        &config,
        format!(
            r#"{{"graph": "{0}/confounder.json", "ground_truth": "{0}/confounder_cpts.json",
                "do": "T=1", "target": "Y", "sample_sizes": [200000], "seed": 3}}"#,
            fixtures.display()
        ),
    )
    .unwrap();
    let out = run(&["compare", config.to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let row = &report["rows"][0];
    assert!(row["empirical_gap"].as_f64().unwrap() < 0.01);
    assert!(row["bayes_gap"]["flat"].as_f64().unwrap() < 0.01);
}

#[test]
fn compare_gibbs_method_masks_latent_columns() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("gibbs.json");
    let fixtures = fixture("");
    std::fs::write(
        &config,
        format!(
            r#"{{"graph": "{0}/confounder_latent.json",
                "ground_truth": "{0}/confounder_cpts.json",
                "do": "T=1", "target": "Y", "sample_sizes": [1000], "seed": 11,
                "method": "gibbs", "burn": 100, "keep": 400}}"#,
            fixtures.display()
        ),
    )
    .unwrap();
    let out = run(&["compare", config.to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let states = report["rows"][0]["bayes"]["flat"].as_array().unwrap();
    let total: f64 = states.iter().map(|v| v.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn compare_output_is_deterministic() {
    let config = fixture("compare.json");
    let args = ["compare", config.to_str().unwrap(), "--json"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sensitivity_flags_latent_disagreement() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("hidden.csv");
    run(&[
        "simulate",
        "--model",
        fixture("confounder_model.json").to_str().unwrap(),
        "--n",
        "2000",
        "--hide",
        "Z",
        "--seed",
        "12",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let out = run(&[
        "sensitivity",
        "--graph",
        fixture("confounder_latent.json").to_str().unwrap(),
        "--data",
        csv.to_str().unwrap(),
        "--do",
        "T=1",
        "--target",
        "Y",
        "--prior",
        fixture("flat_prior.json").to_str().unwrap(),
        "--prior",
        fixture("confounded_prior.json").to_str().unwrap(),
        "--burn",
        "200",
        "--keep",
        "800",
        "--seed",
        "13",
        "--json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0][0], "flat_prior");
    assert_eq!(results[1][0], "confounded_prior");
    assert!(report["max_pairwise_gap"].as_f64().unwrap() > 0.02);
}
