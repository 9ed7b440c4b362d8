//! The documented model files stay in lockstep with the built-in catalog.

use std::path::PathBuf;

use plectic_core::catalog;
use plectic_core::plectic::hms_defect;

fn docs_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../docs/models")
        .join(name)
}

#[test]
fn documented_torus_file_matches_builtin_bytes() {
    let on_disk = std::fs::read_to_string(docs_path("e4_torus4.json")).unwrap();
    let built = catalog::to_json(&catalog::builtin("E4_torus4").unwrap());
    assert_eq!(on_disk, built, "docs/models/e4_torus4.json is stale");
}

#[test]
fn documented_plane_model_loads_and_passes_the_momentum_equation() {
    let m = catalog::load(&docs_path("e1_symplectic.json")).unwrap();
    let ps = m.plectic.as_ref().unwrap();
    let alg = m.algebroid.as_ref().unwrap();
    let mu = m.momentum.as_ref().unwrap();
    let defect = hms_defect(ps, alg, mu, &m.chart, 100, 17).unwrap();
    for (p, q, r) in &defect.bidegree {
        assert!(*r <= 1e-10, "bidegree ({p},{q}) residual {r}");
    }
}

#[test]
fn malformed_files_report_the_failing_field() {
    let dir = std::env::temp_dir().join("plectic-model-file-tests");
    std::fs::create_dir_all(&dir).unwrap();

    // expression syntax error with a byte offset
    let bad_expr = r#"{
  "name": "bad", "dim": 2,
  "bundle": { "rank": 1 },
  "forms": { "omega": { "degree": 2, "rank": 1, "coeffs": { "0,1": ["1 + * 2"] } } }
}"#;
    let p = dir.join("bad_expr.json");
    std::fs::write(&p, bad_expr).unwrap();
    let err = catalog::load(&p).unwrap_err().to_string();
    assert!(err.contains("forms.omega"), "unexpected error: {err}");
    assert!(err.contains("syntax error"), "unexpected error: {err}");

    // non-ascending multi-index key
    let bad_key = r#"{
  "name": "bad", "dim": 2,
  "bundle": { "rank": 1 },
  "forms": { "omega": { "degree": 2, "rank": 1, "coeffs": { "1,0": ["1"] } } }
}"#;
    let p = dir.join("bad_key.json");
    std::fs::write(&p, bad_key).unwrap();
    let err = catalog::load(&p).unwrap_err().to_string();
    assert!(err.contains("ascending"), "unexpected error: {err}");

    // variable index beyond the chart dimension
    let bad_var = r#"{
  "name": "bad", "dim": 2,
  "bundle": { "rank": 1 },
  "metric": [["1", "0"], ["0", "x5"]]
}"#;
    let p = dir.join("bad_var.json");
    std::fs::write(&p, bad_var).unwrap();
    let err = catalog::load(&p).unwrap_err().to_string();
    assert!(err.contains("metric[1][1]"), "unexpected error: {err}");
    assert!(err.contains("out of range"), "unexpected error: {err}");
}
