//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line.
//! Thresholds are pinned here; a red criterion means the build does not meet
//! its contract.

use std::time::Instant;

use plectic_core::catalog::{self, BUILTIN_NAMES};
use plectic_core::report::Report;
use plectic_core::suites::{run, Suite};

#[path = "../../plectic-core/tests/poly_oracle/mod.rs"]
mod poly_oracle;

const POINTS: usize = 200;
const SEED: u64 = 7;

fn entry<'r>(rep: &'r Report, id: &str) -> &'r plectic_core::report::CheckEntry {
    rep.entries
        .iter()
        .find(|e| e.id == id)
        .unwrap_or_else(|| panic!("missing entry `{id}` in suite {} on {}", rep.suite, rep.model))
}

fn assert_entry(rep: &Report, id: &str, threshold: f64) {
    let e = entry(rep, id);
    assert!(
        e.max_residual <= threshold,
        "{} on {}: residual {:.3e} > {:.1e}",
        id,
        rep.model,
        e.max_residual,
        threshold
    );
}

fn verdict(name: &str, ok: bool) {
    println!(
        "criterion {name}: {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {name} failed");
}

/// 1. Cartan-type identity suite on every catalog model, 200 samples,
///    residuals ≤ 1e−8, total wall time < 10 s.
#[test]
fn criterion_1_cartan_identities() {
    let t0 = Instant::now();
    for name in BUILTIN_NAMES {
        let m = catalog::builtin(name).unwrap();
        let rep = run(&m, Suite::Cartan, POINTS, SEED, 1e-8).unwrap();
        for id in ["cartan1", "cartan2", "cartan3", "dsquared", "bianchi"] {
            assert_entry(&rep, id, 1e-8);
        }
    }
    let elapsed = t0.elapsed();
    println!("  cartan suite over all models: {elapsed:?}");
    verdict(
        "1 (covariant Cartan identities <= 1e-8, < 10 s)",
        elapsed.as_secs_f64() < 10.0,
    );
}

/// 2. Algebroid suite: axioms, square-zero, Leibniz and the
///    interior/differential commutation ≤ 1e−8 on all algebroid models.
#[test]
fn criterion_2_algebroid_suite() {
    for name in BUILTIN_NAMES {
        let m = catalog::builtin(name).unwrap();
        if m.algebroid.is_none() {
            continue;
        }
        let rep = run(&m, Suite::Algebroid, POINTS, SEED, 1e-8).unwrap();
        for id in [
            "algebroid-anchor",
            "algebroid-jacobi",
            "eth-squared",
            "eth-leibniz",
            "iota-commutes-0",
            "iota-commutes-1",
        ] {
            assert_entry(&rep, id, 1e-8);
        }
    }
    verdict("2 (algebroid operator suite <= 1e-8)", true);
}

/// 3. Momentum-section defects per bidegree ≤ 1e−8 on the five momentum
///    models, and a perturbed section is detected with residual ≥ 0.05.
#[test]
fn criterion_3_momentum_sections() {
    for name in [
        "E1_symplectic",
        "E1T_translation",
        "E2_hyperkahler",
        "E3_heisenberg",
        "E4_torus4",
    ] {
        let m = catalog::builtin(name).unwrap();
        let rep = run(&m, Suite::Hms, POINTS, SEED, 1e-8).unwrap();
        for e in rep.entries.iter().filter(|e| e.id.starts_with("hms-")) {
            assert!(
                e.max_residual <= 1e-8,
                "{} on {name}: {:.3e}",
                e.id,
                e.max_residual
            );
        }
    }
    // fault detection
    use plectic_core::algebroid::MixedForm;
    use plectic_core::expr::SmoothFunction;
    use plectic_core::plectic::{hms_defect, MomentumSection};
    let m = catalog::builtin("E4_torus4").unwrap();
    let d = m.chart.dim;
    let sf = |s: &str| SmoothFunction::parse(s, d).unwrap();
    let mut bad = MixedForm::new(d, 1, 0, 1, 3);
    bad.set(&[], &[0], vec![sf("x1 + 0.1*x0"), sf("0"), sf("0")]);
    let defect = hms_defect(
        m.plectic.as_ref().unwrap(),
        m.algebroid.as_ref().unwrap(),
        &MomentumSection::single(bad),
        &m.chart,
        POINTS,
        SEED,
    )
    .unwrap();
    let fault = defect
        .bidegree
        .iter()
        .find(|(p, q, _)| (*p, *q) == (1, 1))
        .unwrap()
        .2;
    assert!(fault >= 0.05, "fault residual {fault}");
    verdict("3 (momentum defects <= 1e-8, fault >= 0.05)", true);
}

/// 4. Compatibility, bracket anti-homomorphism and Jacobi ≤ 1e−8 on the
///    three compatible models, including the closedness identity.
#[test]
fn criterion_4_compatibility_and_brackets() {
    for name in ["E1_symplectic", "E2_hyperkahler", "E4_torus4"] {
        let m = catalog::builtin(name).unwrap();
        let compat = run(&m, Suite::Compat, POINTS, SEED, 1e-8).unwrap();
        assert_entry(&compat, "compat-direct", 1e-8);
        assert_entry(&compat, "compat-route-agreement", 1e-8);
        let bracket = run(&m, Suite::Bracket, POINTS, SEED, 1e-8).unwrap();
        assert_entry(&bracket, "antihom", 1e-8);
        assert_entry(&bracket, "jacobi", 1e-8);
        assert_entry(&bracket, "jacobi-closedness-identity", 1e-8);
    }
    verdict("4 (compatibility + bracket algebra <= 1e-8)", true);
}

/// 5. Quaternionic-type triple: closedness ≤ 1e−12, the defining gradient
///    condition ≤ 1e−9 for the solved sections, and the triple
///    anti-homomorphism ≤ 1e−9.
#[test]
fn criterion_5_triple_momentum() {
    let m = catalog::builtin("E2_hyperkahler").unwrap();
    let rep = run(&m, Suite::Quaternionic, POINTS, SEED, 1e-8).unwrap();
    assert_entry(&rep, "theta-closed", 1e-12);
    assert_entry(&rep, "fourform-closed", 1e-12);
    assert_entry(&rep, "theta-rank", 0.5);
    assert_entry(&rep, "gl-defining", 1e-9);
    assert_entry(&rep, "gl-bracket-condition", 1e-9);
    assert_entry(&rep, "triple-antihom", 1e-9);
    verdict("5 (triple momentum conditions)", true);
}

/// 6. Reduction: the torus reduced form vanishes to 1e−9, the translation
///    model reduces to the second area form to 1e−8, orbit membership over
///    100 flow words ≤ 1e−8, cross-representative well-definedness ≤ 1e−6,
///    and the transversality checker reports the expected violation.
#[test]
fn criterion_6_reduction() {
    let torus = catalog::builtin("E4_torus4").unwrap();
    let rep = run(&torus, Suite::Reduction, POINTS, SEED, 1e-8).unwrap();
    assert_entry(&rep, "reduced-form-expected", 1e-9);
    assert_entry(&rep, "orbit-invariance", 1e-8);
    assert_entry(&rep, "cross-representative-form", 1e-6);
    assert_entry(&rep, "cross-representative-connection", 1e-6);
    assert!(entry(&rep, "transversality-expect-violated").passed);

    let tr = catalog::builtin("E1T_translation").unwrap();
    let rep = run(&tr, Suite::Reduction, POINTS, SEED, 1e-8).unwrap();
    assert_entry(&rep, "reduced-form-expected", 1e-8);
    assert_entry(&rep, "pullback-relation", 1e-8);
    assert_entry(&rep, "orbit-invariance", 1e-8);
    assert_entry(&rep, "cross-representative-form", 1e-6);
    assert!(entry(&rep, "transversality-expect-violated").passed);
    verdict("6 (reduction checks)", true);
}

/// 7. Oracle equivalence: jets against the symbolic polynomial oracle to
///    1e−12 on 1000 random expressions, and the two exterior-derivative
///    routes agree to 1e−10 on every model.
#[test]
fn criterion_7_oracle_equivalence() {
    use plectic_core::expr::SmoothFunction;
    use plectic_core::sample::Sampler;
    let mut s = Sampler::new(20260802);
    let mut checked = 0usize;
    while checked < 1000 {
        let dim = 1 + s.usize_below(4);
        let (ast, poly) = poly_oracle::random_pair(dim, 4, &mut s);
        if poly.degree() > 4 {
            continue;
        }
        checked += 1;
        let f = SmoothFunction::from_expr(ast, dim).unwrap();
        let grads: Vec<poly_oracle::Poly> = (0..dim).map(|i| poly.diff(i)).collect();
        for _ in 0..20 {
            let x: Vec<f64> = (0..dim).map(|_| s.coeff()).collect();
            let jet = f.eval_jet2(&x).unwrap();
            let ok = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
            assert!(ok(jet.value(), poly.eval(&x)));
            for i in 0..dim {
                assert!(ok(jet.g(i), grads[i].eval(&x)));
                for j in 0..dim {
                    assert!(ok(jet.h(i, j), grads[i].diff(j).eval(&x)));
                }
            }
        }
    }
    for name in BUILTIN_NAMES {
        let m = catalog::builtin(name).unwrap();
        let rep = run(&m, Suite::Cartan, POINTS, SEED, 1e-8).unwrap();
        assert_entry(&rep, "dext-consistency", 1e-10);
    }
    verdict("7 (derivative oracle equivalence)", true);
}

/// 8. The full suite over every built-in finishes in < 60 s, passes, and is
///    byte-deterministic — through the library and through the binary.
#[test]
fn criterion_8_full_run_deterministic() {
    let t0 = Instant::now();
    let mut first = String::new();
    for name in BUILTIN_NAMES {
        let m = catalog::builtin(name).unwrap();
        let rep = run(&m, Suite::All, POINTS, 42, 1e-8).unwrap();
        assert!(rep.overall_pass(), "suite all failed on {name}");
        first.push_str(&rep.to_json());
    }
    let elapsed = t0.elapsed();
    println!("  full suite over all models: {elapsed:?}");
    let mut second = String::new();
    for name in BUILTIN_NAMES {
        let m = catalog::builtin(name).unwrap();
        second.push_str(&run(&m, Suite::All, POINTS, 42, 1e-8).unwrap().to_json());
    }
    assert_eq!(first, second, "library reports are not byte-identical");

    // the binary: byte-identical JSON and exit code 0
    let exe = env!("CARGO_BIN_EXE_plectic");
    let run_cli = || {
        std::process::Command::new(exe)
            .args(["--model", "E4_torus4", "--suite", "hms", "--points", "50", "--format", "json"])
            .output()
            .expect("binary runs")
    };
    let a = run_cli();
    let b = run_cli();
    assert!(a.status.success(), "cli exited nonzero: {}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout, "cli reports are not byte-identical");

    verdict(
        "8 (full deterministic run < 60 s)",
        elapsed.as_secs_f64() < 60.0,
    );
}

/// The CLI contract: exit code 1 on residual failure, 2 on usage errors.
#[test]
fn cli_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_plectic");
    // usage error: unknown suite
    let out = std::process::Command::new(exe)
        .args(["--suite", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // usage error: unknown model
    let out = std::process::Command::new(exe)
        .args(["--model", "E9_missing"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // residual failure: a model file with a broken momentum section
    let dir = std::env::temp_dir().join("plectic-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let m = catalog::builtin("E4_torus4").unwrap();
    let mut cfg = m.config().clone();
    cfg.momentum[0]
        .coeffs
        .insert("|0".into(), vec!["x1 + 0.1*x0".into(), "0".into(), "0".into()]);
    let path = dir.join("broken_e4.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let out = std::process::Command::new(exe)
        .args(["--model", path.to_str().unwrap(), "--suite", "hms", "--points", "50"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(1),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}
