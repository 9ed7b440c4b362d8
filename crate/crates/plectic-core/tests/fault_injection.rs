//! Negative controls: deliberately broken data must be detected with
//! residuals well above the pass thresholds, so a green report means
//! something.

use plectic_core::algebroid::{ASection, Algebroid, MixedForm};
use plectic_core::catalog;
use plectic_core::expr::SmoothFunction;
use plectic_core::form::{Bundle, EForm};
use plectic_core::geometry::{Chart, VectorField};
use plectic_core::plectic::{
    compatibility_defect, hms_defect, MomentumSection, PlecticStructure,
};
use plectic_core::reduction::{invariance_residual_form, reduced_form_cross, ReductionError};
use plectic_core::sample::Sampler;

fn sf(src: &str, d: usize) -> SmoothFunction {
    SmoothFunction::parse(src, d).unwrap()
}

#[test]
fn perturbed_momentum_is_detected() {
    // E4 with μ shifted by 0.1·x0 on the first component: the (1,1)
    // bidegree must blow past 0.05.
    let m = catalog::builtin("E4_torus4").unwrap();
    let ps = m.plectic.as_ref().unwrap();
    let alg = m.algebroid.as_ref().unwrap();
    let d = m.chart.dim;
    let mut bad = MixedForm::new(d, alg.rank, 0, 1, 3);
    bad.set(&[], &[0], vec![sf("x1 + 0.1*x0", d), sf("0", d), sf("0", d)]);
    let mu = MomentumSection::single(bad);
    let defect = hms_defect(ps, alg, &mu, &m.chart, 100, 11).unwrap();
    let (_, _, r11) = defect.bidegree.iter().find(|(p, q, _)| (*p, *q) == (1, 1)).unwrap();
    assert!(*r11 >= 0.05, "fault not detected: residual {r11}");
}

#[test]
fn nontrivial_algebroid_connection_breaks_compatibility() {
    // Constant μ with ∇^A having the coefficient x0·dx1: the commutator
    // picks up exactly the |μ^{∇α}| terms.
    let d = 2;
    let mut omega = EForm::new(d, 2, 1);
    omega.set_scalar(&[0, 1], sf("1", d));
    let ps = PlecticStructure::new(omega, Bundle::trivial(1, d), false);
    let mut alg = Algebroid::new(d, 1, vec![sf("0", d), sf("0", d)]);
    alg.aconn = plectic_core::geometry::Connection::Coeffs {
        rank: 1,
        comps: vec![sf("0", d), sf("x0", d)],
    };
    let mut mu = MixedForm::new(d, 1, 0, 1, 1);
    mu.set(&[], &[0], vec![sf("1", d)]);
    let chart = Chart::new_box(vec![0.5, -1.0], vec![1.5, 1.0]);
    let alpha = ASection::constant_frame(d, 1, 0);
    let def = compatibility_defect(&ps, &alg, &mu, &alpha, &chart, 50, 3).unwrap();
    assert!(def.direct >= 0.01, "connection terms not seen: {}", def.direct);
    // the two routes still agree with each other
    assert!(def.route_disagreement < 1e-12);
}

#[test]
fn non_invariant_form_under_translation_flow() {
    // x0·dx0∧dx1 pulled back along the ∂x0 flow for t = 1 shifts by ~1.
    let d = 2;
    let mut omega = EForm::new(d, 2, 1);
    omega.set_scalar(&[0, 1], sf("x0", d));
    let chart = Chart::new_box(vec![-3.0; d], vec![3.0; d]);
    let sample = Chart::new_box(vec![-1.0; d], vec![1.0; d]);
    let field = VectorField::parse(&["1", "0"], d).unwrap();
    let r = invariance_residual_form(&chart, &sample, &omega, &field, 1.0, 30, 5).unwrap();
    assert!((r - 1.0).abs() < 0.8, "expected residual near 1, got {r}");
}

#[test]
fn non_tangent_vector_is_refused() {
    let m = catalog::builtin("E1T_translation").unwrap();
    let alg = m.algebroid.as_ref().unwrap();
    let mu = m.momentum.as_ref().unwrap().top();
    let z = vec![0.0, 0.0, 0.3, -0.4];
    // u points straight across the zero set {x1 = 0}
    let u = vec![0.0, 1.0, 0.0, 0.0];
    let v = vec![0.0, 0.0, 1.0, 0.0];
    let mut s = Sampler::new(1);
    match reduced_form_cross(
        &m.chart,
        alg,
        mu,
        &m.plectic.as_ref().unwrap().omega,
        &z,
        &u,
        &v,
        &[(0, 0.3)],
        &mut s,
        1e-7,
    ) {
        Err(ReductionError::NotTangent { residual, .. }) => {
            assert!(residual >= 0.1, "tangency residual too small: {residual}");
        }
        other => panic!("expected a tangency refusal, got {other:?}"),
    }
}

#[test]
fn translation_pair_fails_the_triple_bracket_condition() {
    // Two commuting translations on flat R^4: the defining gradient
    // condition is solvable (linear potentials) but the bracket condition
    // demands Σ ω_i(V1, V2) ω_i = 0, which fails for these directions.
    let m = catalog::builtin("E2_hyperkahler").unwrap();
    let triple = m.theta_triple.as_ref().unwrap();
    let d = 4;
    let alg = Algebroid::new(
        d,
        2,
        vec![
            sf("1", d), sf("0", d), sf("0", d), sf("0", d),
            sf("0", d), sf("1", d), sf("0", d), sf("0", d),
        ],
    );
    // f solved from d f_V = ι_V ω_i: linear potentials for constant fields
    let mut f = MixedForm::new(d, 2, 0, 1, 3);
    // ι_{∂x0} ω_1 = dx1, ι_{∂x0} ω_2 = dx2, ι_{∂x0} ω_3 = dx3
    f.set(&[], &[0], vec![sf("x1", d), sf("x2", d), sf("x3", d)]);
    // ι_{∂x1} ω_1 = −dx0, ι_{∂x1} ω_2 = −dx3, ι_{∂x1} ω_3 = dx2
    f.set(&[], &[1], vec![sf("-x0", d), sf("-x3", d), sf("x2", d)]);
    let gr = plectic_core::plectic::gl_residual(triple, &f_alg_pair(&alg), &f, 0, 1, &m.chart, 40, 9)
        .unwrap();
    assert!(gr.defining < 1e-12, "linear potentials satisfy the gradient condition: {}", gr.defining);
    assert!(
        gr.bracket_condition >= 0.5,
        "commuting translations must violate the bracket condition: {}",
        gr.bracket_condition
    );
}

fn f_alg_pair(a: &Algebroid) -> Algebroid {
    a.clone()
}

#[test]
fn literal_noncompatible_rotation_sign_fails() {
    // With the counterclockwise anchor and the positive energy the pairing
    // gradient flips sign, so the momentum equation must fail loudly.
    let d = 2;
    let mut omega = EForm::new(d, 2, 1);
    omega.set_scalar(&[0, 1], sf("1", d));
    let ps = PlecticStructure::new(omega, Bundle::trivial(1, d), false);
    let alg = Algebroid::new(d, 1, vec![sf("-x1", d), sf("x0", d)]);
    let mut mu = MixedForm::new(d, 1, 0, 1, 1);
    mu.set(&[], &[0], vec![sf("0.5*x0^2 + 0.5*x1^2", d)]);
    let chart = Chart::new_box(vec![-1.5; d], vec![1.5; d]);
    let defect = hms_defect(&ps, &alg, &MomentumSection::single(mu), &chart, 60, 13).unwrap();
    let (_, _, r11) = defect.bidegree.iter().find(|(p, q, _)| (*p, *q) == (1, 1)).unwrap();
    assert!(*r11 > 0.5, "sign fault not detected: {r11}");
}
