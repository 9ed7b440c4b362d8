//! Named verification suites: each suite maps a family of checkers onto a
//! model and collects residual entries into a [`Report`]. Checks that a
//! model lacks the data for are skipped; every emitted entry carries its own
//! threshold.

use crate::algebroid::{
    a_cov_ext_deriv, a_wedge, iota_rho, mixed_d, mixed_eth, pair_section, ASection, MixedForm,
    MixedJets,
};
use crate::catalog::Model;
use crate::expr::{Expr, SmoothFunction};
use crate::form::{
    cov_ext, identity_residual, interior_values, random_eform, BundleAt, EForm, IdentityTag,
};
use crate::geometry::Connection;
use crate::jet::Jet2;
use crate::multi_index as mi;
use crate::plectic::{
    antihom_residual, build_theta, compatibility_defect, gl_residual, hamlemma_residual,
    hms_defect, jacobi_residual, nondegeneracy_rank, pham_bracket_at, solve_pham_at, SolveRoute,
};
use crate::reduction::{
    flow, invariance_residual_form, orbit_sample, reduced_connection_cross, reduced_form_cross,
    subspace_lemma_check, transversality_check, OrbitMode,
};
use crate::report::{CheckEntry, Report};
use crate::sample::Sampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Cartan,
    Algebroid,
    Hms,
    Compat,
    Bracket,
    Quaternionic,
    Reduction,
    All,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Suite> {
        Some(match name {
            "cartan" => Suite::Cartan,
            "algebroid" => Suite::Algebroid,
            "hms" => Suite::Hms,
            "compat" => Suite::Compat,
            "bracket" => Suite::Bracket,
            "quaternionic" => Suite::Quaternionic,
            "reduction" => Suite::Reduction,
            "all" => Suite::All,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Cartan => "cartan",
            Suite::Algebroid => "algebroid",
            Suite::Hms => "hms",
            Suite::Compat => "compat",
            Suite::Bracket => "bracket",
            Suite::Quaternionic => "quaternionic",
            Suite::Reduction => "reduction",
            Suite::All => "all",
        }
    }

    pub const ALL_NAMES: [&'static str; 8] = [
        "cartan",
        "algebroid",
        "hms",
        "compat",
        "bracket",
        "quaternionic",
        "reduction",
        "all",
    ];
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Eval(#[from] crate::expr::EvalError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Form(#[from] crate::form::FormError),
    #[error(transparent)]
    Algebroid(#[from] crate::algebroid::AlgebroidError),
    #[error(transparent)]
    Plectic(#[from] crate::plectic::PlecticError),
    #[error(transparent)]
    Reduction(#[from] crate::reduction::ReductionError),
}

/// Runs one suite; `All` concatenates every applicable suite.
pub fn run(
    model: &Model,
    suite: Suite,
    points: usize,
    seed: u64,
    tol: f64,
) -> Result<Report, SuiteError> {
    let mut report = Report::new(&model.name, suite.name(), points, seed, tol);
    match suite {
        Suite::Cartan => cartan_suite(model, &mut report)?,
        Suite::Algebroid => algebroid_suite(model, &mut report)?,
        Suite::Hms => hms_suite(model, &mut report)?,
        Suite::Compat => compat_suite(model, &mut report)?,
        Suite::Bracket => bracket_suite(model, &mut report)?,
        Suite::Quaternionic => quaternionic_suite(model, &mut report)?,
        Suite::Reduction => reduction_suite(model, &mut report)?,
        Suite::All => {
            cartan_suite(model, &mut report)?;
            algebroid_suite(model, &mut report)?;
            hms_suite(model, &mut report)?;
            compat_suite(model, &mut report)?;
            bracket_suite(model, &mut report)?;
            quaternionic_suite(model, &mut report)?;
            reduction_suite(model, &mut report)?;
        }
    }
    Ok(report)
}

fn entry_seed(report: &Report) -> u64 {
    report.seed.wrapping_add(report.entries.len() as u64)
}

// ---------------------------------------------------------------------------
// cartan suite
// ---------------------------------------------------------------------------

fn cartan_suite(model: &Model, report: &mut Report) -> Result<(), SuiteError> {
    let points = report.points;
    let tol = report.tol;
    let tags: [(IdentityTag, &str, f64); 6] = [
        (IdentityTag::Cartan1, "L_X = i_X∘d + d∘i_X", tol),
        (IdentityTag::Cartan2, "i_[X,Y] = L_X∘i_Y − i_Y∘L_X", tol),
        (IdentityTag::Cartan3, "L_X∘d = (i_X R)∧· + d∘L_X", tol),
        (IdentityTag::DSquared, "d∘d = R∧·", tol),
        (IdentityTag::Bianchi, "d_End R = 0", tol),
        (
            IdentityTag::DExtConsistency,
            "coefficient formula d = frame-free formula d",
            1e-10,
        ),
    ];
    for (tag, anchor, threshold) in tags {
        let s = entry_seed(report);
        let r = identity_residual(
            &model.chart,
            &model.bundle,
            model.metric.as_ref(),
            tag,
            points,
            s,
        )?;
        report.push(CheckEntry::new(tag.id(), anchor, r, threshold, points, s));
    }
    if let Some(g) = &model.metric {
        let s = entry_seed(report);
        let r = identity_residual(
            &model.chart,
            &model.bundle,
            Some(g),
            IdentityTag::Tilde,
            points,
            s,
        )?;
        report.push(CheckEntry::new(
            "tilde",
            "d(companion ω̃) = dω + (−1)^n ∇ω",
            r,
            tol,
            points,
            s,
        ));
    }
    // flat connections commute with d
    if connection_is_flat(model)? {
        let s = entry_seed(report);
        let r = identity_residual(
            &model.chart,
            &model.bundle,
            model.metric.as_ref(),
            IdentityTag::FlatCommute,
            points,
            s,
        )?;
        report.push(CheckEntry::new(
            "flat-commute",
            "L_X∘d = d∘L_X for a flat connection",
            r,
            1e-9,
            points,
            s,
        ));
    }
    // companion form of a parallel scalar plectic form is closed
    if let (Some(ps), Some(g)) = (&model.plectic, &model.metric) {
        if ps.omega.rank == 1 {
            let s = entry_seed(report);
            let mut sampler = Sampler::new(s);
            let mut parallel = 0.0_f64;
            let mut closed = 0.0_f64;
            for _ in 0..report.points.min(50) {
                let x = sampler.point(&model.chart);
                let wj = ps.omega.jets_at(&x)?;
                parallel = parallel.max(nabla_g_residual(&wj, g, &x)?);
                closed = closed.max(crate::form::tilde_identity_residual(&wj, g, &x)?);
                // d ω̃ itself
                let gamma = g.christoffel(&x)?;
                let d = model.chart.dim;
                let mut conn = Vec::with_capacity(d * d * d);
                for a in 0..d {
                    for b in 0..d {
                        for i in 0..d {
                            conn.push(gamma[(b * d + a) * d + i].neg());
                        }
                    }
                }
                let cot = BundleAt { dim: d, rank: d, conn };
                let dt = cov_ext(&crate::form::tilde(&wj), &cot);
                closed = closed.max(dt.max_abs());
            }
            if parallel < 1e-12 {
                report.push(CheckEntry::new(
                    "tilde-closed-parallel",
                    "companion ω̃ of a parallel ω is closed",
                    closed,
                    1e-9,
                    report.points.min(50),
                    s,
                ));
            }
        }
    }
    Ok(())
}

fn connection_is_flat(model: &Model) -> Result<bool, SuiteError> {
    if model.bundle.conn.is_syntactically_trivial() {
        return Ok(true);
    }
    let mut s = Sampler::new(1);
    for _ in 0..10 {
        let x = s.point(&model.chart);
        let bat = model.bundle.at(&x)?;
        if crate::form::curvature(&bat).max_abs() > 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(∇_{e_b} ω)_J` residual at one point (flatness of the coefficients under
/// the metric connection).
fn nabla_g_residual(
    omega: &crate::form::FormJets,
    g: &crate::geometry::Metric,
    x: &[f64],
) -> Result<f64, SuiteError> {
    let d = omega.dim;
    let gamma = g.christoffel(x)?;
    let ga = |k: usize, i: usize, j: usize| gamma[(k * d + i) * d + j].value();
    let table = mi::indices(d, omega.degree);
    let mut worst = 0.0_f64;
    for jidx in &table {
        for b in 0..d {
            let mut v = omega.coeff(jidx)[0].g(b);
            for (t, &jt) in jidx.iter().enumerate() {
                let rest = mi::remove_at(jidx, t);
                for l in 0..d as u8 {
                    let Some((full, sign)) = mi::insert(&rest, l) else {
                        continue;
                    };
                    let slot = if t % 2 == 0 { 1.0 } else { -1.0 };
                    v -= ga(l as usize, jt as usize, b)
                        * sign
                        * slot
                        * omega.coeff(&full)[0].value();
                }
            }
            worst = worst.max(v.abs());
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// algebroid suite
// ---------------------------------------------------------------------------

fn algebroid_suite(model: &Model, report: &mut Report) -> Result<(), SuiteError> {
    let Some(alg) = &model.algebroid else {
        return Ok(());
    };
    let points = report.points;
    let tol = report.tol;
    let d = model.chart.dim;
    let m = alg.rank;

    let s = entry_seed(report);
    let (anchor_res, jacobi_res) = crate::algebroid::validate(alg, &model.chart, points, s)?;
    report.push(CheckEntry::new(
        "algebroid-anchor",
        "ρ([α,β]) = [ρ(α), ρ(β)] on the frame",
        anchor_res,
        tol,
        points,
        s,
    ));
    report.push(CheckEntry::new(
        "algebroid-jacobi",
        "Jacobi identity of the Leibniz-extended frame bracket",
        jacobi_res,
        tol,
        points,
        s,
    ));

    // scalar differential squares to zero on functions and 1-forms
    {
        let s = entry_seed(report);
        let mut sampler = Sampler::new(s);
        let triv = Connection::trivial(1, d);
        let mut worst = 0.0_f64;
        for step in 0..points {
            let x = sampler.point(&model.chart);
            let aat = alg.at(&x)?;
            let q = step % 2;
            let mut theta = MixedForm::new(d, m, 0, q, 1);
            for ai in mi::indices(m, q) {
                theta.set(&[], &ai, vec![sampler.poly(d, 2)]);
            }
            let tj = theta.jets_at(&x)?;
            let dd = crate::algebroid::algebroid_diff(
                &crate::algebroid::algebroid_diff(&tj, &aat, &triv)?,
                &aat,
                &triv,
            )?;
            worst = worst.max(dd.max_abs());
        }
        report.push(CheckEntry::new(
            "eth-squared",
            "the scalar algebroid differential squares to zero",
            worst,
            tol,
            points,
            s,
        ));
    }

    // Leibniz rule of the A-covariant exterior derivative
    {
        let s = entry_seed(report);
        let mut sampler = Sampler::new(s);
        let mut worst = 0.0_f64;
        let triv = BundleAt::trivial(1, d);
        for _ in 0..points {
            let x = sampler.point(&model.chart);
            let aat = alg.at(&x)?;
            let bat = model.bundle.at(&x)?;
            let mut theta = MixedForm::new(d, m, 0, 1, 1);
            let mut tau = MixedForm::new(d, m, 0, 1, model.bundle.rank);
            for a in 0..m as u8 {
                theta.set(&[], &[a], vec![sampler.poly(d, 2)]);
                tau.set(
                    &[],
                    &[a],
                    (0..model.bundle.rank).map(|_| sampler.poly(d, 2)).collect(),
                );
            }
            let tj = theta.jets_at(&x)?;
            let uj = tau.jets_at(&x)?;
            let lhs = a_cov_ext_deriv(&a_wedge(&tj, &uj), &bat, &aat);
            let dt = mixed_eth(&tj, &triv, &aat);
            let rhs = a_wedge(&dt, &uj)
                .add(&a_wedge(&tj, &a_cov_ext_deriv(&uj, &bat, &aat)).scale(-1.0));
            worst = worst.max(lhs.sub(&rhs).max_abs());
        }
        report.push(CheckEntry::new(
            "eth-leibniz",
            "ð(θ∧τ) = ðθ∧τ + (−1)^k θ∧ðτ",
            worst,
            tol,
            points,
            s,
        ));
    }

    // interior/differential commutation for full contractions, m = 0 and 1
    for mdeg in 0..=1usize {
        let s = entry_seed(report);
        let mut sampler = Sampler::new(s);
        let mut worst = 0.0_f64;
        for _ in 0..points {
            let x = sampler.point(&model.chart);
            let aat = alg.at(&x)?;
            let bat = model.bundle.at(&x)?;
            let phi = random_eform(d, mdeg, model.bundle.rank, &mut sampler);
            let pj = phi.jets_at(&x)?;
            let lhs = mixed_eth(&iota_rho(mdeg, &pj, &aat), &bat, &aat);
            let rhs = iota_rho(mdeg + 1, &cov_ext(&pj, &bat), &aat);
            worst = worst.max(lhs.sub(&rhs).max_abs());
        }
        report.push(CheckEntry::new(
            &format!("iota-commutes-{mdeg}"),
            "ð∘ι^m_ρ = ι^(m+1)_ρ∘d on degree-m forms",
            worst,
            tol,
            points,
            s,
        ));
    }

    // manifold-direction derivative on pure tangent forms equals the plain
    // covariant exterior derivative
    {
        let s = entry_seed(report);
        let mut sampler = Sampler::new(s);
        let mut worst = 0.0_f64;
        for step in 0..points {
            let x = sampler.point(&model.chart);
            let aat = alg.at(&x)?;
            let bat = model.bundle.at(&x)?;
            let deg = step % d.min(3);
            let phi = random_eform(d, deg, model.bundle.rank, &mut sampler);
            let pj = phi.jets_at(&x)?;
            let mut wrapped = MixedJets::zero(d, m, deg, 0, model.bundle.rank);
            for (tp, c) in pj.coeffs.iter().enumerate() {
                wrapped.coeffs[tp][0] = c.clone();
            }
            let via_mixed = mixed_d(&wrapped, &bat, &aat).as_form();
            let direct = cov_ext(&pj, &bat);
            worst = worst.max(via_mixed.sub(&direct).max_abs());
        }
        report.push(CheckEntry::new(
            "mixed-d-q0",
            "mixed derivative on (p,0) forms equals the plain one",
            worst,
            1e-12,
            points,
            s,
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// hms suite
// ---------------------------------------------------------------------------

fn hms_suite(model: &Model, report: &mut Report) -> Result<(), SuiteError> {
    let points = report.points;
    let tol = report.tol;
    if let Some(ps) = &model.plectic {
        let s = entry_seed(report);
        let r = ps.closedness_residual(&model.chart, points, s)?;
        report.push(CheckEntry::new(
            "omega-closed",
            "dω = 0",
            r,
            tol.min(1e-9),
            points,
            s,
        ));
        // nondegeneracy rank at sampled points
        let s = entry_seed(report);
        let mut sampler = Sampler::new(s);
        let d = model.chart.dim;
        let mut min_rank = d;
        for _ in 0..points.min(50) {
            let x = sampler.point(&model.chart);
            min_rank = min_rank.min(nondegeneracy_rank(&ps.omega.jets_at(&x)?));
        }
        let expected_full = !ps.pre_plectic;
        let deficiency = if expected_full { (d - min_rank) as f64 } else { 0.0 };
        report.push(CheckEntry::new(
            "omega-rank",
            if expected_full {
                "ω♭ injective at sampled points"
            } else {
                "structure flagged degenerate; rank reported only"
            },
            deficiency,
            0.5,
            points.min(50),
            s,
        ));
    }
    if let (Some(ps), Some(alg), Some(mu)) = (&model.plectic, &model.algebroid, &model.momentum) {
        let s = entry_seed(report);
        let defect = hms_defect(ps, alg, mu, &model.chart, points, s)?;
        for (p, q, r) in &defect.bidegree {
            report.push(CheckEntry::new(
                &format!("hms-bidegree-{p}-{q}"),
                "(d_∇ + ð_ʊ) μ matches the signed anchor contractions of ω",
                *r,
                tol,
                points,
                s,
            ));
        }
        report.push(CheckEntry::new(
            "hms-random-args",
            "defect re-checked on random argument tuples",
            defect.random_pass,
            tol,
            points,
            s,
        ));
    }
    // potential form differentiates to ω
    if let (Some(pot), Some(ps)) = (&model.potential_form, &model.plectic) {
        let s = entry_seed(report);
        let mut sampler = Sampler::new(s);
        let mut worst = 0.0_f64;
        for _ in 0..points.min(100) {
            let x = sampler.point(&model.chart);
            let bat = ps.bundle.at(&x)?;
            let r = cov_ext(&pot.jets_at(&x)?, &bat).sub(&ps.omega.jets_at(&x)?);
            worst = worst.max(r.max_abs());
        }
        report.push(CheckEntry::new(
            "potential-derivative",
            "d(stored potential form) = ω",
            worst,
            1e-12,
            points.min(100),
            s,
        ));
    }
    // plectic form equals the bundle curvature
    if model.omega_is_curvature {
        if let Some(ps) = &model.plectic {
            let s = entry_seed(report);
            let mut sampler = Sampler::new(s);
            let mut worst = 0.0_f64;
            for _ in 0..points.min(100) {
                let x = sampler.point(&model.chart);
                let bat = model.bundle.at(&x)?;
                let r2 = crate::form::curvature(&bat);
                let wj = ps.omega.jets_at(&x)?;
                for (pos, c) in r2.coeffs.iter().enumerate() {
                    worst = worst.max((c[0].value() - wj.coeffs[pos][0].value()).abs());
                }
            }
            report.push(CheckEntry::new(
                "omega-is-curvature",
                "ω coincides with dA + A∧A of the model bundle",
                worst,
                1e-12,
                points.min(100),
                s,
            ));
        }
    }
    // group-structure form identities
    if let (Some(lambda), Some(alg)) = (&model.mc_form, &model.algebroid) {
        let d = model.chart.dim;
        let r = lambda.rank;
        // structure equation dλ(u,v) = [λ(u), λ(v)] with the frame constants
        let s = entry_seed(report);
        let mut sampler = Sampler::new(s);
        let mut worst = 0.0_f64;
        let triv = BundleAt::trivial(r, d);
        for _ in 0..points {
            let x = sampler.point(&model.chart);
            let aat = alg.at(&x)?;
            let lj = lambda.jets_at(&x)?;
            let dl = cov_ext(&lj, &triv);
            for _ in 0..3 {
                let u = sampler.vector(d);
                let v = sampler.vector(d);
                let lhs = dl.eval(&[&u, &v]);
                let lu = lj.eval(&[&u]);
                let lv = lj.eval(&[&v]);
                for c in 0..r {
                    let mut br = 0.0;
                    for a in 0..r {
                        for b in 0..r {
                            br += lu[a] * lv[b] * aat.c(a, b, c).value();
                        }
                    }
                    worst = worst.max((lhs[c] - br).abs());
                }
            }
        }
        report.push(CheckEntry::new(
            "structure-equation",
            "dλ(u,v) = [λ(u), λ(v)] with the frame constants",
            worst,
            1e-9,
            points,
            s,
        ));
        // pairing identities of the adjoint-type momentum
        if let Some(mu) = &model.momentum {
            let mu0 = mu.top();
            let s = entry_seed(report);
            let mut sampler = Sampler::new(s);
            let mut worst1 = 0.0_f64;
            let mut worst2 = 0.0_f64;
            let triv = BundleAt::trivial(r, d);
            for _ in 0..points {
                let x = sampler.point(&model.chart);
                let aat = alg.at(&x)?;
                let lj = lambda.jets_at(&x)?;
                let dl = cov_ext(&lj, &triv);
                let muj = mu0.jets_at(&x)?;
                for a in 0..alg.rank {
                    let fa = frame(d, alg.rank, a);
                    let mua = pair_section(&muj, &fa);
                    let dmua = cov_ext(&mua, &triv);
                    let ra: Vec<f64> = aat.rho_values(a);
                    let w = sampler.vector(d);
                    // (dμ^α)(W) = dλ(ρα, W)
                    let lhs = dmua.eval(&[&w]);
                    let rhs = dl.eval(&[&ra, &w]);
                    for c in 0..r {
                        worst1 = worst1.max((lhs[c] - rhs[c]).abs());
                    }
                    // ρα(μ^β) = −dλ(ρα, ρβ)
                    for b in 0..alg.rank {
                        let fb = frame(d, alg.rank, b);
                        let mub = pair_section(&muj, &fb);
                        let mut da = vec![0.0; r];
                        for c in 0..r {
                            for i in 0..d {
                                da[c] += ra[i] * mub.coeffs[0][c].g(i);
                            }
                        }
                        let rb: Vec<f64> = aat.rho_values(b);
                        let dlab = dl.eval(&[&ra, &rb]);
                        for c in 0..r {
                            worst2 = worst2.max((da[c] + dlab[c]).abs());
                        }
                    }
                }
            }
            report.push(CheckEntry::new(
                "adjoint-pairing-1",
                "(dμ^α)(W) = dλ(ρ(α), W)",
                worst1,
                1e-9,
                points,
                s,
            ));
            report.push(CheckEntry::new(
                "adjoint-pairing-2",
                "ρ(α)(μ^β) = −dλ(ρ(α), ρ(β))",
                worst2,
                1e-9,
                points,
                s,
            ));
        }
    }
    Ok(())
}

fn frame(dim: usize, rank: usize, a: usize) -> Vec<Jet2> {
    (0..rank)
        .map(|c| Jet2::constant(dim, if c == a { 1.0 } else { 0.0 }))
        .collect()
}

// ---------------------------------------------------------------------------
// compat suite
// ---------------------------------------------------------------------------

fn compat_suite(model: &Model, report: &mut Report) -> Result<(), SuiteError> {
    let (Some(ps), Some(alg), Some(mu)) = (&model.plectic, &model.algebroid, &model.momentum)
    else {
        return Ok(());
    };
    let mu_top = mu.top();
    if mu_top.q != 1 || mu_top.p + 1 != ps.n {
        return Ok(());
    }
    let points = report.points;
    let tol = report.tol;
    let d = model.chart.dim;
    let mut direct = 0.0_f64;
    let mut agreement = 0.0_f64;
    let s = entry_seed(report);
    for a in 0..alg.rank {
        let alpha = ASection::constant_frame(d, alg.rank, a);
        let def = compatibility_defect(ps, alg, mu_top, &alpha, &model.chart, points, s)?;
        direct = direct.max(def.direct);
        agreement = agreement.max(def.route_disagreement);
    }
    report.push(CheckEntry::new(
        "compat-direct",
        "ι_α∘d_∇ μ = d∘ι_α μ on frame sections",
        direct,
        tol,
        points,
        s,
    ));
    report.push(CheckEntry::new(
        "compat-route-agreement",
        "direct commutator equals the connection-term sum",
        agreement,
        tol,
        points,
        s,
    ));
    // pairing gradient: d(μ^α) = ι_{ρ(α)} ω for frame sections
    let s = entry_seed(report);
    let mut sampler = Sampler::new(s);
    let mut worst = 0.0_f64;
    for _ in 0..points {
        let x = sampler.point(&model.chart);
        let aat = alg.at(&x)?;
        let bat = ps.bundle.at(&x)?;
        let muj = mu_top.jets_at(&x)?;
        let wj = ps.omega.jets_at(&x)?;
        for a in 0..alg.rank {
            let mua = pair_section(&muj, &frame(d, alg.rank, a));
            let lhs = cov_ext(&mua, &bat);
            let rhs = interior_values(&aat.rho_values(a), &wj);
            worst = worst.max(lhs.sub(&rhs).max_abs());
        }
    }
    report.push(CheckEntry::new(
        "momentum-pairing-gradient",
        "d(μ^α) = ι_{ρ(α)} ω",
        worst,
        1e-9,
        points,
        s,
    ));
    Ok(())
}

// ---------------------------------------------------------------------------
// bracket suite
// ---------------------------------------------------------------------------

/// Extracts the stored form `μ^{e_a}` from a (p, 1) momentum component.
fn paired_momentum_form(mu: &MixedForm, a: u8) -> EForm {
    assert_eq!(mu.q, 1);
    let mut out = EForm::new(mu.dim, mu.p, mu.rank);
    for ((ti, ai), comps) in mu.entries() {
        if ai == &[a] {
            out.set(ti, comps.clone());
        }
    }
    out
}

fn bracket_suite(model: &Model, report: &mut Report) -> Result<(), SuiteError> {
    let Some(ps) = &model.plectic else {
        return Ok(());
    };
    if ps.pre_plectic {
        return Ok(());
    }
    let points = report.points;
    let tol = report.tol;
    let d = model.chart.dim;
    let inner = model.inner_chart(0.8);

    // The pseudo-Hamiltonian test forms: paired momentum sections when
    // available, random polynomial potentials when the flat map is square.
    let mut phams: Vec<EForm> = Vec::new();
    if let Some(mu) = &model.momentum {
        let top = mu.top();
        if top.q == 1 && top.p + 1 == ps.n {
            for a in 0..top.arank as u8 {
                phams.push(paired_momentum_form(top, a));
            }
        }
    }
    let square_flat = mi::count(d, ps.n) * ps.bundle.rank == d;
    let mut seeder = Sampler::new(report.seed.wrapping_add(777));
    if square_flat && ps.n == 1 {
        for _ in 0..2 {
            let mut f = EForm::new(d, 0, 1);
            f.set_scalar(&[], seeder.poly(d, 2));
            phams.push(f);
        }
    }
    if phams.is_empty() {
        return Ok(());
    }

    // exactness + anchor agreement + route uniqueness
    {
        let s = entry_seed(report);
        let mut sampler = Sampler::new(s);
        let mut exactness = 0.0_f64;
        let mut route_gap = 0.0_f64;
        let mut anchor_gap = 0.0_f64;
        let has_alg = model.algebroid.is_some() && model.momentum.is_some();
        for _ in 0..points.min(60) {
            let x = sampler.point(&inner);
            let wj = ps.omega.jets_at(&x)?;
            let bat = ps.bundle.at(&x)?;
            for (k, phi) in phams.iter().enumerate() {
                let beta = cov_ext(&phi.jets_at(&x)?, &bat);
                let sol = solve_pham_at(&wj, &beta, 1e-6, SolveRoute::Svd)?;
                exactness = exactness.max(sol.residual);
                let sol2 = solve_pham_at(&wj, &beta, 1e-6, SolveRoute::NormalEq)?;
                for i in 0..d {
                    route_gap = route_gap.max((sol.x[i] - sol2.x[i]).abs());
                }
                if has_alg && k < model.algebroid.as_ref().unwrap().rank {
                    let aat = model.algebroid.as_ref().unwrap().at(&x)?;
                    let rho = aat.rho_values(k);
                    for i in 0..d {
                        anchor_gap = anchor_gap.max((sol.x[i] - rho[i]).abs());
                    }
                }
            }
        }
        report.push(CheckEntry::new(
            "pham-exactness",
            "least-squares residual of ω♭ X = dφ",
            exactness,
            1e-10,
            points.min(60),
            s,
        ));
        report.push(CheckEntry::new(
            "pham-uniqueness",
            "two factorizations give the same vector",
            route_gap,
            1e-10,
            points.min(60),
            s,
        ));
        if model.algebroid.is_some() && model.momentum.is_some() {
            report.push(CheckEntry::new(
                "pham-vector-anchor",
                "the solved vector of μ^α is ρ(α)",
                anchor_gap,
                tol,
                points.min(60),
                s,
            ));
        }
    }

    // bracket antisymmetry and route stability
    {
        let s = entry_seed(report);
        let mut sampler = Sampler::new(s);
        let mut antisym = 0.0_f64;
        let mut stability = 0.0_f64;
        for _ in 0..points.min(40) {
            let x = sampler.point(&inner);
            let wj = ps.omega.jets_at(&x)?;
            let bat = ps.bundle.at(&x)?;
            for phi in &phams {
                for psi in &phams {
                    let bphi = cov_ext(&phi.jets_at(&x)?, &bat);
                    let bpsi = cov_ext(&psi.jets_at(&x)?, &bat);
                    let sp = solve_pham_at(&wj, &bphi, 1e-6, SolveRoute::Svd)?;
                    let sq = solve_pham_at(&wj, &bpsi, 1e-6, SolveRoute::Svd)?;
                    let br = pham_bracket_at(&wj, &sp, &sq);
                    let br_swapped = pham_bracket_at(&wj, &sq, &sp);
                    antisym = antisym.max(br.add(&br_swapped).max_abs());
                    let sp2 = solve_pham_at(&wj, &bphi, 1e-6, SolveRoute::NormalEq)?;
                    let sq2 = solve_pham_at(&wj, &bpsi, 1e-6, SolveRoute::NormalEq)?;
                    let br2 = pham_bracket_at(&wj, &sp2, &sq2);
                    stability = stability.max(br.sub(&br2).max_abs());
                }
            }
        }
        report.push(CheckEntry::new(
            "bracket-antisymmetry",
            "{φ,ψ} + {ψ,φ} = 0",
            antisym,
            1e-10,
            points.min(40),
            s,
        ));
        report.push(CheckEntry::new(
            "bracket-route-stability",
            "bracket value independent of the solve path",
            stability,
            1e-9,
            points.min(40),
            s,
        ));
    }

    // the bracket lemma with curvature corrections
    {
        let s = entry_seed(report);
        let mut worst = 0.0_f64;
        for (i, phi) in phams.iter().enumerate() {
            for psi in phams.iter().skip(i) {
                let r = hamlemma_residual(ps, &inner, phi, psi, points.min(25), s, 1e-6)?;
                worst = worst.max(r);
            }
        }
        report.push(CheckEntry::new(
            "hamlemma",
            "ι_{[X_ψ,X_φ]}ω = d{φ,ψ} + curvature corrections",
            worst,
            1e-7,
            points.min(25),
            s,
        ));
    }

    // anti-homomorphism and Jacobi for n = 1 with an algebroid
    if ps.n == 1 {
        if let (Some(alg), Some(mu)) = (&model.algebroid, &model.momentum) {
            let mu_top = mu.top();
            if mu_top.q == 1 && mu_top.p == 0 {
                let s = entry_seed(report);
                let mut sampler = Sampler::new(s);
                let mut worst = 0.0_f64;
                for a in 0..alg.rank {
                    for b in 0..alg.rank {
                        let alpha = ASection::constant_frame(d, alg.rank, a);
                        let beta = ASection::constant_frame(d, alg.rank, b);
                        worst = worst.max(antihom_residual(
                            ps,
                            alg,
                            mu_top,
                            &alpha,
                            &beta,
                            &model.chart,
                            points.min(60),
                            s,
                        )?);
                    }
                }
                // random constant-coefficient sections
                for _ in 0..3 {
                    let alpha = constant_section(d, alg.rank, &mut sampler);
                    let beta = constant_section(d, alg.rank, &mut sampler);
                    worst = worst.max(antihom_residual(
                        ps,
                        alg,
                        mu_top,
                        &alpha,
                        &beta,
                        &model.chart,
                        points.min(60),
                        s,
                    )?);
                }
                report.push(CheckEntry::new(
                    "antihom",
                    "μ^{[α,β]} = −ω(ρ(α), ρ(β))",
                    worst,
                    tol,
                    points.min(60),
                    s,
                ));

                let s = entry_seed(report);
                let mut sampler = Sampler::new(s);
                let mut jworst = 0.0_f64;
                let mut cworst = 0.0_f64;
                for _ in 0..4 {
                    let alpha = constant_section(d, alg.rank, &mut sampler);
                    let beta = constant_section(d, alg.rank, &mut sampler);
                    let gamma = constant_section(d, alg.rank, &mut sampler);
                    let jr = jacobi_residual(
                        ps,
                        alg,
                        &alpha,
                        &beta,
                        &gamma,
                        &model.chart,
                        points.min(60),
                        s,
                    )?;
                    jworst = jworst.max(jr.jacobi);
                    cworst = cworst.max(jr.closedness_identity);
                }
                report.push(CheckEntry::new(
                    "jacobi",
                    "cyclic sum of nested brackets vanishes",
                    jworst,
                    tol,
                    points.min(60),
                    s,
                ));
                report.push(CheckEntry::new(
                    "jacobi-closedness-identity",
                    "dω(ρα, ρβ, ργ) = 2 × Jacobi sum",
                    cworst,
                    tol,
                    points.min(60),
                    s,
                ));
            }
        }
    }
    Ok(())
}

fn constant_section(dim: usize, rank: usize, s: &mut Sampler) -> ASection {
    ASection {
        comps: (0..rank)
            .map(|_| SmoothFunction::from_expr(Expr::Num(s.coeff(), (0, 0)), dim).unwrap())
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// quaternionic suite
// ---------------------------------------------------------------------------

fn quaternionic_suite(model: &Model, report: &mut Report) -> Result<(), SuiteError> {
    let Some(triple) = &model.theta_triple else {
        return Ok(());
    };
    let points = report.points;
    let d = model.chart.dim;
    let (theta, fourform) = build_theta(triple)?;

    {
        let s = entry_seed(report);
        let mut sampler = Sampler::new(s);
        let tbat = BundleAt::trivial(3, d);
        let sbat = BundleAt::trivial(1, d);
        let mut closed = 0.0_f64;
        let mut four_closed = 0.0_f64;
        let mut min_rank = d;
        for _ in 0..points.min(100) {
            let x = sampler.point(&model.chart);
            let tj = theta.jets_at(&x)?;
            closed = closed.max(cov_ext(&tj, &tbat).max_abs());
            four_closed = four_closed.max(cov_ext(&fourform.jets_at(&x)?, &sbat).max_abs());
            min_rank = min_rank.min(nondegeneracy_rank(&tj));
        }
        report.push(CheckEntry::new(
            "theta-closed",
            "the triple-valued 2-form is closed (flat proxy connection)",
            closed,
            1e-12,
            points.min(100),
            s,
        ));
        report.push(CheckEntry::new(
            "fourform-closed",
            "d(Σ ω_i ∧ ω_i) = 0",
            four_closed,
            1e-12,
            points.min(100),
            s,
        ));
        report.push(CheckEntry::new(
            "theta-rank",
            "the triple-valued 2-form has injective flat map",
            (d - min_rank) as f64,
            0.5,
            points.min(100),
            s,
        ));
    }

    let (Some(alg), Some(mu)) = (&model.algebroid, &model.momentum) else {
        return Ok(());
    };
    let f_section = mu.top();
    if f_section.q != 1 || f_section.p != 0 || f_section.rank != 3 {
        return Ok(());
    }
    let mut defining = 0.0_f64;
    let mut bracket_cond = 0.0_f64;
    let s = entry_seed(report);
    for a in 0..alg.rank {
        for b in (a + 1)..alg.rank {
            let gr = gl_residual(
                triple,
                alg,
                f_section,
                a,
                b,
                &model.chart,
                points.min(60),
                s,
            )?;
            defining = defining.max(gr.defining);
            bracket_cond = bracket_cond.max(gr.bracket_condition);
        }
    }
    report.push(CheckEntry::new(
        "gl-defining",
        "∇ f_V = Σ_i (ι_V ω_i) ⊗ ω_i for the frame fields",
        defining,
        1e-9,
        points.min(60),
        s,
    ));
    report.push(CheckEntry::new(
        "gl-bracket-condition",
        "f_[V1,V2] = −Σ_i ω_i(V1,V2) ω_i",
        bracket_cond,
        1e-9,
        points.min(60),
        s,
    ));

    // the same bracket through the generic pointwise solves on Θ
    {
        let s = entry_seed(report);
        let mut sampler = Sampler::new(s);
        let inner = model.inner_chart(0.8);
        let tbat = BundleAt::trivial(3, d);
        let mut vec_gap = 0.0_f64;
        let mut bracket_gap = 0.0_f64;
        for _ in 0..points.min(30) {
            let x = sampler.point(&inner);
            let tj = theta.jets_at(&x)?;
            let aat = alg.at(&x)?;
            let fj = f_section.jets_at(&x)?;
            let mut sols = Vec::new();
            for a in 0..alg.rank {
                let fa = pair_section(&fj, &frame(d, alg.rank, a));
                let beta = cov_ext(&fa, &tbat);
                let sol = solve_pham_at(&tj, &beta, 1e-6, SolveRoute::Svd)?;
                let rho = aat.rho_values(a);
                for i in 0..d {
                    vec_gap = vec_gap.max((sol.x[i] - rho[i]).abs());
                }
                sols.push(sol);
            }
            for a in 0..alg.rank {
                for b in 0..alg.rank {
                    let br = pham_bracket_at(&tj, &sols[a], &sols[b]);
                    let ra = aat.rho_values(a);
                    let rb = aat.rho_values(b);
                    let direct = tj.eval(&[&ra, &rb]);
                    for f in 0..3 {
                        bracket_gap =
                            bracket_gap.max((br.coeffs[0][f].value() - direct[f]).abs());
                    }
                }
            }
        }
        report.push(CheckEntry::new(
            "gl-pham-vector",
            "the solved vector of f_V on the triple form is V",
            vec_gap,
            1e-9,
            points.min(30),
            s,
        ));
        report.push(CheckEntry::new(
            "gl-bracket-via-solve",
            "{f_V1, f_V2} from solves equals the triple form on (V1, V2)",
            bracket_gap,
            1e-9,
            points.min(30),
            s,
        ));
    }

    // the triple-structure anti-homomorphism through the momentum route
    if let Some(ps) = &model.plectic {
        if ps.n == 1 {
            let s = entry_seed(report);
            let mut worst = 0.0_f64;
            for a in 0..alg.rank {
                for b in 0..alg.rank {
                    let alpha = ASection::constant_frame(d, alg.rank, a);
                    let beta = ASection::constant_frame(d, alg.rank, b);
                    worst = worst.max(antihom_residual(
                        ps,
                        alg,
                        f_section,
                        &alpha,
                        &beta,
                        &model.chart,
                        points.min(60),
                        s,
                    )?);
                }
            }
            report.push(CheckEntry::new(
                "triple-antihom",
                "μ^{[α,β]} = −ω(ρ(α), ρ(β)) on the triple structure",
                worst,
                1e-9,
                points.min(60),
                s,
            ));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// reduction suite
// ---------------------------------------------------------------------------

fn reduction_suite(model: &Model, report: &mut Report) -> Result<(), SuiteError> {
    let (Some(ps), Some(alg), Some(mu)) = (&model.plectic, &model.algebroid, &model.momentum)
    else {
        return Ok(());
    };
    let mu_top = mu.top();
    if mu_top.q != 1 || mu_top.p != 0 {
        return Ok(());
    }
    let Some(zero_base) = &model.zero_base else {
        return Ok(());
    };
    let points = report.points;
    let d = model.chart.dim;

    // membership and subspace inclusions at the designated base point
    {
        let s = entry_seed(report);
        let scalars = crate::reduction::momentum_scalars(mu_top, zero_base)?;
        let member_res = scalars.iter().map(|j| j.value().abs()).fold(0.0, f64::max);
        report.push(CheckEntry::new(
            "zero-membership",
            "the designated base point lies on the zero set",
            member_res,
            1e-10,
            1,
            s,
        ));
        let (nabla, ortho) = subspace_lemma_check(&ps.omega, alg, mu_top, zero_base, 1e-8)?;
        report.push(CheckEntry::new(
            "subspace-nabla",
            "tangent vectors of the zero set annihilate ∇μ",
            nabla,
            1e-10,
            1,
            s,
        ));
        report.push(CheckEntry::new(
            "subspace-ortho",
            "tangent vectors are ω-orthogonal to the anchored directions",
            ortho,
            1e-10,
            1,
            s,
        ));
    }

    // transversality: with an explicit quotient the anchored image lies
    // inside the zero-set tangent space, so the condition must be violated
    {
        let s = entry_seed(report);
        let rep = transversality_check(mu_top, alg, zero_base, 1e-8)?;
        if model.quotient.is_some() {
            report.push(CheckEntry::new(
                "transversality-expect-violated",
                "T_z(zero set) + Im ρ is a proper subspace here",
                if rep.satisfied { 1.0 } else { 0.0 },
                0.5,
                1,
                s,
            ));
        } else {
            report.push(CheckEntry::new(
                "transversality-rank",
                &format!(
                    "rank report: tangent {} + anchor {} span {} of {}",
                    rep.tangent_rank, rep.anchor_rank, rep.combined_rank, rep.dim
                ),
                0.0,
                0.5,
                1,
                s,
            ));
        }
    }

    // orbit endpoints stay on the zero set (100 flow words)
    {
        let s = entry_seed(report);
        let orbit = orbit_sample(
            &model.chart,
            alg,
            mu_top,
            zero_base,
            OrbitMode::AnchorAll,
            100,
            s,
            1e-8,
        )?;
        report.push(CheckEntry::new(
            "orbit-invariance",
            "anchored flow words preserve the zero set",
            orbit.worst_membership,
            1e-8,
            100,
            s,
        ));
    }

    // plectic form invariance under the anchored flows
    {
        let s = entry_seed(report);
        let inner = model.inner_chart(0.25);
        let mut worst = 0.0_f64;
        for a in 0..alg.rank {
            worst = worst.max(invariance_residual_form(
                &model.chart,
                &inner,
                &ps.omega,
                &alg.anchor_field(a),
                0.5,
                points.min(25),
                s,
            )?);
        }
        report.push(CheckEntry::new(
            "omega-flow-invariance",
            "pullback of ω along anchored flows is ω",
            worst,
            1e-6,
            points.min(25),
            s,
        ));
    }

    // fiber-valued functions built from the quotient projection are
    // constant along the anchored flows
    if let Some(q) = &model.quotient {
        let s = entry_seed(report);
        let inner = model.inner_chart(0.25);
        let comps: Vec<SmoothFunction> = q
            .projection
            .iter()
            .map(|p| {
                SmoothFunction::from_expr(Expr::Sin(Box::new(p.ast().clone()), (0, 0)), d).unwrap()
            })
            .collect();
        let mut worst = 0.0_f64;
        for a in 0..alg.rank {
            worst = worst.max(crate::reduction::invariance_residual_function(
                &model.chart,
                &inner,
                &comps,
                &alg.anchor_field(a),
                0.5,
                points.min(25),
                s,
            )?);
        }
        report.push(CheckEntry::new(
            "section-flow-invariance",
            "projection-built sections are constant along anchored flows",
            worst,
            1e-8,
            points.min(25),
            s,
        ));
    }

    // flow accuracy on periodic charts: a full revolution returns
    if model.chart.periodic.iter().all(|&p| p) {
        let s = entry_seed(report);
        let mut sampler = Sampler::new(s);
        let mut worst = 0.0_f64;
        for _ in 0..5 {
            let z = sampler.point(&model.chart);
            for a in 0..alg.rank {
                let end = flow(&model.chart, &alg.anchor_field(a), &z, crate::geometry::TAU)?;
                for i in 0..d {
                    let mut diff = (end[i] - z[i]).abs();
                    if model.chart.periodic[i] {
                        let w = model.chart.hi[i] - model.chart.lo[i];
                        diff = diff.min((w - diff).abs());
                    }
                    worst = worst.max(diff);
                }
            }
        }
        report.push(CheckEntry::new(
            "flow-roundtrip",
            "flowing a full period returns the start point",
            worst,
            1e-8,
            5,
            s,
        ));
    }

    // quotient verification
    if let Some(q) = &model.quotient {
        let qd = q.chart.dim;
        // pullback relation and agreement with the expected reduced form
        {
            let s = entry_seed(report);
            let mut sampler = Sampler::new(s);
            let mut pullback = 0.0_f64;
            let mut expected_gap = 0.0_f64;
            let mut closedness = 0.0_f64;
            let qbat = BundleAt::trivial(ps.omega.rank, qd);
            for _ in 0..points.min(60) {
                let y = sampler.point(&q.chart);
                let red = q.reduced_form_jets(&ps.omega, y.as_slice())?;
                // against the catalog's expected reduced coefficients
                if let Some(exp) = &q.expected_reduced {
                    let ej = exp.jets_at(&y)?;
                    expected_gap = expected_gap.max(red.sub(&ej).max_abs());
                }
                // the characterizing equation on random quotient vectors:
                // ω_red(dπ û_a, dπ û_b) = ω_z(û_a, û_b) with û the lifts
                let (z, lift) = q.lift_jets(&y)?;
                let wz = ps.omega.jets_at(&z)?;
                let a = sampler.vector(qd);
                let b = sampler.vector(qd);
                let lift_vec = |w: &[f64]| -> Vec<f64> {
                    (0..d)
                        .map(|i| (0..qd).map(|j| lift[i].g(j) * w[j]).sum())
                        .collect()
                };
                let u = lift_vec(&a);
                let v = lift_vec(&b);
                // dπ(û) must reproduce the quotient vector
                let mut dpi_gap = 0.0_f64;
                for (j, p) in q.projection.iter().enumerate() {
                    let pj = p.eval_jet2(&z)?;
                    let got: f64 = (0..d).map(|i| pj.g(i) * u[i]).sum();
                    dpi_gap = dpi_gap.max((got - a[j]).abs());
                }
                pullback = pullback.max(dpi_gap);
                let amb = wz.eval(&[&u, &v]);
                let reduced = red.eval(&[&a, &b]);
                for f in 0..ps.omega.rank {
                    pullback = pullback.max((amb[f] - reduced[f]).abs());
                }
                // closedness of the reduced coefficients on the quotient chart
                closedness = closedness.max(cov_ext(&red, &qbat).max_abs());
            }
            report.push(CheckEntry::new(
                "pullback-relation",
                "the reduced form pulls back to ω on zero-set lifts",
                pullback,
                1e-8,
                points.min(60),
                s,
            ));
            if q.expected_reduced.is_some() {
                report.push(CheckEntry::new(
                    "reduced-form-expected",
                    "reduced coefficients match the catalog's closed form",
                    expected_gap,
                    1e-8,
                    points.min(60),
                    s,
                ));
            }
            report.push(CheckEntry::new(
                "reduced-closedness",
                "the reduced 2-form is closed on the quotient chart",
                closedness,
                1e-8,
                points.min(60),
                s,
            ));
        }

        // cross-representative well-definedness of the reduced form
        {
            let s = entry_seed(report);
            let mut sampler = Sampler::new(s);
            let mut worst = 0.0_f64;
            for _ in 0..10 {
                let y = sampler.point(&q.chart);
                let (z, lift) = q.lift_jets(&y)?;
                let a = sampler.vector(qd);
                let b = sampler.vector(qd);
                let lift_vec = |w: &[f64]| -> Vec<f64> {
                    (0..d)
                        .map(|i| (0..qd).map(|j| lift[i].g(j) * w[j]).sum())
                        .collect()
                };
                let u = lift_vec(&a);
                let v = lift_vec(&b);
                let word: Vec<(usize, f64)> = (0..2)
                    .map(|_| (sampler.usize_below(alg.rank), sampler.range(-0.8, 0.8)))
                    .collect();
                let pair = reduced_form_cross(
                    &model.chart,
                    alg,
                    mu_top,
                    &ps.omega,
                    &z,
                    &u,
                    &v,
                    &word,
                    &mut sampler,
                    1e-7,
                )?;
                worst = worst.max(pair.residual);
            }
            report.push(CheckEntry::new(
                "cross-representative-form",
                "reduced form value independent of the representative",
                worst,
                1e-6,
                10,
                s,
            ));
        }

        // cross-representative well-definedness of the reduced connection
        {
            let s = entry_seed(report);
            let mut sampler = Sampler::new(s);
            // an invariant section: smooth functions of the projection
            let comps: Vec<SmoothFunction> = q
                .projection
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let ast = if k % 2 == 0 {
                        Expr::Sin(Box::new(p.ast().clone()), (0, 0))
                    } else {
                        Expr::Cos(Box::new(p.ast().clone()), (0, 0))
                    };
                    SmoothFunction::from_expr(ast, d).unwrap()
                })
                .collect();
            let mut worst = 0.0_f64;
            for _ in 0..10 {
                let y = sampler.point(&q.chart);
                let (z, lift) = q.lift_jets(&y)?;
                let a = sampler.vector(qd);
                let u: Vec<f64> = (0..d)
                    .map(|i| (0..qd).map(|j| lift[i].g(j) * a[j]).sum())
                    .collect();
                let word: Vec<(usize, f64)> = (0..2)
                    .map(|_| (sampler.usize_below(alg.rank), sampler.range(-0.8, 0.8)))
                    .collect();
                let pair = reduced_connection_cross(
                    &model.chart,
                    alg,
                    mu_top,
                    &comps,
                    &z,
                    &u,
                    &word,
                    &mut sampler,
                    1e-7,
                )?;
                worst = worst.max(pair.residual);
            }
            report.push(CheckEntry::new(
                "cross-representative-connection",
                "directional derivative of invariant sections is well defined",
                worst,
                1e-6,
                10,
                s,
            ));
        }
    }
    Ok(())
}
