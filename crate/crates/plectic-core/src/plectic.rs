//! Bundle-valued plectic structures and their Hamiltonian-type machinery:
//! nondegeneracy ranks, pointwise pseudo-Hamiltonian solves with implicit
//! Jacobians, the induced bracket, momentum-section defect checkers, the
//! compatibility and bracket-homomorphism checks, and the quaternionic-style
//! triple constructions.
//!
//! Pseudo-Hamiltonian vector fields are pointwise least-squares solves, not
//! closed-form fields; the Jacobians that brackets need come from implicit
//! differentiation of the linear system, never from finite differences.

use nalgebra::{DMatrix, DVector};

use crate::algebroid::{
    anchor_of, iota_rho, mixed_d, mixed_eth, pair_section, section_bracket, ASection, Algebroid,
    MixedForm, MixedJets,
};
use crate::expr::EvalError;
use crate::form::{
    cov_ext, interior_jets, interior_values, Bundle, BundleAt, EForm, FormJets,
};
use crate::geometry::{Chart, GeometryError};
use crate::jet::Jet2;
use crate::multi_index as mi;
use crate::sample::Sampler;

/// Relative singular-value threshold for rank decisions.
pub const RANK_EPS: f64 = 1e-10;

/// An E-valued (pre-)n-plectic structure: a closed (n+1)-form on a bundle.
#[derive(Clone, Debug)]
pub struct PlecticStructure {
    pub n: usize,
    pub omega: EForm,
    pub bundle: Bundle,
    /// Degenerate structures are allowed when flagged.
    pub pre_plectic: bool,
}

impl PlecticStructure {
    pub fn new(omega: EForm, bundle: Bundle, pre_plectic: bool) -> PlecticStructure {
        assert!(omega.degree >= 2, "a plectic form has degree n+1 >= 2");
        assert_eq!(omega.rank, bundle.rank);
        PlecticStructure {
            n: omega.degree - 1,
            omega,
            bundle,
            pre_plectic,
        }
    }

    /// Max residual of `d^E_∇ ω` over sampled points.
    pub fn closedness_residual(
        &self,
        chart: &Chart,
        samples: usize,
        seed: u64,
    ) -> Result<f64, PlecticError> {
        let mut s = Sampler::new(seed);
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let x = s.point(chart);
            let wj = self.omega.jets_at(&x)?;
            let bat = self.bundle.at(&x)?;
            worst = worst.max(cov_ext(&wj, &bat).max_abs());
        }
        Ok(worst)
    }
}

/// A formal sum `μ = Σ_k μ_k` of mixed-bidegree components, `μ_k` of
/// bidegree `(k, n−k)`.
#[derive(Clone, Debug)]
pub struct MomentumSection {
    pub components: Vec<MixedForm>,
}

impl MomentumSection {
    pub fn single(mu: MixedForm) -> MomentumSection {
        MomentumSection {
            components: vec![mu],
        }
    }

    /// The top component `μ_{n−1}` (the one the compatibility notion uses).
    pub fn top(&self) -> &MixedForm {
        self.components.last().expect("momentum section has components")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlecticError {
    #[error("plectic form degenerate at sample point: rank {rank} < dim {dim}")]
    Degenerate { rank: usize, dim: usize },
    #[error("form is not pseudo-Hamiltonian at sample point: residual {residual:.3e} > tol {tol:.3e}")]
    NotPseudoHamiltonian { residual: f64, tol: f64 },
    #[error("operation requires n = 1, structure has n = {0}")]
    NeedsDegreeOne(usize),
    #[error("chart dimension must be divisible by 4 for a quaternionic triple, got {0}")]
    DimensionNotQuaternionic(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Which least-squares factorization backs a pointwise solve. Both must give
/// the same pseudo-Hamiltonian vector when the flat map is injective; the
/// well-definedness checks re-solve along the other route.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveRoute {
    Svd,
    NormalEq,
}

/// One pointwise pseudo-Hamiltonian solve: the vector, its Jacobian from
/// implicit differentiation, the attained residual and the flat-map rank.
#[derive(Clone, Debug)]
pub struct PHamSolve {
    pub x: Vec<f64>,
    /// `jac[k*dim + j] = ∂_j X^k`
    pub jac: Vec<f64>,
    pub residual: f64,
    pub rank: usize,
}

impl PHamSolve {
    /// The solved vector as order-1 jets (value + first derivatives).
    pub fn vector_jets(&self, dim: usize) -> Vec<Jet2> {
        (0..dim)
            .map(|k| {
                Jet2::from_parts(
                    dim,
                    self.x[k],
                    (0..dim).map(|j| self.jac[k * dim + j]).collect(),
                    Vec::new(),
                )
            })
            .collect()
    }
}

/// The flat map `ω♭_x` as a (count(d,n)·r) × d matrix of jets:
/// row (I, a), column j holds `(ι_{e_j} ω)^a_I`.
pub fn flat_matrix(omega: &FormJets) -> Vec<Vec<Jet2>> {
    let d = omega.dim;
    let r = omega.rank;
    let n = omega.degree - 1;
    let table = mi::indices(d, n);
    let mut rows = Vec::with_capacity(table.len() * r);
    for idx in &table {
        for a in 0..r {
            let mut row = Vec::with_capacity(d);
            for j in 0..d as u8 {
                row.push(match mi::insert(idx, j) {
                    Some((full, sign)) => omega.coeff(&full)[a].scale(sign),
                    None => Jet2::constant(d, 0.0),
                });
            }
            rows.push(row);
        }
    }
    rows
}

fn value_matrix(rows: &[Vec<Jet2>]) -> DMatrix<f64> {
    let nr = rows.len();
    let nc = rows[0].len();
    DMatrix::from_fn(nr, nc, |i, j| rows[i][j].value())
}

/// Rank of `ω♭_x` by singular values (threshold `RANK_EPS · σ_max`).
pub fn nondegeneracy_rank(omega: &FormJets) -> usize {
    let rows = flat_matrix(omega);
    if rows.is_empty() {
        return 0;
    }
    let m = value_matrix(&rows);
    matrix_rank(&m)
}

fn matrix_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_EPS * smax).count()
}

fn lsq_solve(w: &DMatrix<f64>, b: &DVector<f64>, route: SolveRoute) -> DVector<f64> {
    match route {
        SolveRoute::Svd => {
            let svd = w.clone().svd(true, true);
            let eps = RANK_EPS * svd.singular_values.max();
            svd.solve(b, eps).unwrap()
        }
        SolveRoute::NormalEq => {
            let wt = w.transpose();
            let gram = &wt * w;
            let rhs = &wt * b;
            match gram.clone().cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => {
                    // numerically semi-definite Gram matrix: fall back
                    let svd = gram.svd(true, true);
                    svd.solve(&rhs, RANK_EPS).unwrap()
                }
            }
        }
    }
}

/// Solves `ω♭_x X = β_x` in the least-squares sense, where `β = d^E_∇ φ` is
/// given as evaluated jets (order ≥ 1 so the implicit Jacobian exists).
pub fn solve_pham_at(
    omega: &FormJets,
    beta: &FormJets,
    tol: f64,
    route: SolveRoute,
) -> Result<PHamSolve, PlecticError> {
    let d = omega.dim;
    assert_eq!(beta.degree, omega.degree - 1);
    assert_eq!(beta.rank, omega.rank);
    let rows = flat_matrix(omega);
    let w = value_matrix(&rows);
    let rank = matrix_rank(&w);
    if rank < d {
        return Err(PlecticError::Degenerate { rank, dim: d });
    }
    let bvec: Vec<f64> = beta
        .coeffs
        .iter()
        .flat_map(|c| c.iter().map(Jet2::value))
        .collect();
    let b = DVector::from_vec(bvec);
    let x = lsq_solve(&w, &b, route);
    let residual = (&w * &x - &b).amax();
    if residual > tol {
        return Err(PlecticError::NotPseudoHamiltonian { residual, tol });
    }
    // implicit differentiation: W ∂_j X = ∂_j β − (∂_j W) X
    let mut jac = vec![0.0; d * d];
    for j in 0..d {
        let db: Vec<f64> = beta
            .coeffs
            .iter()
            .flat_map(|c| c.iter().map(|jet| jet.g(j)))
            .collect();
        let mut rhs = DVector::from_vec(db);
        for (ri, row) in rows.iter().enumerate() {
            let mut s = 0.0;
            for (ci, entry) in row.iter().enumerate() {
                s += entry.g(j) * x[ci];
            }
            rhs[ri] -= s;
        }
        let dxj = lsq_solve(&w, &rhs, route);
        for k in 0..d {
            jac[k * d + j] = dxj[k];
        }
    }
    Ok(PHamSolve {
        x: x.iter().cloned().collect(),
        jac,
        residual,
        rank,
    })
}

/// Convenience wrapper: solve for a stored (n−1)-form at a point.
pub fn solve_pham(
    ps: &PlecticStructure,
    phi: &EForm,
    x: &[f64],
    tol: f64,
    route: SolveRoute,
) -> Result<PHamSolve, PlecticError> {
    let wj = ps.omega.jets_at(x)?;
    let bat = ps.bundle.at(x)?;
    let beta = cov_ext(&phi.jets_at(x)?, &bat);
    solve_pham_at(&wj, &beta, tol, route)
}

/// The bracket `{φ, ψ} = ι_{X_ψ} ι_{X_φ} ω` at a point, as an (n−1)-form
/// with order-1 jet coefficients (enough to differentiate once more).
pub fn pham_bracket_at(
    omega: &FormJets,
    solve_phi: &PHamSolve,
    solve_psi: &PHamSolve,
) -> FormJets {
    let d = omega.dim;
    let xphi = solve_phi.vector_jets(d);
    let xpsi = solve_psi.vector_jets(d);
    interior_jets(&xpsi, &interior_jets(&xphi, omega))
}

/// Residual of the bracket lemma at sampled points:
/// `ι_{[X_ψ,X_φ]} ω − d^E_∇{φ,ψ} − ι_{X_ψ}(d²φ) + ι_{X_φ}(d²ψ)`,
/// with the curvature action entering through the square of the covariant
/// exterior derivative. For flat connections the correction terms vanish.
pub fn hamlemma_residual(
    ps: &PlecticStructure,
    chart: &Chart,
    phi: &EForm,
    psi: &EForm,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<f64, PlecticError> {
    let mut s = Sampler::new(seed);
    let d = chart.dim;
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let x = s.point(chart);
        let wj = ps.omega.jets_at(&x)?;
        let bat = ps.bundle.at(&x)?;
        let pj = phi.jets_at(&x)?;
        let qj = psi.jets_at(&x)?;
        let sol_phi = solve_pham_at(&wj, &cov_ext(&pj, &bat), tol, SolveRoute::Svd)?;
        let sol_psi = solve_pham_at(&wj, &cov_ext(&qj, &bat), tol, SolveRoute::Svd)?;
        // [X_ψ, X_φ]^k = Σ_i (X_ψ^i ∂_i X_φ^k − X_φ^i ∂_i X_ψ^k)
        let br: Vec<f64> = (0..d)
            .map(|k| {
                (0..d)
                    .map(|i| {
                        sol_psi.x[i] * sol_phi.jac[k * d + i]
                            - sol_phi.x[i] * sol_psi.jac[k * d + i]
                    })
                    .sum()
            })
            .collect();
        let lhs = interior_values(&br, &wj);
        let bracket = pham_bracket_at(&wj, &sol_phi, &sol_psi);
        let mut rhs = cov_ext(&bracket, &bat);
        let ddphi = cov_ext(&cov_ext(&pj, &bat), &bat);
        let ddpsi = cov_ext(&cov_ext(&qj, &bat), &bat);
        rhs = rhs.add(&interior_values(&sol_psi.x, &ddphi));
        rhs = rhs.sub(&interior_values(&sol_phi.x, &ddpsi));
        worst = worst.max(lhs.sub(&rhs).max_abs());
    }
    Ok(worst)
}

/// Per-bidegree residuals of the momentum-section defining equation
/// `(d_∇ + ð_ʊ) μ = Σ_k (−1)^{n−k} ι_ρ^{n+1−k} ω`, plus a second pass on
/// random (non-frame) argument tuples that guards the index bookkeeping.
pub struct HmsDefect {
    /// `(p, q, max residual)` for each receiving bidegree `(k, n+1−k)`.
    pub bidegree: Vec<(usize, usize, f64)>,
    pub random_pass: f64,
}

pub fn hms_defect(
    ps: &PlecticStructure,
    alg: &Algebroid,
    mu: &MomentumSection,
    chart: &Chart,
    samples: usize,
    seed: u64,
) -> Result<HmsDefect, PlecticError> {
    let n = ps.n;
    let d = chart.dim;
    let m = alg.rank;
    let mut s = Sampler::new(seed);
    let mut per = vec![0.0_f64; n + 1];
    let mut random_pass = 0.0_f64;
    for _ in 0..samples {
        let x = s.point(chart);
        let wj = ps.omega.jets_at(&x)?;
        let bat = ps.bundle.at(&x)?;
        let aat = alg.at(&x)?;
        let comp_jets: Vec<MixedJets> = mu
            .components
            .iter()
            .map(|c| c.jets_at(&x))
            .collect::<Result<_, _>>()?;
        for k in 0..=n {
            // LHS in bidegree (k, n+1−k): d_∇ μ_{k−1} + ð_ʊ μ_k
            let mut lhs = MixedJets::zero(d, m, k, n + 1 - k, ps.bundle.rank);
            if k >= 1 && k - 1 < comp_jets.len() {
                lhs = lhs.add(&mixed_d(&comp_jets[k - 1], &bat, &aat));
            }
            if k < comp_jets.len() {
                lhs = lhs.add(&mixed_eth(&comp_jets[k], &bat, &aat));
            }
            let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = iota_rho(n + 1 - k, &wj, &aat).scale(sign);
            let diff = lhs.sub(&rhs);
            per[k] = per[k].max(diff.max_abs());
            // second pass: contract against random argument tuples
            let tvecs: Vec<Vec<f64>> = (0..k).map(|_| s.vector(d)).collect();
            let avecs: Vec<Vec<f64>> = (0..n + 1 - k).map(|_| s.vector(m)).collect();
            let tv: Vec<&[f64]> = tvecs.iter().map(Vec::as_slice).collect();
            let av: Vec<&[f64]> = avecs.iter().map(Vec::as_slice).collect();
            for v in diff.eval(&tv, &av) {
                random_pass = random_pass.max(v.abs());
            }
        }
    }
    Ok(HmsDefect {
        bidegree: (0..=n).map(|k| (k, n + 1 - k, per[k])).collect(),
        random_pass,
    })
}

/// Compatibility defect of the top component: max residual of the direct
/// commutator `(ι_α ∘ d_∇ − d^E_∇ ∘ ι_α) μ_{n−1}`, the equivalent
/// connection-term sum, and the disagreement of the two routes.
pub struct CompatibilityDefect {
    pub direct: f64,
    pub connection_sum: f64,
    pub route_disagreement: f64,
}

pub fn compatibility_defect(
    ps: &PlecticStructure,
    alg: &Algebroid,
    mu_top: &MixedForm,
    alpha: &ASection,
    chart: &Chart,
    samples: usize,
    seed: u64,
) -> Result<CompatibilityDefect, PlecticError> {
    let n = ps.n;
    assert_eq!(mu_top.p, n - 1);
    assert_eq!(mu_top.q, 1);
    let d = chart.dim;
    let m = alg.rank;
    let mut s = Sampler::new(seed);
    let mut direct = 0.0_f64;
    let mut prop = 0.0_f64;
    let mut disagree = 0.0_f64;
    for _ in 0..samples {
        let x = s.point(chart);
        let bat = ps.bundle.at(&x)?;
        let aat = alg.at(&x)?;
        let muj = mu_top.jets_at(&x)?;
        let aj = alpha.jets(&x)?;
        let lhs = pair_section(&mixed_d(&muj, &bat, &aat), &aj);
        let rhs = cov_ext(&pair_section(&muj, &aj), &bat);
        let direct_form = lhs.sub(&rhs);
        direct = direct.max(direct_form.max_abs());
        // Σ_t (−1)^t (μ_{n−1})^{∇^A_{∂_{j_t}} α}(e_{J∖t})
        // with ∇^A_{∂_i} α = (∂_i α^c + aconn^c_{b,i} α^b) e_c
        let nabla_alpha: Vec<Vec<Jet2>> = (0..d)
            .map(|i| {
                (0..m)
                    .map(|c| {
                        let mut acc = aj[c].partial(i);
                        for b in 0..m {
                            acc = acc.add(&aat.aconn(c, b, i).mul(&aj[b]));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let paired: Vec<FormJets> = (0..d)
            .map(|i| pair_section(&muj, &nabla_alpha[i]))
            .collect();
        let table = mi::indices(d, n);
        let mut sum_form = FormJets::zero(d, n, ps.bundle.rank);
        for (pos, jidx) in table.iter().enumerate() {
            for (t, &jt) in jidx.iter().enumerate() {
                let rest = mi::remove_at(jidx, t);
                let c = paired[jt as usize].coeff(&rest);
                let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
                for f in 0..ps.bundle.rank {
                    sum_form.coeffs[pos][f] = sum_form.coeffs[pos][f].add(&c[f].scale(sign));
                }
            }
        }
        prop = prop.max(sum_form.max_abs());
        // the direct commutator equals minus the connection-term sum
        disagree = disagree.max(direct_form.add(&sum_form).max_abs());
    }
    Ok(CompatibilityDefect {
        direct,
        connection_sum: prop,
        route_disagreement: disagree,
    })
}

/// Anti-homomorphism residual for n = 1:
/// `max | μ^{[α,β]} + ω(ρ(α), ρ(β)) |` with Leibniz-expanded brackets.
#[allow(clippy::too_many_arguments)]
pub fn antihom_residual(
    ps: &PlecticStructure,
    alg: &Algebroid,
    mu: &MixedForm,
    alpha: &ASection,
    beta: &ASection,
    chart: &Chart,
    samples: usize,
    seed: u64,
) -> Result<f64, PlecticError> {
    if ps.n != 1 {
        return Err(PlecticError::NeedsDegreeOne(ps.n));
    }
    let mut s = Sampler::new(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let x = s.point(chart);
        let aat = alg.at(&x)?;
        let muj = mu.jets_at(&x)?;
        let aj = alpha.jets(&x)?;
        let bj = beta.jets(&x)?;
        let br = section_bracket(&aj, &bj, &aat);
        let mu_br = pair_section(&muj, &br);
        let wj = ps.omega.jets_at(&x)?;
        let ra: Vec<f64> = anchor_of(&aj, &aat).iter().map(Jet2::value).collect();
        let rb: Vec<f64> = anchor_of(&bj, &aat).iter().map(Jet2::value).collect();
        let w_ab = wj.eval(&[&ra, &rb]);
        for f in 0..ps.bundle.rank {
            worst = worst.max((mu_br.coeffs[0][f].value() + w_ab[f]).abs());
        }
    }
    Ok(worst)
}

/// Jacobi residual of the induced bracket on pairing sections (n = 1), with
/// nested brackets resolved through the anti-homomorphism substitution, plus
/// the closedness identity `d^E_∇ ω(ρα, ρβ, ργ) = 2 · (Jacobi sum)`.
pub struct JacobiResidual {
    pub jacobi: f64,
    pub closedness_identity: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn jacobi_residual(
    ps: &PlecticStructure,
    alg: &Algebroid,
    alpha: &ASection,
    beta: &ASection,
    gamma: &ASection,
    chart: &Chart,
    samples: usize,
    seed: u64,
) -> Result<JacobiResidual, PlecticError> {
    if ps.n != 1 {
        return Err(PlecticError::NeedsDegreeOne(ps.n));
    }
    let mut s = Sampler::new(seed);
    let mut jres = 0.0_f64;
    let mut cres = 0.0_f64;
    for _ in 0..samples {
        let x = s.point(chart);
        let aat = alg.at(&x)?;
        let wj = ps.omega.jets_at(&x)?;
        let bat = ps.bundle.at(&x)?;
        let aj = alpha.jets(&x)?;
        let bj = beta.jets(&x)?;
        let gj = gamma.jets(&x)?;
        let val = |v: &Vec<Jet2>| -> Vec<f64> { v.iter().map(Jet2::value).collect() };
        let ra = val(&anchor_of(&aj, &aat));
        let rb = val(&anchor_of(&bj, &aat));
        let rg = val(&anchor_of(&gj, &aat));
        // {{μ^α, μ^β}, μ^γ} = −ω(ρ[α,β], ργ), cyclic
        let term = |u: &[Jet2], v: &[Jet2], wv: &[f64]| -> Vec<f64> {
            let br = section_bracket(u, v, &aat);
            let rbr = val(&anchor_of(&br, &aat));
            wj.eval(&[&rbr, wv]).iter().map(|c| -c).collect()
        };
        let t1 = term(&aj, &bj, &rg);
        let t2 = term(&bj, &gj, &ra);
        let t3 = term(&gj, &aj, &rb);
        let jac: Vec<f64> = (0..ps.bundle.rank)
            .map(|f| t1[f] + t2[f] + t3[f])
            .collect();
        for v in &jac {
            jres = jres.max(v.abs());
        }
        // closedness identity
        let dw = cov_ext(&wj, &bat);
        if dw.degree <= chart.dim {
            let dval = dw.eval(&[&ra, &rb, &rg]);
            for f in 0..ps.bundle.rank {
                cres = cres.max((dval[f] - 2.0 * jac[f]).abs());
            }
        }
    }
    Ok(JacobiResidual {
        jacobi: jres,
        closedness_identity: cres,
    })
}

/// Assembles the rank-3-bundle-valued 2-form `Θ = Σ_i ω_i ⊗ e_i` (fiber
/// basis identified with the triple) and the scalar 4-form `Σ_i ω_i ∧ ω_i`.
pub fn build_theta(triple: &[EForm; 3]) -> Result<(EForm, EForm), PlecticError> {
    let d = triple[0].dim;
    if d % 4 != 0 {
        return Err(PlecticError::DimensionNotQuaternionic(d));
    }
    let mut theta = EForm::new(d, 2, 3);
    for idx in mi::indices(d, 2) {
        let comps: Vec<_> = (0..3)
            .map(|i| {
                triple[i]
                    .entries()
                    .find(|(k, _)| *k == &idx)
                    .map(|(_, c)| c[0].clone())
                    .unwrap_or_else(|| crate::expr::SmoothFunction::constant(d, 0.0))
            })
            .collect();
        theta.set(&idx, comps);
    }
    let mut fourform: Option<EForm> = None;
    for w in triple.iter() {
        let sq = EForm::wedge_scalar_stored(w, w);
        fourform = Some(match fourform {
            None => sq,
            Some(acc) => add_stored(&acc, &sq),
        });
    }
    Ok((theta, fourform.unwrap()))
}

fn add_stored(a: &EForm, b: &EForm) -> EForm {
    use crate::expr::{Expr, SmoothFunction};
    assert_eq!(a.degree, b.degree);
    assert_eq!(a.rank, 1);
    let mut out = EForm::new(a.dim, a.degree, 1);
    let mut keys: Vec<Vec<u8>> = a.entries().map(|(k, _)| k.clone()).collect();
    for (k, _) in b.entries() {
        if !keys.contains(k) {
            keys.push(k.clone());
        }
    }
    for k in keys {
        let fa = a.entries().find(|(i, _)| *i == &k).map(|(_, c)| c[0].clone());
        let fb = b.entries().find(|(i, _)| *i == &k).map(|(_, c)| c[0].clone());
        let ast = match (fa, fb) {
            (Some(u), Some(v)) => {
                Expr::Add(Box::new(u.ast().clone()), Box::new(v.ast().clone()), (0, 0))
            }
            (Some(u), None) => u.ast().clone(),
            (None, Some(v)) => v.ast().clone(),
            (None, None) => unreachable!(),
        };
        out.set_scalar(&k, SmoothFunction::from_expr(ast, a.dim).unwrap());
    }
    out
}

/// Residuals of the covector-indexed momentum condition for a triple:
/// (i) the defining gradient condition `∇ f_V = Θ_V = Σ_i (ι_V ω_i) ⊗ ω_i`
/// on both supplied frame directions, and (ii) the bracket condition
/// `f_{[V_1,V_2]} + Σ_i ω_i(V_1, V_2) ω_i = 0`.
pub struct GlResidual {
    pub defining: f64,
    pub bracket_condition: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn gl_residual(
    triple: &[EForm; 3],
    alg: &Algebroid,
    f_section: &MixedForm,
    v1: usize,
    v2: usize,
    chart: &Chart,
    samples: usize,
    seed: u64,
) -> Result<GlResidual, PlecticError> {
    assert_eq!(f_section.q, 1);
    assert_eq!(f_section.p, 0);
    assert_eq!(f_section.rank, 3);
    let d = chart.dim;
    let mut s = Sampler::new(seed);
    let qbat = BundleAt::trivial(3, d); // flat proxy connection on the triple bundle
    let mut defining = 0.0_f64;
    let mut bracket = 0.0_f64;
    for _ in 0..samples {
        let x = s.point(chart);
        let aat = alg.at(&x)?;
        let fj = f_section.jets_at(&x)?;
        let triple_jets: Vec<FormJets> = triple
            .iter()
            .map(|w| w.jets_at(&x))
            .collect::<Result<_, _>>()?;
        for a in [v1, v2] {
            // ∇ f_{e_a} as a 1-form with triple components
            let fa = pair_section(&fj, &frame_jets(d, alg.rank, a));
            let grad = cov_ext(&fa, &qbat);
            // Θ_{V_a}: component i is ι_{ρ(e_a)} ω_i
            let rho = aat.rho_jets(a);
            let mut theta_v = FormJets::zero(d, 1, 3);
            for (i, wji) in triple_jets.iter().enumerate() {
                let c = interior_jets(&rho, wji);
                for pos in 0..theta_v.coeffs.len() {
                    theta_v.coeffs[pos][i] = c.coeffs[pos][0].clone();
                }
            }
            defining = defining.max(grad.sub(&theta_v).max_abs());
        }
        // bracket condition on the (v1, v2) frame pair
        let b1 = frame_jets(d, alg.rank, v1);
        let b2 = frame_jets(d, alg.rank, v2);
        let br = section_bracket(&b1, &b2, &aat);
        let f_br = pair_section(&fj, &br);
        let ra: Vec<f64> = aat.rho_values(v1);
        let rb: Vec<f64> = aat.rho_values(v2);
        for i in 0..3 {
            let w_ab = triple_jets[i].eval(&[&ra, &rb]);
            bracket = bracket.max((f_br.coeffs[0][i].value() + w_ab[0]).abs());
        }
    }
    Ok(GlResidual {
        defining,
        bracket_condition: bracket,
    })
}

fn frame_jets(dim: usize, rank: usize, a: usize) -> Vec<Jet2> {
    (0..rank)
        .map(|c| Jet2::constant(dim, if c == a { 1.0 } else { 0.0 }))
        .collect()
}

/// Fits polynomial potentials: solves for coefficients of a quadratic (plus
/// linear and constant terms) `μ` with `dμ = β` for a prescribed 1-form `β`
/// sampled at random points, pinned by `μ(0) = 0`. Returns the monomial
/// coefficients in the basis `{1} ∪ {x_i} ∪ {x_i x_j, i ≤ j}`.
pub fn fit_quadratic_potential(
    beta: impl Fn(&[f64]) -> Vec<f64>,
    dim: usize,
    seed: u64,
) -> Vec<f64> {
    let mut s = Sampler::new(seed);
    let basis = quadratic_basis(dim);
    let nb = basis.len();
    let npts = 3 * nb;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for _ in 0..npts {
        let x: Vec<f64> = (0..dim).map(|_| s.range(-1.5, 1.5)).collect();
        let b = beta(&x);
        for k in 0..dim {
            let mut row = vec![0.0; nb];
            for (ci, mono) in basis.iter().enumerate() {
                row[ci] = mono.grad(&x, k);
            }
            rows.push(row);
            rhs.push(b[k]);
        }
    }
    // pin μ(0) = 0
    let mut row0 = vec![0.0; nb];
    row0[0] = 1.0;
    rows.push(row0);
    rhs.push(0.0);
    let m = DMatrix::from_fn(rows.len(), nb, |i, j| rows[i][j]);
    let b = DVector::from_vec(rhs);
    let svd = m.svd(true, true);
    let eps = RANK_EPS * svd.singular_values.max();
    let sol = svd.solve(&b, eps).unwrap();
    sol.iter().cloned().collect()
}

/// Monomial in the quadratic basis.
pub struct Monomial {
    pub exps: Vec<usize>,
}

impl Monomial {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exps
            .iter()
            .enumerate()
            .map(|(i, &e)| x[i].powi(e as i32))
            .product()
    }

    fn grad(&self, x: &[f64], k: usize) -> f64 {
        if self.exps[k] == 0 {
            return 0.0;
        }
        let mut v = self.exps[k] as f64;
        for (i, &e) in self.exps.iter().enumerate() {
            let e = if i == k { e - 1 } else { e };
            v *= x[i].powi(e as i32);
        }
        v
    }
}

/// `{1} ∪ {x_i} ∪ {x_i x_j, i ≤ j}` in a fixed deterministic order.
pub fn quadratic_basis(dim: usize) -> Vec<Monomial> {
    let mut out = vec![Monomial { exps: vec![0; dim] }];
    for i in 0..dim {
        let mut e = vec![0; dim];
        e[i] = 1;
        out.push(Monomial { exps: e });
    }
    for i in 0..dim {
        for j in i..dim {
            let mut e = vec![0; dim];
            e[i] += 1;
            e[j] += 1;
            out.push(Monomial { exps: e });
        }
    }
    out
}

/// Renders fitted coefficients as an expression source string.
pub fn potential_to_source(coeffs: &[f64], dim: usize) -> String {
    let basis = quadratic_basis(dim);
    let mut terms = Vec::new();
    for (c, mono) in coeffs.iter().zip(&basis) {
        if c.abs() < 1e-12 {
            continue;
        }
        let mut t = format!("{c:.17}");
        for (i, &e) in mono.exps.iter().enumerate() {
            for _ in 0..e {
                t.push_str(&format!("*x{i}"));
            }
        }
        terms.push(format!("({t})"));
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}
