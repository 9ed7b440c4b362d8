//! Flow-based verification of the two reduction constructions: RK4 flows of
//! anchored vector fields with variational Jacobians, pseudogroup orbit
//! sampling, zero sets of momentum sections with tangent bases, the
//! ω-orthogonality of subspaces, and the cross-representative
//! well-definedness checks for the reduced 2-form and reduced connection.
//!
//! Quotients are never constructed as abstract spaces: catalog models carry
//! an explicit quotient chart with a projection and a section, and the
//! checks here verify the characterizing pullback equation and
//! well-definedness statistically along sampled flow words.

use crate::algebroid::{Algebroid, MixedForm};
use crate::expr::{EvalError, SmoothFunction};
use crate::form::{EForm, FormJets};
use crate::geometry::{Chart, GeometryError, VectorField};
use crate::jet::{compose, Jet2};
use crate::multi_index as mi;
use crate::plectic::RANK_EPS;
use crate::sample::Sampler;
use nalgebra::DMatrix;

/// Default cap on the RK4 step length.
pub const MAX_STEP: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum ReductionError {
    #[error("flow trajectory left the chart box at parameter {t:.6}")]
    LeftChart { t: f64 },
    #[error("point is not on the zero set: residual {residual:.3e} > tol {tol:.3e}")]
    NotOnZeroSet { residual: f64, tol: f64 },
    #[error("vector is not tangent to the zero set: residual {residual:.3e} > tol {tol:.3e}")]
    NotTangent { residual: f64, tol: f64 },
    #[error("section is not invariant along the sampled orbit: residual {residual:.3e} > tol {tol:.3e}")]
    NotInvariant { residual: f64, tol: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Classical fixed-step RK4 flow of `field` from `x0` for time `t`; the step
/// is capped at [`MAX_STEP`], so the local error is O(h⁴) with h ≤ 1e−3.
/// Periodic coordinates are wrapped after every step; leaving the box in a
/// non-periodic direction is an error.
pub fn flow(
    chart: &Chart,
    field: &VectorField,
    x0: &[f64],
    t: f64,
) -> Result<Vec<f64>, ReductionError> {
    let (end, _) = flow_impl(chart, field, x0, t, false)?;
    Ok(end)
}

/// Flow together with the differential `dF_t` (variational RK4: the linear
/// variational system is integrated alongside the trajectory with the same
/// steps). Returns `(endpoint, jac)` with `jac[k*d + j] = ∂ F^k / ∂ x0^j`.
pub fn flow_with_jacobian(
    chart: &Chart,
    field: &VectorField,
    x0: &[f64],
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>), ReductionError> {
    let (end, jac) = flow_impl(chart, field, x0, t, true)?;
    Ok((end, jac.unwrap()))
}

fn flow_impl(
    chart: &Chart,
    field: &VectorField,
    x0: &[f64],
    t: f64,
    variational: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>), ReductionError> {
    let d = chart.dim;
    let mut y = x0.to_vec();
    let mut jac: Vec<f64> = (0..d * d)
        .map(|i| if i / d == i % d { 1.0 } else { 0.0 })
        .collect();
    if t == 0.0 {
        return Ok((y, variational.then_some(jac)));
    }
    let steps = (t.abs() / MAX_STEP).ceil() as usize;
    let h = t / steps as f64;

    // combined state derivative: (X(y), J_X(y)·Y)
    let deriv = |y: &[f64], yj: &[f64]| -> Result<(Vec<f64>, Vec<f64>), EvalError> {
        if variational {
            let jets = field.jets(y)?;
            let v: Vec<f64> = jets.iter().map(Jet2::value).collect();
            let mut dj = vec![0.0; d * d];
            for k in 0..d {
                for j in 0..d {
                    let mut s = 0.0;
                    for l in 0..d {
                        s += jets[k].g(l) * yj[l * d + j];
                    }
                    dj[k * d + j] = s;
                }
            }
            Ok((v, dj))
        } else {
            Ok((field.values(y)?, Vec::new()))
        }
    };

    for step in 0..steps {
        let (k1, m1) = deriv(&y, &jac)?;
        let y2 = advance(&y, &k1, h / 2.0);
        let j2 = advance(&jac, &m1, h / 2.0);
        let (k2, m2) = deriv(&y2, &j2)?;
        let y3 = advance(&y, &k2, h / 2.0);
        let j3 = advance(&jac, &m2, h / 2.0);
        let (k3, m3) = deriv(&y3, &j3)?;
        let y4 = advance(&y, &k3, h);
        let j4 = advance(&jac, &m3, h);
        let (k4, m4) = deriv(&y4, &j4)?;
        for i in 0..d {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if variational {
            for i in 0..d * d {
                jac[i] += h / 6.0 * (m1[i] + 2.0 * m2[i] + 2.0 * m3[i] + m4[i]);
            }
        }
        chart.wrap(&mut y);
        if !chart.contains(&y, 1e-9) {
            return Err(ReductionError::LeftChart {
                t: h * (step + 1) as f64,
            });
        }
    }
    Ok((y, variational.then_some(jac)))
}

fn advance(base: &[f64], dir: &[f64], h: f64) -> Vec<f64> {
    if dir.is_empty() {
        return base.to_vec();
    }
    base.iter().zip(dir).map(|(b, d)| b + h * d).collect()
}

/// Scalar components of a momentum section `μ ∈ Γ(A*⊗V)` (bidegree (0,1)):
/// one jet per (frame index, fiber index), flattened `a*rank + f`.
pub fn momentum_scalars(mu: &MixedForm, x: &[f64]) -> Result<Vec<Jet2>, EvalError> {
    assert_eq!(mu.p, 0);
    assert_eq!(mu.q, 1);
    let mj = mu.jets_at(x)?;
    let mut out = Vec::with_capacity(mu.arank * mu.rank);
    for a in 0..mu.arank {
        for f in 0..mu.rank {
            out.push(mj.coeffs[0][a][f].clone());
        }
    }
    Ok(out)
}

/// Zero-set membership of `x` together with an orthonormal tangent basis of
/// the level set from the SVD nullspace of the stacked Jacobian. Tie-breaks
/// deterministically by descending singular value.
pub fn zero_set_membership(
    mu: &MixedForm,
    x: &[f64],
    tol: f64,
) -> Result<(bool, Vec<Vec<f64>>), ReductionError> {
    let scalars = momentum_scalars(mu, x)?;
    let residual = scalars
        .iter()
        .map(|j| j.value().abs())
        .fold(0.0, f64::max);
    let member = residual <= tol;
    let d = mu.dim;
    let jacobian = DMatrix::from_fn(scalars.len(), d, |i, j| scalars[i].g(j));
    Ok((member, nullspace(&jacobian)))
}

/// Orthonormal nullspace basis from right singular vectors with small
/// singular values, ordered deterministically by descending singular value.
pub fn nullspace(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let d = m.ncols();
    // The thin SVD only returns min(rows, cols) right singular vectors, so
    // pad with zero rows to recover the full V factor.
    let padded = if m.nrows() < d {
        let mut p = DMatrix::zeros(d, d);
        p.view_mut((0, 0), (m.nrows(), d)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let smax = padded.singular_values().iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        // zero map: the whole space, standard basis
        return (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
    }
    let svd = padded.svd(false, true);
    let vt = svd.v_t.as_ref().expect("SVD with V requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap());
    let mut basis = Vec::new();
    for &i in &order {
        if sv[i] <= RANK_EPS * smax {
            basis.push((0..d).map(|j| vt[(i, j)]).collect());
        }
    }
    basis
}

/// Basis of the ω-orthogonal subspace of `span(W)` at a point: the
/// nullspace of `u ↦ (ω_x(u, w_j))_{j, fiber}`.
pub fn omega_orthogonal(omega: &FormJets, w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = omega.dim;
    let r = omega.rank;
    let mut rows = Vec::with_capacity(w.len() * r);
    for wj in w {
        // row block: ω(e_i, w_j) per fiber
        let mut per_fiber = vec![vec![0.0; d]; r];
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            let v = omega.eval(&[&e, wj.as_slice()]);
            for f in 0..r {
                per_fiber[f][i] = v[f];
            }
        }
        rows.extend(per_fiber);
    }
    if rows.is_empty() {
        return (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
    }
    let m = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    nullspace(&m)
}

/// Report of the transversality condition `T_z M_μ + Im ρ_z = T_z M`.
#[derive(Clone, Debug)]
pub struct TransversalityReport {
    pub tangent_rank: usize,
    pub anchor_rank: usize,
    pub combined_rank: usize,
    pub dim: usize,
    pub satisfied: bool,
}

pub fn transversality_check(
    mu: &MixedForm,
    alg: &Algebroid,
    z: &[f64],
    tol: f64,
) -> Result<TransversalityReport, ReductionError> {
    let (member, tangent) = zero_set_membership(mu, z, tol)?;
    if !member {
        let scalars = momentum_scalars(mu, z)?;
        let residual = scalars.iter().map(|j| j.value().abs()).fold(0.0, f64::max);
        return Err(ReductionError::NotOnZeroSet { residual, tol });
    }
    let d = mu.dim;
    let aat = alg.at(z)?;
    let mut cols: Vec<Vec<f64>> = tangent.clone();
    for a in 0..alg.rank {
        cols.push(aat.rho_values(a));
    }
    let rank_of = |cols: &[Vec<f64>]| -> usize {
        if cols.is_empty() {
            return 0;
        }
        let m = DMatrix::from_fn(d, cols.len(), |i, j| cols[j][i]);
        let sv = m.singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        if smax == 0.0 {
            0
        } else {
            sv.iter().filter(|&&s| s > 1e-9 * smax).count()
        }
    };
    let anchor_cols: Vec<Vec<f64>> = (0..alg.rank).map(|a| aat.rho_values(a)).collect();
    let combined_rank = rank_of(&cols);
    Ok(TransversalityReport {
        tangent_rank: tangent.len(),
        anchor_rank: rank_of(&anchor_cols),
        combined_rank,
        dim: d,
        satisfied: combined_rank == d,
    })
}

/// Which pseudogroup generates the sampled orbit words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitMode {
    /// Flows of anchored sections tangent to the zero set.
    ZeroSetTangent,
    /// Flows of all anchored frame fields, endpoints re-checked for
    /// membership (violations are counterexamples to invariance).
    AnchorAll,
}

/// One sampled orbit: the flow words applied and their endpoints, and the
/// worst zero-set membership residual seen across endpoints.
#[derive(Clone, Debug)]
pub struct OrbitSample {
    pub base: Vec<f64>,
    pub words: Vec<Vec<(usize, f64)>>,
    pub endpoints: Vec<Vec<f64>>,
    pub worst_membership: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn orbit_sample(
    chart: &Chart,
    alg: &Algebroid,
    mu: &MixedForm,
    z: &[f64],
    mode: OrbitMode,
    words: usize,
    seed: u64,
    tol: f64,
) -> Result<OrbitSample, ReductionError> {
    let scalars = momentum_scalars(mu, z)?;
    let base_res = scalars.iter().map(|j| j.value().abs()).fold(0.0, f64::max);
    if base_res > tol {
        return Err(ReductionError::NotOnZeroSet {
            residual: base_res,
            tol,
        });
    }
    // admissible generator fields
    let mut gen_fields = Vec::new();
    for a in 0..alg.rank {
        let admissible = match mode {
            OrbitMode::AnchorAll => true,
            OrbitMode::ZeroSetTangent => {
                // ρ(e_a) annihilates the momentum scalars at the base point
                let aat = alg.at(z)?;
                let rho = aat.rho_values(a);
                scalars
                    .iter()
                    .map(|s| (0..chart.dim).map(|i| s.g(i) * rho[i]).sum::<f64>().abs())
                    .fold(0.0, f64::max)
                    <= tol.max(1e-9)
            }
        };
        if admissible {
            gen_fields.push((a, alg.anchor_field(a)));
        }
    }
    let mut s = Sampler::new(seed);
    let mut out = OrbitSample {
        base: z.to_vec(),
        words: Vec::new(),
        endpoints: Vec::new(),
        worst_membership: 0.0,
    };
    for widx in 0..words {
        let len = if widx == 0 { 0 } else { 1 + s.usize_below(3) };
        let mut word = Vec::new();
        let mut cur = z.to_vec();
        for _ in 0..len {
            let pick = s.usize_below(gen_fields.len());
            let t = s.range(-0.8, 0.8);
            cur = flow(chart, &gen_fields[pick].1, &cur, t)?;
            word.push((gen_fields[pick].0, t));
        }
        let end_res = momentum_scalars(mu, &cur)?
            .iter()
            .map(|j| j.value().abs())
            .fold(0.0, f64::max);
        out.worst_membership = out.worst_membership.max(end_res);
        out.words.push(word);
        out.endpoints.push(cur);
    }
    Ok(out)
}

/// Max pullback residual `|(F_t^* ω)_z − ω_z|` over sampled points and
/// random argument vectors, with `dF_t` from the variational flow.
/// Trajectories run in `chart`; start points are drawn from `sample_chart`
/// (an inner box keeping the flow inside the model chart).
pub fn invariance_residual_form(
    chart: &Chart,
    sample_chart: &Chart,
    omega: &EForm,
    field: &VectorField,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<f64, ReductionError> {
    let d = chart.dim;
    let mut s = Sampler::new(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let z = s.point(sample_chart);
        let (end, jac) = flow_with_jacobian(chart, field, &z, t)?;
        let wz = omega.jets_at(&z)?;
        let wend = omega.jets_at(&end)?;
        for _ in 0..4 {
            let u = s.vector(d);
            let v = s.vector(d);
            let push = |w: &[f64]| -> Vec<f64> {
                (0..d)
                    .map(|k| (0..d).map(|j| jac[k * d + j] * w[j]).sum())
                    .collect()
            };
            let pu = push(&u);
            let pv = push(&v);
            let lhs = wend.eval(&[&pu, &pv]);
            let rhs = wz.eval(&[&u, &v]);
            for f in 0..omega.rank {
                worst = worst.max((lhs[f] - rhs[f]).abs());
            }
        }
    }
    Ok(worst)
}

/// Max `|s(F_t(z)) − s(z)|` for a fiber-valued function.
pub fn invariance_residual_function(
    chart: &Chart,
    sample_chart: &Chart,
    comps: &[SmoothFunction],
    field: &VectorField,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<f64, ReductionError> {
    let mut s = Sampler::new(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let z = s.point(sample_chart);
        let end = flow(chart, field, &z, t)?;
        for f in comps {
            let a = f.eval(&z)?;
            let b = f.eval(&end)?;
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// A reduced value at a representative plus the well-definedness residual
/// against a transported second representative.
#[derive(Debug)]
pub struct RepresentativePair {
    pub value: Vec<f64>,
    pub transported_value: Vec<f64>,
    pub residual: f64,
}

/// Evaluates the reduced 2-form on a representative triple and on a second
/// one constructed by flow transport plus random anchor-direction additions:
/// `z' = F_w(z)`, `u' = dF_w u + Σ h_a ρ(e_a)_{z'}` (likewise `v'`),
/// comparing `ω_z(u, v)` with `ω_{z'}(u', v')`.
#[allow(clippy::too_many_arguments)]
pub fn reduced_form_cross(
    chart: &Chart,
    alg: &Algebroid,
    mu: &MixedForm,
    omega: &EForm,
    z: &[f64],
    u: &[f64],
    v: &[f64],
    word: &[(usize, f64)],
    sampler: &mut Sampler,
    tol: f64,
) -> Result<RepresentativePair, ReductionError> {
    check_membership_and_tangency(mu, z, &[u, v], tol)?;
    let wz = omega.jets_at(z)?;
    let value = wz.eval(&[u, v]);
    let (cur, jac) = transport(chart, alg, z, word)?;
    let d = chart.dim;
    let aat = alg.at(&cur)?;
    let push = |w: &[f64], jac: &[f64]| -> Vec<f64> {
        (0..d)
            .map(|k| (0..d).map(|j| jac[k * d + j] * w[j]).sum())
            .collect()
    };
    let mut u2 = push(u, &jac);
    let mut v2 = push(v, &jac);
    for a in 0..alg.rank {
        let h = sampler.range(-0.5, 0.5);
        let g = sampler.range(-0.5, 0.5);
        let rho = aat.rho_values(a);
        for i in 0..d {
            u2[i] += h * rho[i];
            v2[i] += g * rho[i];
        }
    }
    let wz2 = omega.jets_at(&cur)?;
    let transported_value = wz2.eval(&[&u2, &v2]);
    let residual = value
        .iter()
        .zip(&transported_value)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(RepresentativePair {
        value,
        transported_value,
        residual,
    })
}

/// Directional derivative `(∇̂_ū s̄)([z]) = X_z s` of an invariant
/// fiber-valued function, with the cross-representative residual along a
/// transported word. Refuses sections that fail the invariance test in the
/// anchored directions at the base point.
#[allow(clippy::too_many_arguments)]
pub fn reduced_connection_cross(
    chart: &Chart,
    alg: &Algebroid,
    mu: &MixedForm,
    comps: &[SmoothFunction],
    z: &[f64],
    u: &[f64],
    word: &[(usize, f64)],
    sampler: &mut Sampler,
    tol: f64,
) -> Result<RepresentativePair, ReductionError> {
    check_membership_and_tangency(mu, z, &[u], tol)?;
    // invariance: the anchored derivatives of s must vanish
    let aat = alg.at(z)?;
    let mut inv = 0.0_f64;
    for a in 0..alg.rank {
        let rho = aat.rho_values(a);
        for f in comps {
            let j = f.eval_jet2(z)?;
            let dv: f64 = (0..chart.dim).map(|i| j.g(i) * rho[i]).sum();
            inv = inv.max(dv.abs());
        }
    }
    if inv > tol {
        return Err(ReductionError::NotInvariant { residual: inv, tol });
    }
    let d = chart.dim;
    let deriv = |x: &[f64], w: &[f64]| -> Result<Vec<f64>, EvalError> {
        comps
            .iter()
            .map(|f| {
                let j = f.eval_jet2(x)?;
                Ok((0..d).map(|i| j.g(i) * w[i]).sum())
            })
            .collect()
    };
    let value = deriv(z, u)?;
    let (cur, jac) = transport(chart, alg, z, word)?;
    let mut u2: Vec<f64> = (0..d)
        .map(|k| (0..d).map(|j| jac[k * d + j] * u[j]).sum())
        .collect();
    let aat2 = alg.at(&cur)?;
    for a in 0..alg.rank {
        let h = sampler.range(-0.5, 0.5);
        let rho = aat2.rho_values(a);
        for i in 0..d {
            u2[i] += h * rho[i];
        }
    }
    let transported_value = deriv(&cur, &u2)?;
    let residual = value
        .iter()
        .zip(&transported_value)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(RepresentativePair {
        value,
        transported_value,
        residual,
    })
}

/// Applies a flow word to a point, composing the variational Jacobians.
fn transport(
    chart: &Chart,
    alg: &Algebroid,
    z: &[f64],
    word: &[(usize, f64)],
) -> Result<(Vec<f64>, Vec<f64>), ReductionError> {
    let d = chart.dim;
    let mut cur = z.to_vec();
    let mut jac: Vec<f64> = (0..d * d)
        .map(|i| if i / d == i % d { 1.0 } else { 0.0 })
        .collect();
    for &(a, t) in word {
        let (next, step_jac) = flow_with_jacobian(chart, &alg.anchor_field(a), &cur, t)?;
        let mut composed = vec![0.0; d * d];
        for k in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for l in 0..d {
                    acc += step_jac[k * d + l] * jac[l * d + j];
                }
                composed[k * d + j] = acc;
            }
        }
        jac = composed;
        cur = next;
    }
    Ok((cur, jac))
}

fn check_membership_and_tangency(
    mu: &MixedForm,
    z: &[f64],
    vectors: &[&[f64]],
    tol: f64,
) -> Result<(), ReductionError> {
    let scalars = momentum_scalars(mu, z)?;
    let residual = scalars.iter().map(|j| j.value().abs()).fold(0.0, f64::max);
    if residual > tol {
        return Err(ReductionError::NotOnZeroSet { residual, tol });
    }
    for v in vectors {
        let t = scalars
            .iter()
            .map(|s| (0..mu.dim).map(|i| s.g(i) * v[i]).sum::<f64>().abs())
            .fold(0.0, f64::max);
        if t > tol {
            return Err(ReductionError::NotTangent { residual: t, tol });
        }
    }
    Ok(())
}

/// Residuals of the subspace inclusions at a zero-set point: the covariant
/// derivative of μ annihilates tangent vectors, and tangent vectors are
/// ω-orthogonal to every anchored direction.
pub fn subspace_lemma_check(
    omega: &EForm,
    alg: &Algebroid,
    mu: &MixedForm,
    z: &[f64],
    tol: f64,
) -> Result<(f64, f64), ReductionError> {
    let (member, tangent) = zero_set_membership(mu, z, tol)?;
    if !member {
        let scalars = momentum_scalars(mu, z)?;
        let residual = scalars.iter().map(|j| j.value().abs()).fold(0.0, f64::max);
        return Err(ReductionError::NotOnZeroSet { residual, tol });
    }
    let scalars = momentum_scalars(mu, z)?;
    let mut nabla = 0.0_f64;
    for u in &tangent {
        for s in &scalars {
            let dv: f64 = (0..mu.dim).map(|i| s.g(i) * u[i]).sum();
            nabla = nabla.max(dv.abs());
        }
    }
    let wj = omega.jets_at(z)?;
    let aat = alg.at(z)?;
    let mut ortho = 0.0_f64;
    for u in &tangent {
        for a in 0..alg.rank {
            let rho = aat.rho_values(a);
            for v in wj.eval(&[u.as_slice(), &rho]) {
                ortho = ortho.max(v.abs());
            }
        }
    }
    Ok((nabla, ortho))
}

/// Quotient data a catalog model may carry: an explicit quotient chart with
/// the projection, a section lifting quotient points into the zero set, and
/// optionally the expected reduced 2-form on the quotient chart.
#[derive(Clone, Debug)]
pub struct QuotientData {
    pub chart: Chart,
    /// projection components as functions of the ambient chart
    pub projection: Vec<SmoothFunction>,
    /// section components as functions of the quotient chart
    pub section: Vec<SmoothFunction>,
    pub expected_reduced: Option<EForm>,
}

impl QuotientData {
    /// Section point and the lift jets (one jet per ambient coordinate, over
    /// the quotient chart).
    pub fn lift_jets(&self, y: &[f64]) -> Result<(Vec<f64>, Vec<Jet2>), EvalError> {
        let jets: Vec<Jet2> = self
            .section
            .iter()
            .map(|f| f.eval_jet2(y))
            .collect::<Result<_, _>>()?;
        let point = jets.iter().map(Jet2::value).collect();
        Ok((point, jets))
    }

    /// The reduced 2-form coefficients as jets over the quotient chart at
    /// `y`: `c_{ij}(y) = ω_{L(y)}(∂L/∂y_i, ∂L/∂y_j)`, pulled back through
    /// the section with the chain rule (order-1 jets, enough for one more
    /// exterior derivative).
    pub fn reduced_form_jets(&self, omega: &EForm, y: &[f64]) -> Result<FormJets, EvalError> {
        let qd = self.chart.dim;
        let (point, lift) = self.lift_jets(y)?;
        let wj = omega.jets_at(&point)?;
        let table = mi::indices(qd, 2);
        let mut out = FormJets::zero(qd, 2, omega.rank);
        // tangent lifts as jets over the quotient chart: û_i = ∂L/∂y_i
        let lifted: Vec<Vec<Jet2>> = (0..qd)
            .map(|i| lift.iter().map(|c| c.partial(i)).collect())
            .collect();
        for (pos, idx) in table.iter().enumerate() {
            let (i, j) = (idx[0] as usize, idx[1] as usize);
            for f in 0..omega.rank {
                // ω(û_i, û_j) with every ingredient composed through the lift
                let amb = omega.dim;
                let mut acc = Jet2::constant(qd, 0.0);
                for full in mi::indices(amb, 2) {
                    let (k, l) = (full[0] as usize, full[1] as usize);
                    let c = compose(&wj.coeff(&full)[f], &lift);
                    let det = lifted[i][k]
                        .mul(&lifted[j][l])
                        .sub(&lifted[i][l].mul(&lifted[j][k]));
                    acc = acc.add(&c.mul(&det));
                }
                out.coeffs[pos][f] = acc;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(src: &str, d: usize) -> SmoothFunction {
        SmoothFunction::parse(src, d).unwrap()
    }

    #[test]
    fn constant_flow_translates() {
        let chart = Chart::torus(2);
        let field = VectorField::parse(&["1", "0"], 2).unwrap();
        let end = flow(&chart, &field, &[0.5, 1.0], 1.0).unwrap();
        assert!((end[0] - 1.5).abs() < 1e-12);
        assert!((end[1] - 1.0).abs() < 1e-12);
        // t = 0 is exact
        let same = flow(&chart, &field, &[0.5, 1.0], 0.0).unwrap();
        assert_eq!(same, vec![0.5, 1.0]);
    }

    #[test]
    fn rotation_flow_accuracy() {
        let chart = Chart::new_box(vec![-2.0; 2], vec![2.0; 2]);
        let field = VectorField::parse(&["-x1", "x0"], 2).unwrap();
        let end = flow(&chart, &field, &[1.0, 0.0], std::f64::consts::FRAC_PI_2).unwrap();
        assert!((end[0] - 0.0).abs() < 1e-9, "{end:?}");
        assert!((end[1] - 1.0).abs() < 1e-9);
        // full revolution returns to the start well under 1e-8
        let full = flow(&chart, &field, &[1.0, 0.0], std::f64::consts::TAU).unwrap();
        assert!((full[0] - 1.0).abs() < 1e-8);
        assert!(full[1].abs() < 1e-8);
        // and the variational Jacobian is the rotation matrix
        let (_, jac) =
            flow_with_jacobian(&chart, &field, &[1.0, 0.0], std::f64::consts::FRAC_PI_2).unwrap();
        assert!((jac[0]).abs() < 1e-8); // cos(π/2)
        assert!((jac[1] + 1.0).abs() < 1e-8); // −sin
        assert!((jac[2] - 1.0).abs() < 1e-8); // sin
        assert!((jac[3]).abs() < 1e-8);
    }

    #[test]
    fn trajectory_leaving_box_is_an_error() {
        let chart = Chart::new_box(vec![-1.0; 2], vec![1.0; 2]);
        let field = VectorField::parse(&["1", "0"], 2).unwrap();
        match flow(&chart, &field, &[0.5, 0.0], 1.0) {
            Err(ReductionError::LeftChart { .. }) => {}
            other => panic!("expected chart exit, got {other:?}"),
        }
    }

    #[test]
    fn omega_orthogonal_complement_in_plane() {
        // ω = dx∧dy: span(∂x)^ω = span(∂x)
        let mut w = EForm::new(2, 2, 1);
        w.set_scalar(&[0, 1], sf("1", 2));
        let wj = w.jets_at(&[0.0, 0.0]).unwrap();
        let basis = omega_orthogonal(&wj, &[vec![1.0, 0.0]]);
        assert_eq!(basis.len(), 1);
        assert!(basis[0][1].abs() < 1e-12);
        assert!((basis[0][0].abs() - 1.0).abs() < 1e-12);
        // whole space: nondegenerate → {0}
        let full = omega_orthogonal(&wj, &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(full.is_empty());
    }

    #[test]
    fn dimension_count_and_double_orthogonal() {
        // scalar symplectic R^4: dim W + dim W^ω = 4 and (W^ω)^ω ⊇ W
        let d = 4;
        let mut w = EForm::new(d, 2, 1);
        w.set_scalar(&[0, 1], sf("1", d));
        w.set_scalar(&[2, 3], sf("1", d));
        let wj = w.jets_at(&[0.0; 4]).unwrap();
        let mut s = Sampler::new(11);
        for _ in 0..50 {
            let k = 1 + s.usize_below(3);
            let basis: Vec<Vec<f64>> = (0..k).map(|_| s.vector(d)).collect();
            let ortho = omega_orthogonal(&wj, &basis);
            assert_eq!(basis.len() + ortho.len(), d);
            let double = omega_orthogonal(&wj, &ortho);
            // every original basis vector must lie in the double orthogonal
            let m = DMatrix::from_fn(d, double.len(), |i, j| double[j][i]);
            for v in &basis {
                let rhs = nalgebra::DVector::from_vec(v.clone());
                let svd = m.clone().svd(true, true);
                let sol = svd.solve(&rhs, 1e-12).unwrap();
                let err = (&m * sol - rhs).amax();
                assert!(err < 1e-9, "double orthogonal failed: {err}");
            }
        }
    }

    #[test]
    fn zero_set_and_tangent_basis() {
        // μ = x1 on a rank-1 algebroid over R^4: zero set {x1 = 0}
        let d = 4;
        let mut mu = MixedForm::new(d, 1, 0, 1, 1);
        mu.set(&[], &[0], vec![sf("x1", d)]);
        let (member, basis) = zero_set_membership(&mu, &[0.3, 0.0, -0.2, 0.7], 1e-10).unwrap();
        assert!(member);
        assert_eq!(basis.len(), 3);
        for b in &basis {
            assert!(b[1].abs() < 1e-12, "tangent basis not annihilated: {b:?}");
        }
        let (member, _) = zero_set_membership(&mu, &[0.3, 0.5, -0.2, 0.7], 1e-10).unwrap();
        assert!(!member);
    }

    #[test]
    fn trivial_anchor_is_transversal() {
        // ρ = 0 and μ ≡ 0: the zero set is everything, its tangent space is
        // everything, and transversality holds trivially.
        let d = 2;
        let alg = Algebroid::new(d, 1, vec![sf("0", d), sf("0", d)]);
        let mut mu = MixedForm::new(d, 1, 0, 1, 1);
        mu.set(&[], &[0], vec![sf("0", d)]);
        let rep = transversality_check(&mu, &alg, &[0.4, -0.1], 1e-10).unwrap();
        assert!(rep.satisfied);
        assert_eq!(rep.tangent_rank, 2);
        assert_eq!(rep.anchor_rank, 0);
    }
}
