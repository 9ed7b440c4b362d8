//! Bundle-valued differential forms and the covariant exterior calculus:
//! covariant exterior derivative, curvature, covariant Lie derivative, the
//! Cartan-type identities and the metric-induced cotangent-valued companion
//! form.
//!
//! Stored forms ([`EForm`]) keep one smooth coefficient per increasing
//! multi-index and fiber component. All operators act on point evaluations
//! ([`FormJets`]) whose coefficients are jets; each derivative layer an
//! operator consumes is tracked by the jet order, so composing two exterior
//! derivatives bottoms out exactly at the second partials the expression
//! layer provides.

use std::collections::BTreeMap;

use crate::expr::{Expr, EvalError, SmoothFunction};
use crate::geometry::{Chart, Connection, GeometryError, Metric};
use crate::jet::Jet2;
use crate::multi_index as mi;
use crate::sample::Sampler;

/// A vector bundle over the chart: rank and connection coefficients.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub rank: usize,
    pub conn: Connection,
}

impl Bundle {
    pub fn trivial(rank: usize, dim: usize) -> Bundle {
        Bundle {
            rank,
            conn: Connection::trivial(rank, dim),
        }
    }

    /// Connection coefficient jets at `x`.
    pub fn at(&self, x: &[f64]) -> Result<BundleAt, GeometryError> {
        let dim = x.len();
        let conn = self.conn.jets(x)?;
        assert_eq!(conn.len(), self.rank * self.rank * dim);
        Ok(BundleAt {
            dim,
            rank: self.rank,
            conn,
        })
    }
}

/// Connection coefficients evaluated at a point, `A^a_{b,i}` flattened as
/// `a*rank*dim + b*dim + i`.
#[derive(Clone, Debug)]
pub struct BundleAt {
    pub dim: usize,
    pub rank: usize,
    pub conn: Vec<Jet2>,
}

impl BundleAt {
    pub fn trivial(rank: usize, dim: usize) -> BundleAt {
        BundleAt {
            dim,
            rank,
            conn: vec![Jet2::constant(dim, 0.0); rank * rank * dim],
        }
    }

    #[inline]
    pub fn a(&self, a: usize, b: usize, i: usize) -> &Jet2 {
        &self.conn[(a * self.rank + b) * self.dim + i]
    }
}

/// A stored E-valued k-form: sparse map from increasing multi-indices to
/// fiber coefficient functions.
#[derive(Clone, Debug)]
pub struct EForm {
    pub dim: usize,
    pub degree: usize,
    pub rank: usize,
    coeffs: BTreeMap<Vec<u8>, Vec<SmoothFunction>>,
}

impl EForm {
    pub fn new(dim: usize, degree: usize, rank: usize) -> EForm {
        EForm {
            dim,
            degree,
            rank,
            coeffs: BTreeMap::new(),
        }
    }

    /// Sets the fiber coefficients on an increasing multi-index.
    pub fn set(&mut self, idx: &[u8], comps: Vec<SmoothFunction>) {
        assert_eq!(idx.len(), self.degree);
        assert!(idx.windows(2).all(|w| w[0] < w[1]), "multi-index must be increasing");
        assert!(idx.iter().all(|&i| (i as usize) < self.dim));
        assert_eq!(comps.len(), self.rank);
        self.coeffs.insert(idx.to_vec(), comps);
    }

    pub fn set_scalar(&mut self, idx: &[u8], f: SmoothFunction) {
        assert_eq!(self.rank, 1);
        self.set(idx, vec![f]);
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<u8>, &Vec<SmoothFunction>)> {
        self.coeffs.iter()
    }

    /// Evaluates every coefficient to an order-2 jet.
    pub fn jets_at(&self, x: &[f64]) -> Result<FormJets, EvalError> {
        let table = mi::indices(self.dim, self.degree);
        let mut coeffs = vec![vec![Jet2::constant(self.dim, 0.0); self.rank]; table.len()];
        for (idx, comps) in &self.coeffs {
            let p = mi::position(self.dim, idx);
            for (a, f) in comps.iter().enumerate() {
                coeffs[p][a] = f.eval_jet2(x)?;
            }
        }
        Ok(FormJets {
            dim: self.dim,
            degree: self.degree,
            rank: self.rank,
            coeffs,
        })
    }

    /// Wedge of two stored scalar forms, with coefficient products taken at
    /// the expression level (used to assemble fundamental-form data).
    pub fn wedge_scalar_stored(a: &EForm, b: &EForm) -> EForm {
        assert_eq!(a.rank, 1);
        assert_eq!(b.rank, 1);
        assert_eq!(a.dim, b.dim);
        let dim = a.dim;
        let degree = a.degree + b.degree;
        let mut acc: BTreeMap<Vec<u8>, Expr> = BTreeMap::new();
        for (ia, fa) in &a.coeffs {
            for (ib, fb) in &b.coeffs {
                let mut tuple = ia.clone();
                tuple.extend_from_slice(ib);
                let Some((sorted, sign)) = mi::sort_signed(&tuple) else {
                    continue;
                };
                let prod = Expr::Mul(
                    Box::new(fa[0].ast().clone()),
                    Box::new(fb[0].ast().clone()),
                    (0, 0),
                );
                let signed = if sign > 0.0 {
                    prod
                } else {
                    Expr::Neg(Box::new(prod), (0, 0))
                };
                acc.entry(sorted)
                    .and_modify(|e| {
                        *e = Expr::Add(Box::new(e.clone()), Box::new(signed.clone()), (0, 0))
                    })
                    .or_insert(signed);
            }
        }
        let mut out = EForm::new(dim, degree, 1);
        for (idx, e) in acc {
            out.set_scalar(&idx, SmoothFunction::from_expr(e, dim).unwrap());
        }
        out
    }
}

/// An E-valued form evaluated at a point: jet coefficients, dense over the
/// lexicographic multi-index table of `(dim, degree)`.
#[derive(Clone, Debug)]
pub struct FormJets {
    pub dim: usize,
    pub degree: usize,
    pub rank: usize,
    pub coeffs: Vec<Vec<Jet2>>,
}

impl FormJets {
    pub fn zero(dim: usize, degree: usize, rank: usize) -> FormJets {
        let n = mi::count(dim, degree);
        FormJets {
            dim,
            degree,
            rank,
            coeffs: vec![vec![Jet2::constant(dim, 0.0); rank]; n],
        }
    }

    pub fn coeff(&self, idx: &[u8]) -> &[Jet2] {
        &self.coeffs[mi::position(self.dim, idx)]
    }

    pub fn add(&self, rhs: &FormJets) -> FormJets {
        self.zip(rhs, Jet2::add)
    }

    pub fn sub(&self, rhs: &FormJets) -> FormJets {
        self.zip(rhs, Jet2::sub)
    }

    fn zip(&self, rhs: &FormJets, op: impl Fn(&Jet2, &Jet2) -> Jet2) -> FormJets {
        assert_eq!(self.degree, rhs.degree);
        assert_eq!(self.rank, rhs.rank);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(u, v)| u.iter().zip(v).map(|(a, b)| op(a, b)).collect())
            .collect();
        FormJets {
            dim: self.dim,
            degree: self.degree,
            rank: self.rank,
            coeffs,
        }
    }

    pub fn scale(&self, c: f64) -> FormJets {
        let coeffs = self
            .coeffs
            .iter()
            .map(|u| u.iter().map(|j| j.scale(c)).collect())
            .collect();
        FormJets {
            dim: self.dim,
            degree: self.degree,
            rank: self.rank,
            coeffs,
        }
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .map(|j| j.value().abs())
            .fold(0.0, f64::max)
    }

    /// Multilinear evaluation on tangent vectors (values only).
    pub fn eval(&self, vectors: &[&[f64]]) -> Vec<f64> {
        assert_eq!(vectors.len(), self.degree, "arity mismatch");
        let mut cur = self.clone();
        for v in vectors {
            cur = interior_values(v, &cur);
        }
        cur.coeffs
            .first()
            .map(|c| c.iter().map(Jet2::value).collect())
            .unwrap_or_else(|| vec![0.0; self.rank])
    }
}

/// End(E)-valued form at a point: fiber entries are r×r matrices flattened
/// row-major.
#[derive(Clone, Debug)]
pub struct EndJets {
    pub dim: usize,
    pub degree: usize,
    pub rank: usize,
    pub coeffs: Vec<Vec<Jet2>>,
}

impl EndJets {
    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .map(|j| j.value().abs())
            .fold(0.0, f64::max)
    }
}

/// Covariant exterior derivative on coefficients:
/// `(dφ)^a_J = Σ_t (−1)^t (∂_{j_t} φ^a_{J∖t} + Σ_b A^a_{b,j_t} φ^b_{J∖t})`.
pub fn cov_ext(phi: &FormJets, bundle: &BundleAt) -> FormJets {
    let d = phi.dim;
    let r = phi.rank;
    assert_eq!(bundle.rank, r);
    let out_table = mi::indices(d, phi.degree + 1);
    let mut out = FormJets::zero(d, phi.degree + 1, r);
    for (pos, jidx) in out_table.iter().enumerate() {
        for a in 0..r {
            let mut acc = Jet2::constant(d, 0.0);
            for (t, &jt) in jidx.iter().enumerate() {
                let rest = mi::remove_at(jidx, t);
                let c = phi.coeff(&rest);
                let mut term = c[a].partial(jt as usize);
                for b in 0..r {
                    term = term.add(&bundle.a(a, b, jt as usize).mul(&c[b]));
                }
                if t % 2 == 1 {
                    term = term.neg();
                }
                acc = acc.add(&term);
            }
            out.coeffs[pos][a] = acc;
        }
    }
    out
}

/// Interior product with a vector whose components are jets. First-slot
/// convention: `(ι_X φ)(v_2..v_k) = φ(X, v_2..v_k)`.
pub fn interior_jets(xv: &[Jet2], phi: &FormJets) -> FormJets {
    assert!(phi.degree >= 1, "interior product needs degree >= 1");
    let d = phi.dim;
    let out_table = mi::indices(d, phi.degree - 1);
    let mut out = FormJets::zero(d, phi.degree - 1, phi.rank);
    for (pos, idx) in out_table.iter().enumerate() {
        for a in 0..phi.rank {
            let mut acc = Jet2::constant(d, 0.0);
            for j in 0..d as u8 {
                if let Some((full, sign)) = mi::insert(idx, j) {
                    let term = xv[j as usize].mul(&phi.coeff(&full)[a]).scale(sign);
                    acc = acc.add(&term);
                }
            }
            out.coeffs[pos][a] = acc;
        }
    }
    out
}

/// Interior product with a plain vector of values.
pub fn interior_values(v: &[f64], phi: &FormJets) -> FormJets {
    let xv: Vec<Jet2> = v.iter().map(|&c| Jet2::constant(phi.dim, c)).collect();
    interior_jets(&xv, phi)
}

/// Interior product on an End-valued form.
pub fn interior_end(xv: &[Jet2], phi: &EndJets) -> EndJets {
    let wrapped = FormJets {
        dim: phi.dim,
        degree: phi.degree,
        rank: phi.rank * phi.rank,
        coeffs: phi.coeffs.clone(),
    };
    let res = interior_jets(xv, &wrapped);
    EndJets {
        dim: phi.dim,
        degree: res.degree,
        rank: phi.rank,
        coeffs: res.coeffs,
    }
}

/// Wedge of a scalar form with an E-valued form, scalar factor on the left:
/// `(η∧φ)_K = Σ_{(I,J) shuffles} sgn · η_I φ_J`.
pub fn wedge(eta: &FormJets, phi: &FormJets) -> FormJets {
    assert_eq!(eta.rank, 1, "left wedge factor must be scalar-valued");
    let d = phi.dim;
    let degree = eta.degree + phi.degree;
    let mut out = FormJets::zero(d, degree, phi.rank);
    if degree > d {
        return out; // degree overflow is the zero form
    }
    let out_table = mi::indices(d, degree);
    for (pos, kidx) in out_table.iter().enumerate() {
        for (first, second, sign) in mi::shuffles(kidx, eta.degree) {
            let e = &eta.coeff(&first)[0];
            let p = phi.coeff(&second);
            for a in 0..phi.rank {
                let term = e.mul(&p[a]).scale(sign);
                out.coeffs[pos][a] = out.coeffs[pos][a].add(&term);
            }
        }
    }
    out
}

/// Covariant Lie derivative on coefficients:
/// `(L_X φ)^a_I = X^j ∂_j φ^a_I + A^a_b(X) φ^b_I + Σ_t ∂_{i_t} X^l · φ^a_{I[i_t→l]}`.
pub fn cov_lie(xv: &[Jet2], phi: &FormJets, bundle: &BundleAt) -> FormJets {
    let d = phi.dim;
    let r = phi.rank;
    let table = mi::indices(d, phi.degree);
    let mut out = FormJets::zero(d, phi.degree, r);
    for (pos, idx) in table.iter().enumerate() {
        for a in 0..r {
            let c = &phi.coeffs[pos];
            let mut acc = Jet2::constant(d, 0.0);
            for j in 0..d {
                acc = acc.add(&xv[j].mul(&c[a].partial(j)));
                for b in 0..r {
                    acc = acc.add(&bundle.a(a, b, j).mul(&xv[j]).mul(&phi.coeffs[pos][b]));
                }
            }
            for (t, &it) in idx.iter().enumerate() {
                let rest = mi::remove_at(idx, t);
                for l in 0..d as u8 {
                    let Some((full, sign)) = mi::insert(&rest, l) else {
                        continue;
                    };
                    // sign of sorting l into the t-th slot
                    let term = xv[l as usize]
                        .partial(it as usize)
                        .mul(&phi.coeff(&full)[a])
                        .scale(sign * slot_sign(idx, t, &rest));
                    acc = acc.add(&term);
                }
            }
            out.coeffs[pos][a] = acc;
        }
    }
    out
}

// The `insert` sign sorts l relative to `rest`; the removed slot t carries
// the sign of moving e_l from slot t to the front of `rest`, which is (−1)^t
// twice (once out, once in) — net factor from φ(..., e_l at slot t, ...) is
// the permutation sign of (i_0,...,l,...,i_{k−1}) against sorted order.
fn slot_sign(_idx: &[u8], t: usize, _rest: &[u8]) -> f64 {
    // Moving e_l out of slot t to the front costs (−1)^t; `mi::insert`
    // accounts for placing it into the sorted remainder.
    if t % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Curvature 2-form `R = dA + A∧A` of the bundle connection.
pub fn curvature(bundle: &BundleAt) -> EndJets {
    let d = bundle.dim;
    let r = bundle.rank;
    let table = mi::indices(d, 2);
    let mut coeffs = vec![vec![Jet2::constant(d, 0.0); r * r]; table.len()];
    for (pos, idx) in table.iter().enumerate() {
        let (i, j) = (idx[0] as usize, idx[1] as usize);
        for a in 0..r {
            for b in 0..r {
                let mut acc = bundle.a(a, b, j).partial(i).sub(&bundle.a(a, b, i).partial(j));
                for c in 0..r {
                    acc = acc.add(&bundle.a(a, c, i).mul(bundle.a(c, b, j)));
                    acc = acc.sub(&bundle.a(a, c, j).mul(bundle.a(c, b, i)));
                }
                coeffs[pos][a * r + b] = acc;
            }
        }
    }
    EndJets {
        dim: d,
        degree: 2,
        rank: r,
        coeffs,
    }
}

/// Action of an End-valued form on an E-valued form by wedge, End slots
/// first: `(R∧φ)^a_K = Σ sgn · R^a_{b,P} φ^b_Q` over (deg R, deg φ) shuffles.
pub fn end_act(rform: &EndJets, phi: &FormJets) -> FormJets {
    let d = phi.dim;
    let r = phi.rank;
    assert_eq!(rform.rank, r);
    let degree = rform.degree + phi.degree;
    let mut out = FormJets::zero(d, degree, r);
    if degree > d {
        return out;
    }
    let out_table = mi::indices(d, degree);
    for (pos, kidx) in out_table.iter().enumerate() {
        for (first, second, sign) in mi::shuffles(kidx, rform.degree) {
            let rm = &rform.coeffs[mi::position(d, &first)];
            let pv = phi.coeff(&second);
            for a in 0..r {
                let mut acc = Jet2::constant(d, 0.0);
                for b in 0..r {
                    acc = acc.add(&rm[a * r + b].mul(&pv[b]));
                }
                out.coeffs[pos][a] = out.coeffs[pos][a].add(&acc.scale(sign));
            }
        }
    }
    out
}

/// Covariant exterior derivative on End(E)-valued forms with the induced
/// connection `∇Φ = ∂Φ + [A, Φ]`.
pub fn d_end(rform: &EndJets, bundle: &BundleAt) -> EndJets {
    let d = rform.dim;
    let r = rform.rank;
    let out_table = mi::indices(d, rform.degree + 1);
    let in_table_pos = |idx: &[u8]| mi::position(d, idx);
    let mut coeffs = vec![vec![Jet2::constant(d, 0.0); r * r]; out_table.len()];
    for (pos, jidx) in out_table.iter().enumerate() {
        for a in 0..r {
            for b in 0..r {
                let mut acc = Jet2::constant(d, 0.0);
                for (t, &jt) in jidx.iter().enumerate() {
                    let rest = mi::remove_at(jidx, t);
                    let phi = &rform.coeffs[in_table_pos(&rest)];
                    let i = jt as usize;
                    let mut term = phi[a * r + b].partial(i);
                    for c in 0..r {
                        term = term.add(&bundle.a(a, c, i).mul(&phi[c * r + b]));
                        term = term.sub(&phi[a * r + c].mul(bundle.a(c, b, i)));
                    }
                    if t % 2 == 1 {
                        term = term.neg();
                    }
                    acc = acc.add(&term);
                }
                coeffs[pos][a * r + b] = acc;
            }
        }
    }
    EndJets {
        dim: d,
        degree: rform.degree + 1,
        rank: r,
        coeffs,
    }
}

/// The cotangent-valued companion of a scalar (n+1)-form:
/// `ω̃(v_1..v_n) = ι_{v_1∧..∧v_n} ω` as a covector, i.e.
/// `ω̃^b_I = ω(e_I, e_b)`.
pub fn tilde(omega: &FormJets) -> FormJets {
    assert_eq!(omega.rank, 1, "companion form needs a scalar-valued input");
    assert!(omega.degree >= 1);
    let d = omega.dim;
    let n = omega.degree - 1;
    let table = mi::indices(d, n);
    let mut out = FormJets::zero(d, n, d);
    for (pos, idx) in table.iter().enumerate() {
        for b in 0..d as u8 {
            if let Some((full, sign)) = mi::insert_last(idx, b) {
                out.coeffs[pos][b as usize] = omega.coeff(&full)[0].scale(sign);
            }
        }
    }
    out
}

/// Evaluation of the covariant exterior derivative through the invariant
/// (frame-free) formula on arbitrary vector fields; used as the second route
/// in the consistency checks.
pub fn cov_ext_invariant_eval(
    phi: &FormJets,
    bundle: &BundleAt,
    fields: &[Vec<Jet2>],
) -> Vec<f64> {
    let d = phi.dim;
    let r = phi.rank;
    let kp1 = fields.len();
    assert_eq!(kp1, phi.degree + 1);
    let mut out = vec![0.0; r];
    for i in 0..kp1 {
        // ∇_{X_i}( φ(X_0.., omit i) )
        let mut rest: Vec<&[Jet2]> = Vec::new();
        for (t, f) in fields.iter().enumerate() {
            if t != i {
                rest.push(f);
            }
        }
        let mut contracted = phi.clone();
        for f in &rest {
            contracted = interior_jets(f, &contracted);
        }
        let s = &contracted.coeffs[0]; // degree-0 coefficients, jets
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        for a in 0..r {
            let mut v = 0.0;
            for j in 0..d {
                v += fields[i][j].value() * s[a].g(j);
                for b in 0..r {
                    v += bundle.a(a, b, j).value() * fields[i][j].value() * s[b].value();
                }
            }
            out[a] += sign * v;
        }
    }
    for i in 0..kp1 {
        for j in i + 1..kp1 {
            let br = crate::geometry::bracket_jets(&fields[i], &fields[j]);
            let mut args: Vec<&[Jet2]> = vec![&br];
            for (t, f) in fields.iter().enumerate() {
                if t != i && t != j {
                    args.push(f);
                }
            }
            let mut contracted = phi.clone();
            for f in &args {
                contracted = interior_jets(f, &contracted);
            }
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            for a in 0..r {
                out[a] += sign * contracted.coeffs[0][a].value();
            }
        }
    }
    out
}

/// Identity checked by [`identity_residual`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdentityTag {
    /// `L_X = ι_X ∘ d + d ∘ ι_X`
    Cartan1,
    /// `ι_[X,Y] = L_X ∘ ι_Y − ι_Y ∘ L_X`
    Cartan2,
    /// `L_X ∘ d = (ι_X R) ∧ · + d ∘ L_X`
    Cartan3,
    /// `d∘d = R ∧ ·`
    DSquared,
    /// `d_End R = 0`
    Bianchi,
    /// `d ω̃ = dω + (−1)^n ∇ω` for scalar ω with the metric connection
    Tilde,
    /// `L_X ∘ d = d ∘ L_X` (flat connections only)
    FlatCommute,
    /// coefficient formula vs invariant formula for `d`
    DExtConsistency,
}

impl IdentityTag {
    pub fn id(self) -> &'static str {
        match self {
            IdentityTag::Cartan1 => "cartan1",
            IdentityTag::Cartan2 => "cartan2",
            IdentityTag::Cartan3 => "cartan3",
            IdentityTag::DSquared => "dsquared",
            IdentityTag::Bianchi => "bianchi",
            IdentityTag::Tilde => "tilde",
            IdentityTag::FlatCommute => "flat-commute",
            IdentityTag::DExtConsistency => "dext-consistency",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormError {
    #[error("identity `{0}` needs a metric on the model")]
    MissingMetric(&'static str),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Max-norm residual of one operator identity over random points, random
/// polynomial vector fields and random polynomial test forms.
pub fn identity_residual(
    chart: &Chart,
    bundle: &Bundle,
    metric: Option<&Metric>,
    tag: IdentityTag,
    samples: usize,
    seed: u64,
) -> Result<f64, FormError> {
    let d = chart.dim;
    let r = bundle.rank;
    let mut s = Sampler::new(seed);
    let mut worst = 0.0_f64;
    for step in 0..samples {
        let x = s.point(chart);
        let bat = bundle.at(&x)?;
        let xf = s.poly_field_on(chart, 2);
        let xj = xf.jets(&x)?;
        let degree = test_degree(tag, d, step);
        let phi = random_eform_on(chart, degree, r, &mut s);
        let pj = phi.jets_at(&x)?;
        let res = match tag {
            IdentityTag::Cartan1 => {
                let lhs = cov_lie(&xj, &pj, &bat);
                let mut rhs = interior_jets(&xj, &cov_ext(&pj, &bat));
                if pj.degree >= 1 {
                    rhs = rhs.add(&cov_ext(&interior_jets(&xj, &pj), &bat));
                }
                lhs.sub(&rhs).max_abs()
            }
            IdentityTag::Cartan2 => {
                let yf = s.poly_field_on(chart, 2);
                let yj = yf.jets(&x)?;
                let br = crate::geometry::bracket_jets(&xj, &yj);
                let lhs = interior_jets(&br, &pj);
                let rhs = cov_lie(&xj, &interior_jets(&yj, &pj), &bat)
                    .sub(&interior_jets(&yj, &cov_lie(&xj, &pj, &bat)));
                lhs.sub(&rhs).max_abs()
            }
            IdentityTag::Cartan3 => {
                let lhs = cov_lie(&xj, &cov_ext(&pj, &bat), &bat);
                let r2 = curvature(&bat);
                let rhs = end_act(&interior_end(&xj, &r2), &pj)
                    .add(&cov_ext(&cov_lie(&xj, &pj, &bat), &bat));
                lhs.sub(&rhs).max_abs()
            }
            IdentityTag::DSquared => {
                let lhs = cov_ext(&cov_ext(&pj, &bat), &bat);
                let rhs = end_act(&curvature(&bat), &pj);
                lhs.sub(&rhs).max_abs()
            }
            IdentityTag::Bianchi => d_end(&curvature(&bat), &bat).max_abs(),
            IdentityTag::FlatCommute => {
                let lhs = cov_lie(&xj, &cov_ext(&pj, &bat), &bat);
                let rhs = cov_ext(&cov_lie(&xj, &pj, &bat), &bat);
                lhs.sub(&rhs).max_abs()
            }
            IdentityTag::Tilde => {
                let g = metric.ok_or(FormError::MissingMetric("tilde"))?;
                let omega = random_eform_on(chart, degree.max(1), 1, &mut s);
                tilde_identity_residual(&omega.jets_at(&x)?, g, &x)?
            }
            IdentityTag::DExtConsistency => {
                let fields: Vec<Vec<Jet2>> = (0..pj.degree + 1)
                    .map(|_| s.poly_field_on(chart, 2).jets(&x))
                    .collect::<Result<_, _>>()?;
                let route_a = {
                    let df = cov_ext(&pj, &bat);
                    let refs: Vec<&[f64]> = Vec::new();
                    let _ = refs;
                    let vals: Vec<Vec<f64>> = fields
                        .iter()
                        .map(|f| f.iter().map(Jet2::value).collect())
                        .collect();
                    let slices: Vec<&[f64]> = vals.iter().map(Vec::as_slice).collect();
                    df.eval(&slices)
                };
                let route_b = cov_ext_invariant_eval(&pj, &bat, &fields);
                route_a
                    .iter()
                    .zip(&route_b)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            }
        };
        worst = worst.max(res);
    }
    Ok(worst)
}

/// Residual of `⟨dω̃(e_J), e_b⟩ − [ dω(e_J, e_b) + (−1)^n (∇_{e_b} ω)(e_J) ]`
/// at one point, for a scalar form `ω` with the metric's cotangent
/// connection on the companion form.
pub fn tilde_identity_residual(omega: &FormJets, g: &Metric, x: &[f64]) -> Result<f64, FormError> {
    let d = omega.dim;
    let n = omega.degree - 1;
    let gamma = g.christoffel(x)?;
    let ga = |k: usize, i: usize, j: usize| &gamma[(k * d + i) * d + j];
    // cotangent connection A^a_{b,i} = −Γ^b_{a i}
    let mut conn = Vec::with_capacity(d * d * d);
    for a in 0..d {
        for b in 0..d {
            for i in 0..d {
                conn.push(ga(b, a, i).neg());
            }
        }
    }
    let cot = BundleAt { dim: d, rank: d, conn };
    let lhs = cov_ext(&tilde(omega), &cot);

    // trivial bundle for the plain exterior derivative of ω
    let triv = BundleAt::trivial(1, d);
    let dw = cov_ext(omega, &triv);
    let sign_n = if n % 2 == 0 { 1.0 } else { -1.0 };

    let table = mi::indices(d, n + 1);
    let mut worst = 0.0_f64;
    for jidx in &table {
        for b in 0..d as u8 {
            let l = lhs.coeff(jidx)[b as usize].value();
            // dω(e_J, e_b)
            let dterm = match mi::insert_last(jidx, b) {
                Some((full, sign)) => sign * dw.coeff(&full)[0].value(),
                None => 0.0,
            };
            // (∇_{e_b} ω)(e_J) = ∂_b ω_J − Σ_t Γ^l_{j_t b} ω(e_{J[j_t → l]})
            let mut nabla = omega.coeff(jidx)[0].g(b as usize);
            for (t, &jt) in jidx.iter().enumerate() {
                let rest = mi::remove_at(jidx, t);
                for lidx in 0..d as u8 {
                    let Some((full, sign)) = mi::insert(&rest, lidx) else {
                        continue;
                    };
                    let slot = if t % 2 == 0 { 1.0 } else { -1.0 };
                    nabla -= ga(lidx as usize, jt as usize, b as usize).value()
                        * sign
                        * slot
                        * omega.coeff(&full)[0].value();
                }
            }
            let res = (l - dterm - sign_n * nabla).abs();
            worst = worst.max(res);
        }
    }
    Ok(worst)
}

fn test_degree(tag: IdentityTag, d: usize, step: usize) -> usize {
    let lo = match tag {
        IdentityTag::Cartan2 => 1, // interior product needs a slot
        _ => 0,
    };
    let hi = match tag {
        // keep dφ nontrivial where the identity involves d
        IdentityTag::Tilde => d - 1,
        _ => d.min(3),
    };
    lo + step % (hi - lo + 1)
}

/// Random E-valued form with polynomial coefficients of degree ≤ 2.
pub fn random_eform(dim: usize, degree: usize, rank: usize, s: &mut Sampler) -> EForm {
    let mut out = EForm::new(dim, degree, rank);
    for idx in mi::indices(dim, degree) {
        let comps = (0..rank).map(|_| s.poly(dim, 2)).collect();
        out.set(&idx, comps);
    }
    out
}

/// Random form with chart-normalized polynomial coefficients.
pub fn random_eform_on(chart: &Chart, degree: usize, rank: usize, s: &mut Sampler) -> EForm {
    let mut out = EForm::new(chart.dim, degree, rank);
    for idx in mi::indices(chart.dim, degree) {
        let comps = (0..rank).map(|_| s.poly_on(chart, 2)).collect();
        out.set(&idx, comps);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Chart, VectorField};

    fn sf(src: &str, d: usize) -> SmoothFunction {
        SmoothFunction::parse(src, d).unwrap()
    }

    #[test]
    fn basis_pairing_and_antisymmetry() {
        let mut w = EForm::new(2, 2, 1);
        w.set_scalar(&[0, 1], sf("1", 2));
        let wj = w.jets_at(&[0.0, 0.0]).unwrap();
        assert_eq!(wj.eval(&[&[1.0, 0.0], &[0.0, 1.0]]), vec![1.0]);
        assert_eq!(wj.eval(&[&[0.0, 1.0], &[1.0, 0.0]]), vec![-1.0]);
    }

    #[test]
    fn coefficient_read_off() {
        // φ = x0·dx1 ⊗ e at x=(2,0), v=e1 → 2·e
        let mut phi = EForm::new(2, 1, 1);
        phi.set_scalar(&[1], sf("x0", 2));
        let pj = phi.jets_at(&[2.0, 0.0]).unwrap();
        assert_eq!(pj.eval(&[&[0.0, 1.0]]), vec![2.0]);
    }

    #[test]
    fn interior_product_slots() {
        let mut w = EForm::new(2, 2, 1);
        w.set_scalar(&[0, 1], sf("1", 2));
        let wj = w.jets_at(&[0.3, 0.4]).unwrap();
        let i0 = interior_values(&[1.0, 0.0], &wj);
        assert_eq!(i0.coeff(&[1])[0].value(), 1.0); // ι_{∂x0}(dx0∧dx1) = dx1
        assert_eq!(i0.coeff(&[0])[0].value(), 0.0);
        let i1 = interior_values(&[0.0, 1.0], &wj);
        assert_eq!(i1.coeff(&[0])[0].value(), -1.0); // ι_{∂x1}(dx0∧dx1) = −dx0
        // ι_X ι_X = 0
        let v = [0.7, -0.2];
        let twice = interior_values(&v, &interior_values(&v, &wj));
        assert!(twice.max_abs() < 1e-15);
    }

    #[test]
    fn wedge_unit_decomposable_and_repeated() {
        let d = 2;
        let mut one = EForm::new(d, 0, 1);
        one.set_scalar(&[], sf("1", d));
        let mut phi = EForm::new(d, 1, 1);
        phi.set_scalar(&[1], sf("x0", d));
        let x = [1.4, -0.3];
        let oj = one.jets_at(&x).unwrap();
        let pj = phi.jets_at(&x).unwrap();
        let w = wedge(&oj, &pj);
        assert!((w.coeff(&[1])[0].value() - 1.4).abs() < 1e-15);

        let mut dx0 = EForm::new(d, 1, 1);
        dx0.set_scalar(&[0], sf("1", d));
        let d0 = dx0.jets_at(&x).unwrap();
        let mut e1 = EForm::new(d, 1, 1);
        e1.set_scalar(&[1], sf("1", d));
        let w2 = wedge(&d0, &e1.jets_at(&x).unwrap());
        assert_eq!(w2.coeff(&[0, 1])[0].value(), 1.0); // dx0∧dx1

        let w3 = wedge(&d0, &d0);
        assert!(w3.max_abs() < 1e-15); // dx0∧dx0 = 0
    }

    #[test]
    fn cov_ext_reduces_to_d_for_trivial_connection() {
        // φ = x0 dx1, dφ = dx0∧dx1
        let d = 2;
        let b = Bundle::trivial(1, d);
        let mut phi = EForm::new(d, 1, 1);
        phi.set_scalar(&[1], sf("x0", d));
        let x = [0.7, 1.1];
        let df = cov_ext(&phi.jets_at(&x).unwrap(), &b.at(&x).unwrap());
        assert_eq!(df.coeff(&[0, 1])[0].value(), 1.0);
    }

    #[test]
    fn rank_one_connection_d_squared_is_curvature() {
        // rank 1, A = x0 dx1 on R^2, s ≡ 1: d s = x0 dx1; d(d s) = dx0∧dx1 = R·s
        let d = 2;
        let comps = vec![sf("0", d), sf("x0", d)];
        let bundle = Bundle {
            rank: 1,
            conn: Connection::Coeffs { rank: 1, comps },
        };
        let x = [0.4, -0.9];
        let bat = bundle.at(&x).unwrap();
        let mut s0 = EForm::new(d, 0, 1);
        s0.set_scalar(&[], sf("1", d));
        let sj = s0.jets_at(&x).unwrap();
        let ds = cov_ext(&sj, &bat);
        assert!((ds.coeff(&[1])[0].value() - x[0]).abs() < 1e-15);
        let dds = cov_ext(&ds, &bat);
        assert!((dds.coeff(&[0, 1])[0].value() - 1.0).abs() < 1e-14);
        let r = curvature(&bat);
        assert!((r.coeffs[0][0].value() - 1.0).abs() < 1e-15);
        // top-degree d is the zero form
        let top = cov_ext(&dds, &bat);
        assert_eq!(top.coeffs.len(), 0);
    }

    #[test]
    fn lie_derivative_examples() {
        let d = 2;
        let b = Bundle::trivial(1, d);
        let x = [0.5, 0.8];
        let bat = b.at(&x).unwrap();
        // L_{∂x0}(x0 dx1) = dx1
        let xf = VectorField::parse(&["1", "0"], d).unwrap();
        let mut phi = EForm::new(d, 1, 1);
        phi.set_scalar(&[1], sf("x0", d));
        let lj = cov_lie(&xf.jets(&x).unwrap(), &phi.jets_at(&x).unwrap(), &bat);
        assert!((lj.coeff(&[1])[0].value() - 1.0).abs() < 1e-15);
        assert!(lj.coeff(&[0])[0].value().abs() < 1e-15);
        // X = 0 → 0
        let zf = VectorField::parse(&["0", "0"], d).unwrap();
        let lz = cov_lie(&zf.jets(&x).unwrap(), &phi.jets_at(&x).unwrap(), &bat);
        assert!(lz.max_abs() < 1e-15);
    }

    #[test]
    fn tilde_contractions() {
        // n = 1: ω = dx0∧dx1, ω̃(∂x0) = dx1
        let d = 2;
        let mut w = EForm::new(d, 2, 1);
        w.set_scalar(&[0, 1], sf("1", d));
        let t = tilde(&w.jets_at(&[0.0, 0.0]).unwrap());
        assert_eq!(t.coeff(&[0])[1].value(), 1.0); // ω̃_0 = dx1
        assert_eq!(t.coeff(&[1])[0].value(), -1.0); // ω̃_1 = −dx0

        // flat R^4 volume form: ω̃(e0,e1,e2) = dx3
        let d = 4;
        let mut vol = EForm::new(d, 4, 1);
        vol.set_scalar(&[0, 1, 2, 3], sf("1", d));
        let t = tilde(&vol.jets_at(&[0.0; 4]).unwrap());
        let c = t.coeff(&[0, 1, 2]);
        assert_eq!(
            c.iter().map(Jet2::value).collect::<Vec<_>>(),
            vec![0.0, 0.0, 0.0, 1.0]
        );
        // repeated vector → 0
        let mut fj = t.clone();
        fj = interior_values(&[1.0, 0.0, 0.0, 0.0], &fj);
        fj = interior_values(&[1.0, 0.0, 0.0, 0.0], &fj);
        assert!(fj.max_abs() < 1e-15);
    }

    #[test]
    fn identities_on_a_curved_rank_two_bundle() {
        // Synthetic rank-2 connection with polynomial coefficients on R^3:
        // all the Cartan-type identities must hold to first principles.
        let d = 3;
        let chart = Chart::new_box(vec![-1.0; d], vec![1.0; d]);
        let srcs = [
            "x0", "0.5*x1", "x2^2", "1", "x0*x1", "0.3", "-x2", "0.2*x0", "x1",
            "0.7", "x0^2", "-0.4*x1",
        ];
        let comps: Vec<SmoothFunction> = srcs.iter().map(|s| sf(s, d)).collect();
        let bundle = Bundle {
            rank: 2,
            conn: Connection::Coeffs { rank: 2, comps },
        };
        for tag in [
            IdentityTag::Cartan1,
            IdentityTag::Cartan2,
            IdentityTag::Cartan3,
            IdentityTag::DSquared,
            IdentityTag::Bianchi,
            IdentityTag::DExtConsistency,
        ] {
            let r = identity_residual(&chart, &bundle, None, tag, 40, 1234).unwrap();
            assert!(r < 1e-8, "{tag:?} residual {r}");
        }
    }

    #[test]
    fn tilde_identity_with_warped_metric() {
        let d = 2;
        let chart = Chart::new_box(vec![0.5, -1.0], vec![2.0, 1.0]);
        let comps = vec![sf("1", d), sf("0", d), sf("0", d), sf("x0^2", d)];
        let g = Metric::new(d, comps);
        let bundle = Bundle::trivial(1, d);
        let r =
            identity_residual(&chart, &bundle, Some(&g), IdentityTag::Tilde, 60, 99).unwrap();
        assert!(r < 1e-9, "tilde residual {r}");
    }

    #[test]
    fn flat_commute_holds_for_trivial_connection() {
        let d = 3;
        let chart = Chart::new_box(vec![-1.0; d], vec![1.0; d]);
        let bundle = Bundle::trivial(2, d);
        let r =
            identity_residual(&chart, &bundle, None, IdentityTag::FlatCommute, 40, 7).unwrap();
        assert!(r < 1e-9, "flat commute residual {r}");
    }
}
