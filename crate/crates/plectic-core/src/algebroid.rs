//! Lie algebroid calculus: anchors, structure functions, algebroid
//! connections, mixed-bidegree form spaces and the operator tower on them —
//! the algebroid differential, the generalized interior product against the
//! anchor, the covariant exterior derivative in the manifold directions and
//! the algebroid-covariant exterior derivative in the frame directions.
//!
//! Brackets of non-frame sections are always expanded by the Leibniz rule
//! from the structure functions; no closed-form bracket of arbitrary
//! sections is ever stored.

use std::collections::BTreeMap;

use crate::expr::{EvalError, SmoothFunction};
use crate::form::{interior_jets, BundleAt, FormJets};
use crate::geometry::{Chart, Connection, GeometryError, VectorField};
use crate::jet::Jet2;
use crate::multi_index as mi;
use crate::sample::Sampler;

/// A Lie algebroid on the chart: rank, anchor components `ρ^i_a`, structure
/// functions `c^c_{ab}` on the frame (antisymmetric by construction) and a
/// bundle connection on the algebroid itself.
#[derive(Clone, Debug)]
pub struct Algebroid {
    pub dim: usize,
    pub rank: usize,
    anchor: Vec<SmoothFunction>,    // a*dim + i
    structure: Vec<SmoothFunction>, // (a*rank + b)*rank + c
    pub aconn: Connection,
}

impl Algebroid {
    /// Algebroid with the given anchor rows, zero structure functions and
    /// the trivial connection.
    pub fn new(dim: usize, rank: usize, anchor: Vec<SmoothFunction>) -> Algebroid {
        assert_eq!(anchor.len(), rank * dim);
        Algebroid {
            dim,
            rank,
            anchor,
            structure: vec![SmoothFunction::constant(dim, 0.0); rank * rank * rank],
            aconn: Connection::trivial(rank, dim),
        }
    }

    /// Sets `[e_a, e_b] = Σ_c comps[c] e_c` and mirrors the (b, a) entry.
    pub fn set_bracket(&mut self, a: usize, b: usize, comps: Vec<SmoothFunction>) {
        assert!(a != b, "diagonal brackets vanish by antisymmetry");
        assert_eq!(comps.len(), self.rank);
        let m = self.rank;
        for (c, f) in comps.into_iter().enumerate() {
            let neg = SmoothFunction::from_expr(
                crate::expr::Expr::Neg(Box::new(f.ast().clone()), (0, 0)),
                self.dim,
            )
            .unwrap();
            self.structure[(a * m + b) * m + c] = f;
            self.structure[(b * m + a) * m + c] = neg;
        }
    }

    pub fn anchor_expr(&self, a: usize, i: usize) -> &SmoothFunction {
        &self.anchor[a * self.dim + i]
    }

    pub fn structure_expr(&self, a: usize, b: usize, c: usize) -> &SmoothFunction {
        &self.structure[(a * self.rank + b) * self.rank + c]
    }

    /// Anchor image of the `a`-th frame section as a vector field.
    pub fn anchor_field(&self, a: usize) -> VectorField {
        VectorField::from_exprs(
            (0..self.dim)
                .map(|i| self.anchor[a * self.dim + i].clone())
                .collect(),
        )
    }

    pub fn at(&self, x: &[f64]) -> Result<AlgebroidAt, GeometryError> {
        let anchor = self
            .anchor
            .iter()
            .map(|f| f.eval_jet2(x))
            .collect::<Result<Vec<_>, _>>()?;
        let structure = self
            .structure
            .iter()
            .map(|f| f.eval_jet2(x))
            .collect::<Result<Vec<_>, _>>()?;
        let aconn = self.aconn.jets(x)?;
        Ok(AlgebroidAt {
            dim: self.dim,
            rank: self.rank,
            anchor,
            structure,
            aconn,
        })
    }
}

/// Algebroid data evaluated at a point.
#[derive(Clone, Debug)]
pub struct AlgebroidAt {
    pub dim: usize,
    pub rank: usize,
    anchor: Vec<Jet2>,
    structure: Vec<Jet2>,
    aconn: Vec<Jet2>,
}

impl AlgebroidAt {
    #[inline]
    pub fn rho(&self, a: usize, i: usize) -> &Jet2 {
        &self.anchor[a * self.dim + i]
    }

    #[inline]
    pub fn c(&self, a: usize, b: usize, c: usize) -> &Jet2 {
        &self.structure[(a * self.rank + b) * self.rank + c]
    }

    /// `∇^A_{∂_i} e_b = Σ_c aconn^c_{b,i} e_c`.
    #[inline]
    pub fn aconn(&self, c: usize, b: usize, i: usize) -> &Jet2 {
        &self.aconn[(c * self.rank + b) * self.dim + i]
    }

    /// Anchor jets of the `a`-th frame section.
    pub fn rho_jets(&self, a: usize) -> Vec<Jet2> {
        (0..self.dim).map(|i| self.rho(a, i).clone()).collect()
    }

    /// Anchor values of the `a`-th frame section.
    pub fn rho_values(&self, a: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.rho(a, i).value()).collect()
    }

    /// `ʊ^{TM}_{e_a} ∂_i = ρ(∇^A_{∂_i} e_a) + [ρ(e_a), ∂_i]`, components
    /// `u^l_{a,i} = Σ_c aconn^c_{a,i} ρ^l_c − ∂_i ρ^l_a`.
    fn u_tm(&self, a: usize, i: usize, l: usize) -> Jet2 {
        let mut acc = self.rho(a, l).partial(i).neg();
        for c in 0..self.rank {
            acc = acc.add(&self.aconn(c, a, i).mul(self.rho(c, l)));
        }
        acc
    }
}

/// A section of the algebroid, expanded on the frame.
#[derive(Clone, Debug)]
pub struct ASection {
    pub comps: Vec<SmoothFunction>,
}

impl ASection {
    pub fn constant_frame(dim: usize, rank: usize, a: usize) -> ASection {
        let comps = (0..rank)
            .map(|c| SmoothFunction::constant(dim, if c == a { 1.0 } else { 0.0 }))
            .collect();
        ASection { comps }
    }

    pub fn jets(&self, x: &[f64]) -> Result<Vec<Jet2>, EvalError> {
        self.comps.iter().map(|f| f.eval_jet2(x)).collect()
    }
}

/// Leibniz-expanded bracket of two sections on the frame:
/// `[α,β]^c = α^a β^b c^c_{ab} + ρ(α)(β^c) − ρ(β)(α^c)`.
pub fn section_bracket(alpha: &[Jet2], beta: &[Jet2], alg: &AlgebroidAt) -> Vec<Jet2> {
    let m = alg.rank;
    let d = alg.dim;
    (0..m)
        .map(|cc| {
            let mut acc = Jet2::constant(d, 0.0);
            for a in 0..m {
                for b in 0..m {
                    acc = acc.add(&alpha[a].mul(&beta[b]).mul(alg.c(a, b, cc)));
                }
            }
            for a in 0..m {
                for i in 0..d {
                    acc = acc.add(&alpha[a].mul(alg.rho(a, i)).mul(&beta[cc].partial(i)));
                    acc = acc.sub(&beta[a].mul(alg.rho(a, i)).mul(&alpha[cc].partial(i)));
                }
            }
            acc
        })
        .collect()
}

/// Anchor image `ρ(α)` of a section given by component jets.
pub fn anchor_of(alpha: &[Jet2], alg: &AlgebroidAt) -> Vec<Jet2> {
    let d = alg.dim;
    (0..d)
        .map(|i| {
            let mut acc = Jet2::constant(d, 0.0);
            for a in 0..alg.rank {
                acc = acc.add(&alpha[a].mul(alg.rho(a, i)));
            }
            acc
        })
        .collect()
}

/// A stored (p, q)-bidegree E-valued form: p slots on the tangent bundle,
/// q slots on the algebroid.
#[derive(Clone, Debug)]
pub struct MixedForm {
    pub dim: usize,
    pub arank: usize,
    pub p: usize,
    pub q: usize,
    pub rank: usize,
    coeffs: BTreeMap<(Vec<u8>, Vec<u8>), Vec<SmoothFunction>>,
}

impl MixedForm {
    pub fn new(dim: usize, arank: usize, p: usize, q: usize, rank: usize) -> MixedForm {
        MixedForm {
            dim,
            arank,
            p,
            q,
            rank,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, ti: &[u8], ai: &[u8], comps: Vec<SmoothFunction>) {
        assert_eq!(ti.len(), self.p);
        assert_eq!(ai.len(), self.q);
        assert!(ti.windows(2).all(|w| w[0] < w[1]));
        assert!(ai.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(comps.len(), self.rank);
        self.coeffs.insert((ti.to_vec(), ai.to_vec()), comps);
    }

    pub fn entries(
        &self,
    ) -> impl Iterator<Item = (&(Vec<u8>, Vec<u8>), &Vec<SmoothFunction>)> {
        self.coeffs.iter()
    }

    pub fn jets_at(&self, x: &[f64]) -> Result<MixedJets, EvalError> {
        let ti_table = mi::indices(self.dim, self.p);
        let ai_table = mi::indices(self.arank, self.q);
        let mut coeffs =
            vec![vec![vec![Jet2::constant(self.dim, 0.0); self.rank]; ai_table.len()]; ti_table.len()];
        for ((ti, ai), comps) in &self.coeffs {
            let tp = mi::position(self.dim, ti);
            let ap = mi::position(self.arank, ai);
            for (a, f) in comps.iter().enumerate() {
                coeffs[tp][ap][a] = f.eval_jet2(x)?;
            }
        }
        Ok(MixedJets {
            dim: self.dim,
            arank: self.arank,
            p: self.p,
            q: self.q,
            rank: self.rank,
            coeffs,
        })
    }
}

/// A mixed-bidegree form evaluated at a point, coefficients dense over the
/// two lexicographic index tables.
#[derive(Clone, Debug)]
pub struct MixedJets {
    pub dim: usize,
    pub arank: usize,
    pub p: usize,
    pub q: usize,
    pub rank: usize,
    /// `[tm_position][a_position][fiber]`
    pub coeffs: Vec<Vec<Vec<Jet2>>>,
}

impl MixedJets {
    pub fn zero(dim: usize, arank: usize, p: usize, q: usize, rank: usize) -> MixedJets {
        let nt = mi::count(dim, p);
        let na = mi::count(arank, q);
        MixedJets {
            dim,
            arank,
            p,
            q,
            rank,
            coeffs: vec![vec![vec![Jet2::constant(dim, 0.0); rank]; na]; nt],
        }
    }

    pub fn coeff(&self, ti: &[u8], ai: &[u8]) -> &[Jet2] {
        &self.coeffs[mi::position(self.dim, ti)][mi::position(self.arank, ai)]
    }

    pub fn sub(&self, rhs: &MixedJets) -> MixedJets {
        self.zip(rhs, Jet2::sub)
    }

    pub fn add(&self, rhs: &MixedJets) -> MixedJets {
        self.zip(rhs, Jet2::add)
    }

    fn zip(&self, rhs: &MixedJets, op: impl Fn(&Jet2, &Jet2) -> Jet2) -> MixedJets {
        assert_eq!((self.p, self.q, self.rank), (rhs.p, rhs.q, rhs.rank));
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(u, v)| {
                u.iter()
                    .zip(v)
                    .map(|(cu, cv)| cu.iter().zip(cv).map(|(a, b)| op(a, b)).collect())
                    .collect()
            })
            .collect();
        MixedJets {
            dim: self.dim,
            arank: self.arank,
            p: self.p,
            q: self.q,
            rank: self.rank,
            coeffs,
        }
    }

    pub fn scale(&self, c: f64) -> MixedJets {
        let coeffs = self
            .coeffs
            .iter()
            .map(|u| {
                u.iter()
                    .map(|cu| cu.iter().map(|j| j.scale(c)).collect())
                    .collect()
            })
            .collect();
        MixedJets {
            dim: self.dim,
            arank: self.arank,
            p: self.p,
            q: self.q,
            rank: self.rank,
            coeffs,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .flatten()
            .map(|j| j.value().abs())
            .fold(0.0, f64::max)
    }

    /// Pure TM part for q = 0, as an ordinary E-valued form.
    pub fn as_form(&self) -> FormJets {
        assert_eq!(self.q, 0);
        FormJets {
            dim: self.dim,
            degree: self.p,
            rank: self.rank,
            coeffs: self.coeffs.iter().map(|u| u[0].clone()).collect(),
        }
    }

    /// Multilinear evaluation on `p` tangent vectors and `q` frame-coefficient
    /// vectors (second pass of the defect checkers).
    pub fn eval(&self, tvecs: &[&[f64]], avecs: &[&[f64]]) -> Vec<f64> {
        assert_eq!(tvecs.len(), self.p);
        assert_eq!(avecs.len(), self.q);
        let ti_table = mi::indices(self.dim, self.p);
        let ai_table = mi::indices(self.arank, self.q);
        let mut out = vec![0.0; self.rank];
        for (tp, ti) in ti_table.iter().enumerate() {
            let mt = minor(tvecs, ti);
            if mt == 0.0 {
                continue;
            }
            for (ap, ai) in ai_table.iter().enumerate() {
                let ma = minor(avecs, ai);
                for a in 0..self.rank {
                    out[a] += mt * ma * self.coeffs[tp][ap][a].value();
                }
            }
        }
        out
    }
}

/// Determinant of the square matrix `vecs[row][idx[col]]` by permutation
/// expansion (sizes here are at most 4).
fn minor(vecs: &[&[f64]], idx: &[u8]) -> f64 {
    let k = idx.len();
    if k == 0 {
        return 1.0;
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut total = 0.0;
    permute(&mut perm, 0, &mut |p, sign| {
        let mut prod = sign;
        for (row, &col) in p.iter().enumerate() {
            prod *= vecs[row][idx[col] as usize];
        }
        total += prod;
    });
    total
}

fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize], f64)) {
    let n = perm.len();
    if k == n {
        // parity of the permutation
        let mut seen = vec![false; n];
        let mut sign = 1.0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cur = perm[cur];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        visit(perm, sign);
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        permute(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AlgebroidError {
    #[error("the scalar algebroid differential requires a trivial bundle connection")]
    NontrivialConnection,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Covariant exterior derivative in the manifold directions,
/// `Ω^{p,q} → Ω^{p+1,q}`, with the induced connection correction
/// `−Σ_s ν(..., ∇^A_{∂_i} e_{k_s}, ...)`.
pub fn mixed_d(nu: &MixedJets, bundle: &BundleAt, alg: &AlgebroidAt) -> MixedJets {
    let d = nu.dim;
    let r = nu.rank;
    let m = nu.arank;
    let mut out = MixedJets::zero(d, m, nu.p + 1, nu.q, r);
    let out_t = mi::indices(d, nu.p + 1);
    let ai_table = mi::indices(m, nu.q);
    for (tp, jidx) in out_t.iter().enumerate() {
        for (ap, kidx) in ai_table.iter().enumerate() {
            for a in 0..r {
                let mut acc = Jet2::constant(d, 0.0);
                for (t, &jt) in jidx.iter().enumerate() {
                    let i = jt as usize;
                    let rest = mi::remove_at(jidx, t);
                    let base = nu.coeff(&rest, kidx);
                    let mut term = base[a].partial(i);
                    for b in 0..r {
                        term = term.add(&bundle.a(a, b, i).mul(&base[b]));
                    }
                    // induced-connection correction on the algebroid slots
                    for (s, &ks) in kidx.iter().enumerate() {
                        let arest = mi::remove_at(kidx, s);
                        let slot = if s % 2 == 0 { 1.0 } else { -1.0 };
                        for cc in 0..m as u8 {
                            let Some((afull, sign)) = mi::insert(&arest, cc) else {
                                continue;
                            };
                            let v = alg
                                .aconn(cc as usize, ks as usize, i)
                                .mul(&nu.coeff(&rest, &afull)[a])
                                .scale(slot * sign);
                            term = term.sub(&v);
                        }
                    }
                    if t % 2 == 1 {
                        term = term.neg();
                    }
                    acc = acc.add(&term);
                }
                out.coeffs[tp][ap][a] = acc;
            }
        }
    }
    out
}

/// Algebroid-covariant exterior derivative in the frame directions,
/// `Ω^{p,q} → Ω^{p,q+1}`:
///
/// ```text
/// (ðν)(α_1..α_{q+1}) = Σ_s (−1)^{s} ʊ_{α_s}( ν(α_1..α̌_s..) )
///                    + Σ_{s<s'} (−1)^{s+s'} ν([α_s, α_{s'}], α_1.. omit ..)
/// ```
///
/// with `ʊ_{e_a}` acting on a p-form block through `∇^E_{ρ(e_a)}` minus the
/// `ʊ^{TM}` substitutions in the tangent slots.
pub fn mixed_eth(nu: &MixedJets, bundle: &BundleAt, alg: &AlgebroidAt) -> MixedJets {
    let d = nu.dim;
    let r = nu.rank;
    let m = nu.arank;
    let mut out = MixedJets::zero(d, m, nu.p, nu.q + 1, r);
    let ti_table = mi::indices(d, nu.p);
    let out_a = mi::indices(m, nu.q + 1);
    for (tp, jidx) in ti_table.iter().enumerate() {
        for (ap, kidx) in out_a.iter().enumerate() {
            for a in 0..r {
                let mut acc = Jet2::constant(d, 0.0);
                // ʊ terms
                for (s, &ks) in kidx.iter().enumerate() {
                    let arest = mi::remove_at(kidx, s);
                    let base = nu.coeff(jidx, &arest);
                    let mut term = Jet2::constant(d, 0.0);
                    for i in 0..d {
                        term = term.add(&alg.rho(ks as usize, i).mul(&base[a].partial(i)));
                        for b in 0..r {
                            term = term
                                .add(&alg.rho(ks as usize, i).mul(bundle.a(a, b, i)).mul(&base[b]));
                        }
                    }
                    // tangent-slot substitutions by ʊ^{TM}
                    for (t, &jt) in jidx.iter().enumerate() {
                        let trest = mi::remove_at(jidx, t);
                        let slot = if t % 2 == 0 { 1.0 } else { -1.0 };
                        for l in 0..d as u8 {
                            let Some((tfull, sign)) = mi::insert(&trest, l) else {
                                continue;
                            };
                            let v = alg
                                .u_tm(ks as usize, jt as usize, l as usize)
                                .mul(&nu.coeff(&tfull, &arest)[a])
                                .scale(slot * sign);
                            term = term.sub(&v);
                        }
                    }
                    if s % 2 == 1 {
                        term = term.neg();
                    }
                    acc = acc.add(&term);
                }
                // bracket terms
                for s in 0..kidx.len() {
                    for s2 in s + 1..kidx.len() {
                        let mut arest = kidx.to_vec();
                        arest.remove(s2);
                        arest.remove(s);
                        let sgn_pair = if (s + s2) % 2 == 0 { 1.0 } else { -1.0 };
                        for cc in 0..m as u8 {
                            let Some((afull, sign)) = mi::insert(&arest, cc) else {
                                continue;
                            };
                            let v = alg
                                .c(kidx[s] as usize, kidx[s2] as usize, cc as usize)
                                .mul(&nu.coeff(jidx, &afull)[a])
                                .scale(sgn_pair * sign);
                            acc = acc.add(&v);
                        }
                    }
                }
                out.coeffs[tp][ap][a] = acc;
            }
        }
    }
    out
}

/// Generalized interior product against the anchor: an E-valued m-form turns
/// into a (m−k, k)-bidegree form by
/// `(ι^k_ρ φ)(e_{a_1}..e_{a_k}) = ι_{ρ(e_{a_1})∧..∧ρ(e_{a_k})} φ`
/// with the multi-vector convention `ι_{u∧v} = ι_v ∘ ι_u`.
pub fn iota_rho(k: usize, phi: &FormJets, alg: &AlgebroidAt) -> MixedJets {
    assert!(k <= phi.degree, "interior order exceeds form degree");
    let d = phi.dim;
    let m = alg.rank;
    let mut out = MixedJets::zero(d, m, phi.degree - k, k, phi.rank);
    let ai_table = mi::indices(m, k);
    for (ap, kidx) in ai_table.iter().enumerate() {
        let mut cur = phi.clone();
        for &a in kidx.iter() {
            cur = interior_jets(&alg.rho_jets(a as usize), &cur);
        }
        for (tp, c) in cur.coeffs.into_iter().enumerate() {
            out.coeffs[tp][ap] = c;
        }
    }
    out
}

/// Pairs the single algebroid slot of a (p, 1)-form with a section:
/// `ν^α(X_1..X_p) = ⟨ν(X_1..X_p), α⟩`.
pub fn pair_section(nu: &MixedJets, alpha: &[Jet2]) -> FormJets {
    assert_eq!(nu.q, 1, "pairing needs exactly one algebroid slot");
    let mut out = FormJets::zero(nu.dim, nu.p, nu.rank);
    for (tp, u) in nu.coeffs.iter().enumerate() {
        for a in 0..nu.arank {
            for f in 0..nu.rank {
                out.coeffs[tp][f] = out.coeffs[tp][f].add(&alpha[a].mul(&u[a][f]));
            }
        }
    }
    out
}

/// Wedge of two pure algebroid forms (p = 0), scalar factor on the left.
pub fn a_wedge(theta: &MixedJets, tau: &MixedJets) -> MixedJets {
    assert_eq!(theta.p, 0);
    assert_eq!(tau.p, 0);
    assert_eq!(theta.rank, 1);
    let m = theta.arank;
    let q = theta.q + tau.q;
    let mut out = MixedJets::zero(theta.dim, m, 0, q, tau.rank);
    if q > m {
        return out;
    }
    let table = mi::indices(m, q);
    for (pos, kidx) in table.iter().enumerate() {
        for (first, second, sign) in mi::shuffles(kidx, theta.q) {
            let t = &theta.coeffs[0][mi::position(m, &first)][0];
            let u = &tau.coeffs[0][mi::position(m, &second)];
            for f in 0..tau.rank {
                out.coeffs[0][pos][f] = out.coeffs[0][pos][f].add(&t.mul(&u[f]).scale(sign));
            }
        }
    }
    out
}

/// Scalar algebroid differential on pure A-forms; rejects a nontrivial
/// bundle connection (the scalar complex has none).
pub fn algebroid_diff(
    theta: &MixedJets,
    alg: &AlgebroidAt,
    conn: &Connection,
) -> Result<MixedJets, AlgebroidError> {
    if !conn.is_syntactically_trivial() {
        return Err(AlgebroidError::NontrivialConnection);
    }
    assert_eq!(theta.p, 0);
    assert_eq!(theta.rank, 1);
    let triv = BundleAt::trivial(1, theta.dim);
    Ok(mixed_eth(theta, &triv, alg))
}

/// A-covariant exterior derivative on pure A-forms with the pullback
/// connection `ʊ^E_α = ∇^E_{ρ(α)}`.
pub fn a_cov_ext_deriv(theta: &MixedJets, bundle: &BundleAt, alg: &AlgebroidAt) -> MixedJets {
    assert_eq!(theta.p, 0);
    mixed_eth(theta, bundle, alg)
}

/// Curvature of the pullback A-connection on frame pairs and frame sections:
/// `ℜ(e_a, e_b) e_c` as r×r matrices over increasing (a, b).
pub struct ACurvature {
    pub arank: usize,
    pub rank: usize,
    /// `[pair_position][a*rank + b]`
    pub mats: Vec<Vec<Jet2>>,
}

pub fn a_curvature(bundle: &BundleAt, alg: &AlgebroidAt) -> ACurvature {
    let d = alg.dim;
    let m = alg.rank;
    let r = bundle.rank;
    // U_a = Σ_i ρ^i_a A_{·,·,i}
    let u_mat = |a: usize, e: usize, f: usize| -> Jet2 {
        let mut acc = Jet2::constant(d, 0.0);
        for i in 0..d {
            acc = acc.add(&alg.rho(a, i).mul(bundle.a(e, f, i)));
        }
        acc
    };
    let pairs = mi::indices(m, 2);
    let mut mats = Vec::with_capacity(pairs.len());
    for pair in &pairs {
        let (a, b) = (pair[0] as usize, pair[1] as usize);
        let mut mat = vec![Jet2::constant(d, 0.0); r * r];
        for e in 0..r {
            for f in 0..r {
                // ρ_a(U_b) − ρ_b(U_a) + [U_a, U_b] − c^g_{ab} U_g
                let mut acc = Jet2::constant(d, 0.0);
                for i in 0..d {
                    acc = acc.add(&alg.rho(a, i).mul(&u_mat(b, e, f).partial(i)));
                    acc = acc.sub(&alg.rho(b, i).mul(&u_mat(a, e, f).partial(i)));
                }
                for g in 0..r {
                    acc = acc.add(&u_mat(a, e, g).mul(&u_mat(b, g, f)));
                    acc = acc.sub(&u_mat(b, e, g).mul(&u_mat(a, g, f)));
                }
                for g in 0..m {
                    acc = acc.sub(&alg.c(a, b, g).mul(&u_mat(g, e, f)));
                }
                mat[e * r + f] = acc;
            }
        }
        mats.push(mat);
    }
    ACurvature { arank: m, rank: r, mats }
}

/// Frame residuals of the algebroid axioms at sampled points: anchor
/// morphism `ρ([e_a,e_b]) = [ρ(e_a), ρ(e_b)]` and the Jacobi identity of the
/// Leibniz-extended frame bracket.
pub fn validate(
    alg: &Algebroid,
    chart: &Chart,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64), AlgebroidError> {
    let mut s = Sampler::new(seed);
    let m = alg.rank;
    let d = alg.dim;
    let mut worst_anchor = 0.0_f64;
    let mut worst_jacobi = 0.0_f64;
    for _ in 0..samples {
        let x = s.point(chart);
        let at = alg.at(&x)?;
        for a in 0..m {
            for b in 0..m {
                // ρ([e_a, e_b])^i = Σ_c c^c_{ab} ρ^i_c
                // [ρ_a, ρ_b]^i  = Σ_j (ρ^j_a ∂_j ρ^i_b − ρ^j_b ∂_j ρ^i_a)
                for i in 0..d {
                    let mut lhs = 0.0;
                    for c in 0..m {
                        lhs += at.c(a, b, c).value() * at.rho(c, i).value();
                    }
                    let mut rhs = 0.0;
                    for j in 0..d {
                        rhs += at.rho(a, j).value() * at.rho(b, i).g(j)
                            - at.rho(b, j).value() * at.rho(a, i).g(j);
                    }
                    worst_anchor = worst_anchor.max((lhs - rhs).abs());
                }
            }
        }
        // [[e_a, e_b], e_c]^f = Σ_e c^e_{ab} c^f_{ec} − ρ(e_c)(c^f_{ab})
        let dbl = |a: usize, b: usize, c: usize, f: usize| -> f64 {
            let mut v = 0.0;
            for e in 0..m {
                v += at.c(a, b, e).value() * at.c(e, c, f).value();
            }
            for i in 0..d {
                v -= at.rho(c, i).value() * at.c(a, b, f).g(i);
            }
            v
        };
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for f in 0..m {
                        let r = dbl(a, b, c, f) + dbl(b, c, a, f) + dbl(c, a, b, f);
                        worst_jacobi = worst_jacobi.max(r.abs());
                    }
                }
            }
        }
    }
    Ok((worst_anchor, worst_jacobi))
}
