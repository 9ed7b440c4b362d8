//! Base-manifold layer: charts, vector fields, Lie brackets, metrics and
//! Levi-Civita connections.
//!
//! All geometry is chart-global: a model lives on one chart, optionally with
//! periodic coordinates. Vector fields are either expression-backed or built
//! lazily from brackets and module operations; their component jets are
//! produced on demand, with the jet order dropping by one per bracket layer.

use crate::expr::{EvalError, SmoothFunction};
use crate::jet::Jet2;

pub const TAU: f64 = std::f64::consts::TAU;

/// A single coordinate chart with a box domain and per-coordinate
/// periodicity. Periodic coordinates have box length 2π.
#[derive(Clone, Debug)]
pub struct Chart {
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub periodic: Vec<bool>,
}

impl Chart {
    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Chart {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(a, b)| a < b), "box must be nonempty");
        let dim = lo.len();
        Chart {
            dim,
            lo,
            hi,
            periodic: vec![false; dim],
        }
    }

    pub fn torus(dim: usize) -> Chart {
        Chart {
            dim,
            lo: vec![0.0; dim],
            hi: vec![TAU; dim],
            periodic: vec![true; dim],
        }
    }

    /// Wraps periodic coordinates into the box; non-periodic are untouched.
    pub fn wrap(&self, x: &mut [f64]) {
        for i in 0..self.dim {
            if self.periodic[i] {
                let w = self.hi[i] - self.lo[i];
                x[i] = (x[i] - self.lo[i]).rem_euclid(w) + self.lo[i];
            }
        }
    }

    /// True when `x` lies in the box (up to `tol` in non-periodic directions).
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        (0..self.dim).all(|i| self.periodic[i] || (x[i] >= self.lo[i] - tol && x[i] <= self.hi[i] + tol))
    }
}

/// A vector field on the chart. `Expr` fields carry full order-2 jets;
/// brackets are evaluated through jet arithmetic and lose one order per
/// nesting, which is exactly what the identities downstream consume.
#[derive(Clone, Debug)]
pub enum VectorField {
    Expr(Vec<SmoothFunction>),
    Constant(Vec<f64>),
    Bracket(Box<VectorField>, Box<VectorField>),
    Scaled(SmoothFunction, Box<VectorField>),
    Sum(Box<VectorField>, Box<VectorField>),
}

impl VectorField {
    pub fn from_exprs(components: Vec<SmoothFunction>) -> VectorField {
        assert!(!components.is_empty());
        let d = components[0].dim();
        assert!(components.iter().all(|c| c.dim() == d));
        assert_eq!(components.len(), d, "a vector field has d components");
        VectorField::Expr(components)
    }

    pub fn parse(sources: &[&str], dim: usize) -> Result<VectorField, crate::expr::ParseError> {
        let comps = sources
            .iter()
            .map(|s| SmoothFunction::parse(s, dim))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VectorField::from_exprs(comps))
    }

    pub fn dim(&self) -> usize {
        match self {
            VectorField::Expr(c) => c[0].dim(),
            VectorField::Constant(c) => c.len(),
            VectorField::Bracket(a, _) | VectorField::Scaled(_, a) | VectorField::Sum(a, _) => a.dim(),
        }
    }

    /// Component jets at `x`.
    pub fn jets(&self, x: &[f64]) -> Result<Vec<Jet2>, EvalError> {
        let d = self.dim();
        match self {
            VectorField::Expr(c) => c.iter().map(|f| f.eval_jet2(x)).collect(),
            VectorField::Constant(c) => Ok(c.iter().map(|&v| Jet2::constant(d, v)).collect()),
            VectorField::Bracket(a, b) => {
                let aj = a.jets(x)?;
                let bj = b.jets(x)?;
                Ok(bracket_jets(&aj, &bj))
            }
            VectorField::Scaled(f, a) => {
                let fj = f.eval_jet2(x)?;
                let aj = a.jets(x)?;
                Ok(aj.iter().map(|c| fj.mul(c)).collect())
            }
            VectorField::Sum(a, b) => {
                let aj = a.jets(x)?;
                let bj = b.jets(x)?;
                Ok(aj.iter().zip(&bj).map(|(u, v)| u.add(v)).collect())
            }
        }
    }

    /// Component values at `x`.
    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        Ok(self.jets(x)?.into_iter().map(|j| j.value()).collect())
    }
}

/// `[X, Y]^k = Σ_i (X^i ∂_i Y^k − Y^i ∂_i X^k)` on component jets.
pub fn bracket_jets(xj: &[Jet2], yj: &[Jet2]) -> Vec<Jet2> {
    let d = xj.len();
    (0..d)
        .map(|k| {
            let mut acc = Jet2::constant(d, 0.0);
            for i in 0..d {
                acc = acc.add(&xj[i].mul(&yj[k].partial(i)));
                acc = acc.sub(&yj[i].mul(&xj[k].partial(i)));
            }
            acc
        })
        .collect()
}

/// `[X, Y]` as a lazily evaluated field.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    assert_eq!(x.dim(), y.dim(), "bracket of fields on different charts");
    VectorField::Bracket(Box::new(x.clone()), Box::new(y.clone()))
}

/// A Riemannian metric given by its d×d component functions (symmetric).
#[derive(Clone, Debug)]
pub struct Metric {
    pub dim: usize,
    comps: Vec<SmoothFunction>, // d*d row-major
}

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("metric is singular (or not positive definite) at a sample point")]
    SingularMetric,
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
}

impl Metric {
    pub fn new(dim: usize, comps: Vec<SmoothFunction>) -> Metric {
        assert_eq!(comps.len(), dim * dim);
        Metric { dim, comps }
    }

    pub fn euclidean(dim: usize) -> Metric {
        let mut comps = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                comps.push(SmoothFunction::constant(dim, if i == j { 1.0 } else { 0.0 }));
            }
        }
        Metric { dim, comps }
    }

    pub fn comp(&self, i: usize, j: usize) -> &SmoothFunction {
        &self.comps[i * self.dim + j]
    }

    pub fn comps(&self) -> &[SmoothFunction] {
        &self.comps
    }

    pub fn jets(&self, x: &[f64]) -> Result<Vec<Jet2>, EvalError> {
        self.comps.iter().map(|f| f.eval_jet2(x)).collect()
    }

    /// Inverse metric by Gauss-Jordan elimination on jets (order preserved).
    pub fn inverse_jets(&self, x: &[f64]) -> Result<Vec<Jet2>, GeometryError> {
        let g = self.jets(x)?;
        invert_jet_matrix(&g, self.dim).ok_or(GeometryError::SingularMetric)
    }

    /// Christoffel symbols `Γ^k_{ij}` at `x`, flattened `k*d*d + i*d + j`.
    /// The result carries order-1 jets (one order is spent on `∂g`).
    pub fn christoffel(&self, x: &[f64]) -> Result<Vec<Jet2>, GeometryError> {
        let d = self.dim;
        let g = self.jets(x)?;
        let ginv = invert_jet_matrix(&g, d).ok_or(GeometryError::SingularMetric)?;
        let mut dg = Vec::with_capacity(d * d * d); // ∂_i g_{jl} at [i][j][l]
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    dg.push(g[j * d + l].partial(i));
                }
            }
        }
        let at = |i: usize, j: usize, l: usize| &dg[(i * d + j) * d + l];
        let mut gamma = Vec::with_capacity(d * d * d);
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut acc = Jet2::constant(d, 0.0);
                    for l in 0..d {
                        let term = at(i, j, l).add(at(j, i, l)).sub(at(l, i, j));
                        acc = acc.add(&ginv[k * d + l].mul(&term));
                    }
                    gamma.push(acc.scale(0.5));
                }
            }
        }
        Ok(gamma)
    }

    /// Cholesky-based positive definiteness check at `x`.
    pub fn is_positive_definite(&self, x: &[f64]) -> Result<bool, EvalError> {
        let d = self.dim;
        let g = self.jets(x)?;
        let m = nalgebra::DMatrix::from_fn(d, d, |i, j| g[i * d + j].value());
        Ok(nalgebra::Cholesky::new(m).is_some())
    }
}

fn invert_jet_matrix(m: &[Jet2], d: usize) -> Option<Vec<Jet2>> {
    let dim = m[0].dim();
    let mut a: Vec<Jet2> = m.to_vec();
    let mut inv: Vec<Jet2> = (0..d * d)
        .map(|t| Jet2::constant(dim, if t / d == t % d { 1.0 } else { 0.0 }))
        .collect();
    for col in 0..d {
        // partial pivoting on values
        let mut piv = col;
        for r in col + 1..d {
            if a[r * d + col].value().abs() > a[piv * d + col].value().abs() {
                piv = r;
            }
        }
        if a[piv * d + col].value().abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for c in 0..d {
                a.swap(col * d + c, piv * d + c);
                inv.swap(col * d + c, piv * d + c);
            }
        }
        let p = a[col * d + col].clone();
        for c in 0..d {
            a[col * d + c] = a[col * d + c].div(&p);
            inv[col * d + c] = inv[col * d + c].div(&p);
        }
        for r in 0..d {
            if r == col {
                continue;
            }
            let f = a[r * d + col].clone();
            if f.value() == 0.0 && f.order() == 2 {
                // still need the derivative part unless it is an exact zero jet
                let all_zero = f.grad().iter().all(|&v| v == 0.0) && f.hess().iter().all(|&v| v == 0.0);
                if all_zero {
                    continue;
                }
            }
            for c in 0..d {
                let t = f.mul(&a[col * d + c]);
                a[r * d + c] = a[r * d + c].sub(&t);
                let t = f.mul(&inv[col * d + c]);
                inv[r * d + c] = inv[r * d + c].sub(&t);
            }
        }
    }
    Some(inv)
}

/// Connection coefficients for a rank-r bundle: `∇_{∂_i} e_b = Σ_a A^a_{b,i} e_a`.
///
/// Expression-backed coefficients evaluate to order-2 jets. Levi-Civita
/// variants are derived from the metric and carry order-1 jets, which is
/// enough for every place the crate uses them (one exterior derivative).
#[derive(Clone, Debug)]
pub enum Connection {
    /// Explicit coefficients, flattened `a*rank*d + b*d + i`.
    Coeffs { rank: usize, comps: Vec<SmoothFunction> },
    /// Levi-Civita on the tangent bundle: `A^k_{j,i} = Γ^k_{ji}`.
    LeviCivita(Metric),
    /// Induced Levi-Civita on the cotangent bundle: `A^a_{b,i} = −Γ^b_{ai}`.
    LeviCivitaDual(Metric),
}

impl Connection {
    pub fn trivial(rank: usize, dim: usize) -> Connection {
        Connection::Coeffs {
            rank,
            comps: vec![SmoothFunction::constant(dim, 0.0); rank * rank * dim],
        }
    }

    pub fn rank(&self, dim: usize) -> usize {
        match self {
            Connection::Coeffs { rank, .. } => *rank,
            Connection::LeviCivita(_) | Connection::LeviCivitaDual(_) => dim,
        }
    }

    /// Coefficient jets at `x`, flattened `a*rank*d + b*d + i`.
    pub fn jets(&self, x: &[f64]) -> Result<Vec<Jet2>, GeometryError> {
        match self {
            Connection::Coeffs { comps, .. } => Ok(comps
                .iter()
                .map(|f| f.eval_jet2(x))
                .collect::<Result<Vec<_>, _>>()?),
            Connection::LeviCivita(g) => {
                let d = g.dim;
                let gamma = g.christoffel(x)?;
                let mut out = Vec::with_capacity(d * d * d);
                for a in 0..d {
                    for b in 0..d {
                        for i in 0..d {
                            out.push(gamma[(a * d + b) * d + i].clone());
                        }
                    }
                }
                Ok(out)
            }
            Connection::LeviCivitaDual(g) => {
                let d = g.dim;
                let gamma = g.christoffel(x)?;
                let mut out = Vec::with_capacity(d * d * d);
                for a in 0..d {
                    for b in 0..d {
                        for i in 0..d {
                            out.push(gamma[(b * d + a) * d + i].neg());
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn is_syntactically_trivial(&self) -> bool {
        match self {
            Connection::Coeffs { comps, .. } => comps.iter().all(SmoothFunction::is_zero_literal),
            _ => false,
        }
    }
}

/// Levi-Civita connection of `g` on the tangent bundle.
pub fn levi_civita(g: &Metric) -> Connection {
    Connection::LeviCivita(g.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vf(sources: &[&str], dim: usize) -> VectorField {
        VectorField::parse(sources, dim).unwrap()
    }

    #[test]
    fn bracket_of_field_with_itself_vanishes() {
        let x = vf(&["x0*x1", "sin(x0)"], 2);
        let b = lie_bracket(&x, &x);
        let v = b.values(&[0.4, -0.7]).unwrap();
        assert!(v.iter().all(|&c| c.abs() < 1e-14));
    }

    #[test]
    fn coordinate_stretch_bracket() {
        // X = ∂x0, Y = x0 ∂x1 on R^2: [X, Y] = ∂x1.
        let x = vf(&["1", "0"], 2);
        let y = vf(&["0", "x0"], 2);
        let b = lie_bracket(&x, &y);
        let v = b.values(&[1.3, 2.1]).unwrap();
        assert!((v[0] - 0.0).abs() < 1e-15);
        assert!((v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_identity_residual() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let poly = |rng: &mut rand_chacha::ChaCha8Rng| -> String {
            let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            format!(
                "{} + {}*x0 + {}*x1 + {}*x0*x1 + {}*x0^2 + {}*x1^2",
                c[0], c[1], c[2], c[3], c[4], c[5]
            )
        };
        for _ in 0..4 {
            let fields: Vec<VectorField> = (0..3)
                .map(|_| vf(&[&poly(&mut rng), &poly(&mut rng)], 2))
                .collect();
            let (x, y, z) = (&fields[0], &fields[1], &fields[2]);
            let j1 = lie_bracket(&lie_bracket(x, y), z);
            let j2 = lie_bracket(&lie_bracket(y, z), x);
            let j3 = lie_bracket(&lie_bracket(z, x), y);
            for _ in 0..50 {
                let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let a = j1.values(&p).unwrap();
                let b = j2.values(&p).unwrap();
                let c = j3.values(&p).unwrap();
                for k in 0..2 {
                    assert!((a[k] + b[k] + c[k]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn leibniz_in_second_slot() {
        // [X, fY] = f [X, Y] + (X f) Y
        let x = vf(&["x1", "x0^2"], 2);
        let y = vf(&["1 + x0", "x0*x1"], 2);
        let f = SmoothFunction::parse("sin(x0) + x1^2", 2).unwrap();
        let fy = VectorField::Scaled(f.clone(), Box::new(y.clone()));
        let lhs = lie_bracket(&x, &fy);
        for p in [[0.3, -0.4], [1.1, 0.7]] {
            let l = lhs.values(&p).unwrap();
            let br = lie_bracket(&x, &y).values(&p).unwrap();
            let fv = f.eval_jet2(&p).unwrap();
            let xv = x.values(&p).unwrap();
            let xf: f64 = (0..2).map(|i| xv[i] * fv.g(i)).sum();
            let yv = y.values(&p).unwrap();
            for k in 0..2 {
                let r = fv.value() * br[k] + xf * yv[k];
                assert!((l[k] - r).abs() < 1e-10, "{} vs {}", l[k], r);
            }
        }
    }

    #[test]
    fn euclidean_christoffel_vanishes() {
        let g = Metric::euclidean(3);
        let gamma = g.christoffel(&[0.2, 0.4, -1.0]).unwrap();
        assert!(gamma.iter().all(|j| j.value().abs() < 1e-15));
    }

    #[test]
    fn warped_metric_christoffel_closed_form() {
        // g = diag(1, x0^2) on (0,∞)×R: Γ^0_{11} = −x0, Γ^1_{01} = Γ^1_{10} = 1/x0.
        let d = 2;
        let comps = vec![
            SmoothFunction::parse("1", d).unwrap(),
            SmoothFunction::parse("0", d).unwrap(),
            SmoothFunction::parse("0", d).unwrap(),
            SmoothFunction::parse("x0^2", d).unwrap(),
        ];
        let g = Metric::new(d, comps);
        let x = [1.7, 0.3];
        let gamma = g.christoffel(&x).unwrap();
        let at = |k: usize, i: usize, j: usize| gamma[(k * d + i) * d + j].value();
        assert!((at(0, 1, 1) + x[0]).abs() < 1e-12);
        assert!((at(1, 0, 1) - 1.0 / x[0]).abs() < 1e-12);
        assert!((at(1, 1, 0) - 1.0 / x[0]).abs() < 1e-12);
        assert!(at(0, 0, 0).abs() < 1e-12);
        // torsion symmetry
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    assert!((at(k, i, j) - at(k, j, i)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn metric_compatibility() {
        use rand::Rng;
        use rand::SeedableRng;
        let d = 2;
        let comps = vec![
            SmoothFunction::parse("1 + 0.3*x1^2", d).unwrap(),
            SmoothFunction::parse("0.2*x0*x1", d).unwrap(),
            SmoothFunction::parse("0.2*x0*x1", d).unwrap(),
            SmoothFunction::parse("2 + sin(x0)^2", d).unwrap(),
        ];
        let g = Metric::new(d, comps);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let gj = g.jets(&x).unwrap();
            let gamma = g.christoffel(&x).unwrap();
            let ga = |k: usize, i: usize, j: usize| gamma[(k * d + i) * d + j].value();
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let mut r = gj[i * d + j].g(k);
                        for l in 0..d {
                            r -= ga(l, k, i) * gj[l * d + j].value();
                            r -= ga(l, k, j) * gj[i * d + l].value();
                        }
                        assert!(r.abs() < 1e-9, "compatibility residual {r}");
                    }
                }
            }
        }
    }

    #[test]
    fn chart_wrap() {
        let c = Chart::torus(2);
        let mut x = [7.0, -1.0];
        c.wrap(&mut x);
        assert!((x[0] - (7.0 - TAU)).abs() < 1e-12);
        assert!((x[1] - (TAU - 1.0)).abs() < 1e-12);
    }
}
