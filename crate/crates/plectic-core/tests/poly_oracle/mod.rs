//! Test-only symbolic polynomial oracle: an independent representation of
//! multivariate polynomials (exponent-vector maps) with symbolic
//! differentiation and direct monomial evaluation. Used to check the jet
//! evaluator against a second, structurally unrelated derivative route.

use std::collections::BTreeMap;

use plectic_core::expr::Expr;
use plectic_core::sample::Sampler;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub dim: usize,
    /// exponent vector -> coefficient
    pub terms: BTreeMap<Vec<u8>, f64>,
}

impl Poly {
    pub fn zero(dim: usize) -> Poly {
        Poly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Poly {
        let mut p = Poly::zero(dim);
        if c != 0.0 {
            p.terms.insert(vec![0; dim], c);
        }
        p
    }

    pub fn var(dim: usize, i: usize) -> Poly {
        let mut e = vec![0; dim];
        e[i] = 1;
        let mut p = Poly::zero(dim);
        p.terms.insert(e, 1.0);
        p
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            *out.terms.entry(e.clone()).or_insert(0.0) += c;
        }
        out
    }

    pub fn neg(&self) -> Poly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -*c;
        }
        out
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<u8> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *out.terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        out
    }

    pub fn powi(&self, n: u32) -> Poly {
        let mut out = Poly::constant(self.dim, 1.0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&v| v as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Symbolic partial derivative (this is the oracle step: no jets).
    pub fn diff(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut de = e.clone();
            de[i] -= 1;
            *out.terms.entry(de).or_insert(0.0) += c * f64::from(e[i]);
        }
        out
    }

    /// Direct monomial-sum evaluation.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| x[i].powi(i32::from(p)))
                    .product::<f64>()
            })
            .sum()
    }
}

/// Generates a random polynomial simultaneously as an expression tree and as
/// the oracle representation, total degree capped at `max_degree`.
pub fn random_pair(dim: usize, max_degree: usize, s: &mut Sampler) -> (Expr, Poly) {
    gen(dim, max_degree, 3, s)
}

fn gen(dim: usize, max_degree: usize, depth: usize, s: &mut Sampler) -> (Expr, Poly) {
    let sp = |e: Expr| Box::new(e);
    if depth == 0 {
        return leaf(dim, max_degree, s);
    }
    match s.usize_below(6) {
        0 | 1 => {
            let (ea, pa) = gen(dim, max_degree, depth - 1, s);
            let (eb, pb) = gen(dim, max_degree, depth - 1, s);
            if s.usize_below(2) == 0 {
                (Expr::Add(sp(ea), sp(eb), (0, 0)), pa.add(&pb))
            } else {
                (Expr::Sub(sp(ea), sp(eb), (0, 0)), pa.sub(&pb))
            }
        }
        2 | 3 => {
            // split the degree budget between the factors
            let da = s.usize_below(max_degree + 1);
            let (ea, pa) = gen(dim, da, depth - 1, s);
            let (eb, pb) = gen(dim, max_degree - pa.degree().min(max_degree), depth - 1, s);
            (Expr::Mul(sp(ea), sp(eb), (0, 0)), pa.mul(&pb))
        }
        4 => {
            let (ea, pa) = gen(dim, max_degree, depth - 1, s);
            (Expr::Neg(sp(ea), (0, 0)), pa.neg())
        }
        _ => {
            if max_degree >= 2 {
                let (ea, pa) = gen(dim, max_degree / 2, depth - 1, s);
                (Expr::Pow(sp(ea), 2, (0, 0)), pa.powi(2))
            } else {
                leaf(dim, max_degree, s)
            }
        }
    }
}

fn leaf(dim: usize, max_degree: usize, s: &mut Sampler) -> (Expr, Poly) {
    if max_degree >= 1 && s.usize_below(3) > 0 {
        let i = s.usize_below(dim);
        (Expr::Var(i, (0, 0)), Poly::var(dim, i))
    } else {
        let c = s.coeff();
        (Expr::Num(c, (0, 0)), Poly::constant(dim, c))
    }
}
