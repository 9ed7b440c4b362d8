//! Seeded random sampling of points, vectors and polynomial test data.
//!
//! Every checker draws from a [`Sampler`] created with an explicit seed, so
//! residual reports are reproducible bit for bit. Random test coefficients
//! are uniform in [−1, 1].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::{Expr, SmoothFunction};
use crate::geometry::{Chart, VectorField};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn coeff(&mut self) -> f64 {
        self.rng.gen_range(-1.0..1.0)
    }

    /// Uniform point in the chart box.
    pub fn point(&mut self, chart: &Chart) -> Vec<f64> {
        (0..chart.dim)
            .map(|i| self.rng.gen_range(chart.lo[i]..chart.hi[i]))
            .collect()
    }

    /// Tangent vector with entries uniform in [−1, 1].
    pub fn vector(&mut self, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| self.coeff()).collect()
    }

    pub fn usize_below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    /// Random polynomial of total degree ≤ `degree`, built as an expression
    /// tree (so it runs through the same jet evaluator as model data).
    pub fn poly(&mut self, dim: usize, degree: usize) -> SmoothFunction {
        self.poly_in(dim, degree, &|i| Expr::Var(i, (0, 0)))
    }

    /// Random polynomial in chart-normalized coordinates: each variable is
    /// rescaled to [−1, 1] over the chart box, so test data stays O(1) on
    /// large or shifted boxes.
    pub fn poly_on(&mut self, chart: &Chart, degree: usize) -> SmoothFunction {
        let mids: Vec<f64> = (0..chart.dim)
            .map(|i| 0.5 * (chart.lo[i] + chart.hi[i]))
            .collect();
        let halves: Vec<f64> = (0..chart.dim)
            .map(|i| 0.5 * (chart.hi[i] - chart.lo[i]))
            .collect();
        self.poly_in(chart.dim, degree, &move |i| {
            Expr::Mul(
                Box::new(Expr::Num(1.0 / halves[i], (0, 0))),
                Box::new(Expr::Sub(
                    Box::new(Expr::Var(i, (0, 0))),
                    Box::new(Expr::Num(mids[i], (0, 0))),
                    (0, 0),
                )),
                (0, 0),
            )
        })
    }

    fn poly_in(
        &mut self,
        dim: usize,
        degree: usize,
        var: &dyn Fn(usize) -> Expr,
    ) -> SmoothFunction {
        let mut terms: Vec<Expr> = vec![Expr::Num(self.coeff(), (0, 0))];
        if degree >= 1 {
            for i in 0..dim {
                terms.push(Expr::Mul(
                    Box::new(Expr::Num(self.coeff(), (0, 0))),
                    Box::new(var(i)),
                    (0, 0),
                ));
            }
        }
        if degree >= 2 {
            for i in 0..dim {
                for j in i..dim {
                    let quad = Expr::Mul(Box::new(var(i)), Box::new(var(j)), (0, 0));
                    terms.push(Expr::Mul(
                        Box::new(Expr::Num(self.coeff(), (0, 0))),
                        Box::new(quad),
                        (0, 0),
                    ));
                }
            }
        }
        let ast = terms
            .into_iter()
            .reduce(|a, b| Expr::Add(Box::new(a), Box::new(b), (0, 0)))
            .unwrap();
        SmoothFunction::from_expr(ast, dim).unwrap()
    }

    /// Vector field with random polynomial components.
    pub fn poly_field(&mut self, dim: usize, degree: usize) -> VectorField {
        VectorField::from_exprs((0..dim).map(|_| self.poly(dim, degree)).collect())
    }

    /// Vector field with chart-normalized polynomial components.
    pub fn poly_field_on(&mut self, chart: &Chart, degree: usize) -> VectorField {
        VectorField::from_exprs(
            (0..chart.dim)
                .map(|_| self.poly_on(chart, degree))
                .collect(),
        )
    }
}
