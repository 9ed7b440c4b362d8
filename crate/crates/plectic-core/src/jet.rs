//! Second-order jets: value, gradient and Hessian of a scalar quantity at a
//! point, with exact propagation through arithmetic and elementary functions.
//!
//! A `Jet2` carries an `order` in `{0, 1, 2}` telling how many derivative
//! layers are valid. Evaluating a stored expression yields order 2; taking a
//! partial derivative of an order-`k` jet yields order `k - 1`. Arithmetic
//! between jets is valid up to the minimum of the operand orders. This is how
//! the operator tower stays honest about which derivatives it actually knows:
//! no formula in the crate ever consumes a derivative layer that was not
//! computed analytically.

/// Value, gradient and Hessian of a scalar at a point.
///
/// The Hessian is stored dense row-major (`dim * dim`) and kept symmetric by
/// construction. `grad` is empty when `order < 1` and `hess` is empty when
/// `order < 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    dim: usize,
    order: u8,
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

impl Jet2 {
    /// Full-order jet of a constant: all derivatives vanish.
    pub fn constant(dim: usize, value: f64) -> Self {
        Jet2 {
            dim,
            order: 2,
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    /// Jet of the coordinate function `x_i` evaluated at `value`.
    pub fn variable(dim: usize, i: usize, value: f64) -> Self {
        assert!(i < dim, "variable index {i} out of range for dim {dim}");
        let mut grad = vec![0.0; dim];
        grad[i] = 1.0;
        Jet2 {
            dim,
            order: 2,
            value,
            grad,
            hess: vec![0.0; dim * dim],
        }
    }

    /// Builds a jet from explicit parts; `grad`/`hess` lengths fix the order.
    pub fn from_parts(dim: usize, value: f64, grad: Vec<f64>, hess: Vec<f64>) -> Self {
        let order = if hess.len() == dim * dim {
            2
        } else if grad.len() == dim {
            1
        } else {
            0
        };
        assert!(grad.is_empty() || grad.len() == dim);
        assert!(hess.is_empty() || hess.len() == dim * dim);
        Jet2 {
            dim,
            order,
            value,
            grad,
            hess,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Gradient slice. Panics if this jet does not carry first derivatives.
    pub fn grad(&self) -> &[f64] {
        assert!(self.order >= 1, "jet carries no gradient (order 0)");
        &self.grad
    }

    /// Hessian slice (row-major). Panics if second derivatives are absent.
    pub fn hess(&self) -> &[f64] {
        assert!(self.order >= 2, "jet carries no Hessian (order {})", self.order);
        &self.hess
    }

    /// Single gradient entry `∂_i`.
    pub fn g(&self, i: usize) -> f64 {
        self.grad()[i]
    }

    /// Single Hessian entry `∂_i ∂_j`.
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.hess()[i * self.dim + j]
    }

    /// The jet of `∂_i self`, one order lower than `self`.
    pub fn partial(&self, i: usize) -> Jet2 {
        assert!(
            self.order >= 1,
            "cannot differentiate an order-0 jet; a formula requested a third derivative somewhere upstream"
        );
        let value = self.grad[i];
        if self.order == 1 {
            return Jet2 {
                dim: self.dim,
                order: 0,
                value,
                grad: Vec::new(),
                hess: Vec::new(),
            };
        }
        let grad = (0..self.dim).map(|j| self.h(i, j)).collect();
        Jet2 {
            dim: self.dim,
            order: 1,
            value,
            grad,
            hess: Vec::new(),
        }
    }

    fn min_order(&self, rhs: &Jet2) -> u8 {
        self.order.min(rhs.order)
    }

    pub fn add(&self, rhs: &Jet2) -> Jet2 {
        assert_eq!(self.dim, rhs.dim);
        let order = self.min_order(rhs);
        let mut out = Jet2::zeroed(self.dim, order, self.value + rhs.value);
        for i in 0..out.grad.len() {
            out.grad[i] = self.grad[i] + rhs.grad[i];
        }
        for i in 0..out.hess.len() {
            out.hess[i] = self.hess[i] + rhs.hess[i];
        }
        out
    }

    pub fn sub(&self, rhs: &Jet2) -> Jet2 {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Jet2 {
        let mut out = self.clone();
        out.value = -out.value;
        for v in out.grad.iter_mut().chain(out.hess.iter_mut()) {
            *v = -*v;
        }
        out
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        let mut out = self.clone();
        out.value *= c;
        for v in out.grad.iter_mut().chain(out.hess.iter_mut()) {
            *v *= c;
        }
        out
    }

    pub fn mul(&self, rhs: &Jet2) -> Jet2 {
        assert_eq!(self.dim, rhs.dim);
        let order = self.min_order(rhs);
        let d = self.dim;
        let mut out = Jet2::zeroed(d, order, self.value * rhs.value);
        if order >= 1 {
            for i in 0..d {
                out.grad[i] = self.value * rhs.grad[i] + rhs.value * self.grad[i];
            }
        }
        if order >= 2 {
            for i in 0..d {
                for j in 0..d {
                    out.hess[i * d + j] = self.value * rhs.hess[i * d + j]
                        + rhs.value * self.hess[i * d + j]
                        + self.grad[i] * rhs.grad[j]
                        + self.grad[j] * rhs.grad[i];
                }
            }
        }
        out
    }

    /// Quotient jet. Returns `None` when the denominator value is zero.
    pub fn div_checked(&self, rhs: &Jet2) -> Option<Jet2> {
        if rhs.value == 0.0 {
            return None;
        }
        assert_eq!(self.dim, rhs.dim);
        let order = self.min_order(rhs);
        let d = self.dim;
        let q = self.value / rhs.value;
        let mut out = Jet2::zeroed(d, order, q);
        if order >= 1 {
            for i in 0..d {
                out.grad[i] = (self.grad[i] - q * rhs.grad[i]) / rhs.value;
            }
        }
        if order >= 2 {
            for i in 0..d {
                for j in 0..d {
                    out.hess[i * d + j] = (self.hess[i * d + j]
                        - q * rhs.hess[i * d + j]
                        - out.grad[i] * rhs.grad[j]
                        - out.grad[j] * rhs.grad[i])
                        / rhs.value;
                }
            }
        }
        Some(out)
    }

    /// Quotient jet; panics on a zero denominator. Callers that cannot rule
    /// zero out must use [`div_checked`](Self::div_checked).
    pub fn div(&self, rhs: &Jet2) -> Jet2 {
        self.div_checked(rhs)
            .expect("jet division by zero in an internal formula")
    }

    /// Integer power. `None` when raising zero to a negative power.
    pub fn powi(&self, n: i32) -> Option<Jet2> {
        if self.value == 0.0 && n < 0 {
            return None;
        }
        let v = self.value;
        let f = v.powi(n);
        // f'(t) = n t^(n-1), f''(t) = n (n-1) t^(n-2); the t = 0 cases are
        // covered by f64::powi (0^0 = 1, 0^k = 0 for k > 0).
        let df = f64::from(n) * v.powi(n - 1);
        let ddf = f64::from(n) * f64::from(n - 1) * v.powi(n - 2);
        Some(self.chain(f, df, ddf))
    }

    pub fn sin(&self) -> Jet2 {
        self.chain(self.value.sin(), self.value.cos(), -self.value.sin())
    }

    pub fn cos(&self) -> Jet2 {
        self.chain(self.value.cos(), -self.value.sin(), -self.value.cos())
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    /// Chain rule for a scalar function with the given derivatives at `value`.
    fn chain(&self, f: f64, df: f64, ddf: f64) -> Jet2 {
        let d = self.dim;
        let mut out = Jet2::zeroed(d, self.order, f);
        if self.order >= 1 {
            for i in 0..d {
                out.grad[i] = df * self.grad[i];
            }
        }
        if self.order >= 2 {
            for i in 0..d {
                for j in 0..d {
                    out.hess[i * d + j] =
                        ddf * self.grad[i] * self.grad[j] + df * self.hess[i * d + j];
                }
            }
        }
        out
    }

    fn zeroed(dim: usize, order: u8, value: f64) -> Jet2 {
        Jet2 {
            dim,
            order,
            value,
            grad: if order >= 1 { vec![0.0; dim] } else { Vec::new() },
            hess: if order >= 2 { vec![0.0; dim * dim] } else { Vec::new() },
        }
    }
}

/// Composition with a smooth map: jet of `f ∘ F` at `y`, given the jet of `f`
/// at `F(y)` (over the target space) and the jets of the components of `F` at
/// `y` (over the source space).
///
/// Used when pulling model data back along a quotient-section map.
pub fn compose(f_at_fy: &Jet2, map_jets: &[Jet2]) -> Jet2 {
    let out_dim = f_at_fy.dim();
    assert_eq!(map_jets.len(), out_dim, "map component count must match target dim");
    let in_dim = map_jets[0].dim();
    let order = map_jets
        .iter()
        .map(Jet2::order)
        .min()
        .unwrap()
        .min(f_at_fy.order());
    let mut out = Jet2::zeroed(in_dim, order, f_at_fy.value());
    if order >= 1 {
        for a in 0..in_dim {
            let mut s = 0.0;
            for l in 0..out_dim {
                s += f_at_fy.g(l) * map_jets[l].g(a);
            }
            out.grad[a] = s;
        }
    }
    if order >= 2 {
        for a in 0..in_dim {
            for b in 0..in_dim {
                let mut s = 0.0;
                for l in 0..out_dim {
                    for m in 0..out_dim {
                        s += f_at_fy.h(l, m) * map_jets[l].g(a) * map_jets[m].g(b);
                    }
                    s += f_at_fy.g(l) * map_jets[l].h(a, b);
                }
                out.hess[a * in_dim + b] = s;
            }
        }
    }
    out
}
