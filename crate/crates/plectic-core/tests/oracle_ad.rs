//! The jet evaluator against the independent symbolic polynomial oracle, and
//! the bit-level compositionality of jet arithmetic.

mod poly_oracle;

use plectic_core::expr::{Expr, SmoothFunction};
use plectic_core::sample::Sampler;
use poly_oracle::{random_pair, Poly};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Value, gradient and Hessian of random polynomial expressions agree with
/// the symbolic route to 1e-12 relative error at 100 random points each.
#[test]
fn jets_match_symbolic_polynomial_derivatives() {
    let mut s = Sampler::new(20260801);
    let mut checked = 0usize;
    while checked < 1000 {
        let dim = 1 + s.usize_below(4);
        let (ast, poly) = random_pair(dim, 4, &mut s);
        if poly.degree() > 4 {
            continue;
        }
        checked += 1;
        let f = SmoothFunction::from_expr(ast, dim).unwrap();
        let grads: Vec<Poly> = (0..dim).map(|i| poly.diff(i)).collect();
        let hessians: Vec<Vec<Poly>> = (0..dim)
            .map(|i| (0..dim).map(|j| grads[i].diff(j)).collect())
            .collect();
        for _ in 0..100 {
            let x: Vec<f64> = (0..dim).map(|_| s.coeff()).collect();
            let jet = f.eval_jet2(&x).unwrap();
            assert!(
                rel_close(jet.value(), poly.eval(&x), 1e-12),
                "value mismatch: {} vs {}",
                jet.value(),
                poly.eval(&x)
            );
            for i in 0..dim {
                assert!(
                    rel_close(jet.g(i), grads[i].eval(&x), 1e-12),
                    "grad[{i}] mismatch"
                );
                for j in 0..dim {
                    assert!(
                        rel_close(jet.h(i, j), hessians[i][j].eval(&x), 1e-12),
                        "hess[{i}][{j}] mismatch"
                    );
                }
            }
        }
    }
}

/// Evaluating `f + g` and `f * g` as expressions is bit-identical to doing
/// the jet arithmetic on the separately evaluated operands.
#[test]
fn expression_evaluation_is_jet_arithmetic_bit_for_bit() {
    let mut s = Sampler::new(7);
    for _ in 0..200 {
        let dim = 1 + s.usize_below(3);
        let (fa, _) = random_pair(dim, 3, &mut s);
        let (fb, _) = random_pair(dim, 3, &mut s);
        let f = SmoothFunction::from_expr(fa.clone(), dim).unwrap();
        let g = SmoothFunction::from_expr(fb.clone(), dim).unwrap();
        let sum = SmoothFunction::from_expr(
            Expr::Add(Box::new(fa.clone()), Box::new(fb.clone()), (0, 0)),
            dim,
        )
        .unwrap();
        let prod =
            SmoothFunction::from_expr(Expr::Mul(Box::new(fa), Box::new(fb), (0, 0)), dim).unwrap();
        let x: Vec<f64> = (0..dim).map(|_| s.coeff()).collect();
        let jf = f.eval_jet2(&x).unwrap();
        let jg = g.eval_jet2(&x).unwrap();
        assert_eq!(sum.eval_jet2(&x).unwrap(), jf.add(&jg));
        assert_eq!(prod.eval_jet2(&x).unwrap(), jf.mul(&jg));
    }
}

/// Printer round-trip: the printed source re-parses to a function that
/// evaluates bit-identically.
#[test]
fn printed_source_reparses_and_evaluates_identically() {
    let mut s = Sampler::new(99);
    for _ in 0..300 {
        let dim = 1 + s.usize_below(4);
        let (ast, _) = random_pair(dim, 4, &mut s);
        let f = SmoothFunction::from_expr(ast, dim).unwrap();
        let printed = f.to_string();
        let g = SmoothFunction::parse(&printed, dim)
            .unwrap_or_else(|e| panic!("printed source failed to parse: {printed}: {e}"));
        for _ in 0..10 {
            let x: Vec<f64> = (0..dim).map(|_| s.coeff()).collect();
            assert_eq!(
                f.eval_jet2(&x).unwrap(),
                g.eval_jet2(&x).unwrap(),
                "round-trip evaluation differs for {printed}"
            );
        }
    }
}

mod properties {
    use plectic_core::expr::SmoothFunction;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Quotient + chain rule of the jet evaluator against closed-form
        /// derivatives of (sin(a x) + 2)/(cos(b x) + 2).
        #[test]
        fn quotient_chain_rule_matches_closed_form(
            a in -2.0..2.0f64,
            b in -2.0..2.0f64,
            x in -1.0..1.0f64,
        ) {
            let src = format!("(sin({a}*x0) + 2) / (cos({b}*x0) + 2)");
            let f = SmoothFunction::parse(&src, 1).unwrap();
            let j = f.eval_jet2(&[x]).unwrap();
            let n = (a * x).sin() + 2.0;
            let d = (b * x).cos() + 2.0;
            let dn = a * (a * x).cos();
            let dd = -b * (b * x).sin();
            let ddn = -a * a * (a * x).sin();
            let ddd = -b * b * (b * x).cos();
            let q = n / d;
            let dq = (dn * d - n * dd) / (d * d);
            let ddq = (ddn - 2.0 * dq * dd - q * ddd) / d;
            prop_assert!((j.value() - q).abs() < 1e-12);
            prop_assert!((j.g(0) - dq).abs() < 1e-11);
            prop_assert!((j.h(0, 0) - ddq).abs() < 1e-10);
        }

        /// Whitespace between tokens never changes what a source parses to.
        #[test]
        fn whitespace_insensitive_parsing(pad in 0usize..4, x in -1.0..1.0f64) {
            let tokens = [
                "x0", "^", "2", "*", "sin", "(", "x0", ")", "-", "1", "/", "(",
                "2", "+", "cos", "(", "x0", ")", ")",
            ];
            let tight = tokens.concat();
            let spaced = tokens.join(&" ".repeat(pad));
            let f = SmoothFunction::parse(&tight, 1).unwrap();
            let g = SmoothFunction::parse(&spaced, 1).unwrap();
            prop_assert_eq!(f.eval_jet2(&[x]).unwrap(), g.eval_jet2(&[x]).unwrap());
        }
    }
}
