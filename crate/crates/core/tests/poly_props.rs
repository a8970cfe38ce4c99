mod common;

use proptest::prelude::*;
use soslab::cheb::ChebPoly;
use soslab::poly::{Exponent, Polynomial};

fn poly(n: usize, deg: u32) -> impl Strategy<Value = Polynomial> {
    proptest::collection::vec((proptest::collection::vec(0..=deg, n), -5.0f64..5.0), 0..8).prop_map(move |terms| {
        let mut p = Polynomial::zero(n);
        for (pw, c) in terms {
            let total: u32 = pw.iter().sum();
            if total <= deg {
                p.add_term(Exponent::new(pw), c);
            }
        }
        p
    })
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.5f64..1.5, n)
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + scale)
}

proptest! {
    #[test]
    fn ring_operations_commute_with_evaluation(p in poly(3, 4), q in poly(3, 4), x in point(3)) {
        let (a, b) = (p.evaluate(&x).unwrap(), q.evaluate(&x).unwrap());
        let s = a.abs() + b.abs();
        prop_assert!(close(p.add(&q).unwrap().evaluate(&x).unwrap(), a + b, s));
        prop_assert!(close(p.sub(&q).unwrap().evaluate(&x).unwrap(), a - b, s));
        prop_assert!(close(p.multiply(&q).unwrap().evaluate(&x).unwrap(), a * b, (a * b).abs() + s * s));
        prop_assert_eq!(p.multiply(&q).unwrap(), q.multiply(&p).unwrap());
        prop_assert!(close(p.pow(3).evaluate(&x).unwrap(), a.powi(3), a.abs().powi(3) + 1.0));
    }

    #[test]
    fn display_parse_round_trip(p in poly(3, 5)) {
        let q = Polynomial::parse(&p.to_string(), 3).unwrap();
        prop_assert!(p.max_coeff_diff(&q).unwrap() <= 1e-12 * (1.0 + p.max_abs_coeff()));
    }

    #[test]
    fn composition(s in poly(1, 3), f in poly(2, 2), x in point(2)) {
        let fx = f.evaluate(&x).unwrap();
        let c = Polynomial::compose_univariate(&s, &f).unwrap();
        let want = s.evaluate(&[fx]).unwrap();
        prop_assert!(close(c.evaluate(&x).unwrap(), want, want.abs() + s.max_abs_coeff() * (1.0 + fx.abs()).powi(3)));
    }

    #[test]
    fn affine_substitution(p in poly(2, 4), x in point(2), a in 0.1f64..3.0, b in -1.0f64..1.0) {
        let q = p.affine_substitute(&[a, a], &[b, -b]).unwrap();
        let y = [a * x[0] + b, a * x[1] - b];
        let want = p.evaluate(&y).unwrap();
        prop_assert!(close(q.evaluate(&x).unwrap(), want, want.abs() + p.max_abs_coeff() * 1e2));
    }

    #[test]
    fn chebyshev_conversion(p in poly(2, 6), x in proptest::collection::vec(-1.0f64..1.0, 2)) {
        let c = ChebPoly::from_polynomial(&p);
        prop_assert!(close(c.evaluate(&x).unwrap(), p.evaluate(&x).unwrap(), p.max_abs_coeff() * 10.0));
        prop_assert!(c.to_polynomial().max_coeff_diff(&p).unwrap() <= 1e-10 * (1.0 + p.max_abs_coeff()));
    }
}

#[test]
fn parse_errors() {
    assert!(Polynomial::parse("x1 +", 1).is_err());
    assert!(Polynomial::parse("x3", 2).is_err());
    assert!(Polynomial::parse("2*x1^2 - x1*x2 + 0.5", 2).is_ok());
}
