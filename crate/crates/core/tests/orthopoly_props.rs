use proptest::prelude::*;
use soslab::orthopoly::{eval_basis_probability, gauss_rule, roots, smallest_root, JacobiWeight};

/// Smallest root of the Legendre polynomial `P_k` from the classical
/// three-term recurrence.
fn legendre_smallest_root(k: usize) -> f64 {
    let p = |x: f64| {
        let (mut a, mut b) = (1.0, x);
        for j in 1..k {
            let c = ((2 * j + 1) as f64 * x * b - j as f64 * a) / (j + 1) as f64;
            a = b;
            b = c;
        }
        if k == 0 { a } else { b }
    };
    // first sign change on a fine scan from −1, then bisection
    let step = 1e-5;
    let mut lo = -1.0;
    while p(lo + step).signum() == p(-1.0).signum() {
        lo += step;
    }
    let mut hi = lo + step;
    let slo = p(lo).signum();
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if p(mid).signum() == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn legendre_roots_against_recurrence() {
    for k in 1..40 {
        let r = smallest_root(JacobiWeight::legendre(), k).unwrap();
        assert!((r - legendre_smallest_root(k)).abs() < 1e-12, "k = {k}");
    }
}

#[test]
fn chebyshev_roots_closed_form() {
    for k in 1..60 {
        let r = roots(JacobiWeight::chebyshev(), k).unwrap();
        for (i, x) in r.iter().enumerate() {
            let want = -(std::f64::consts::PI * (2 * i + 1) as f64 / (2 * k) as f64).cos();
            assert!((x - want).abs() < 1e-12);
        }
    }
}

fn weight() -> impl Strategy<Value = JacobiWeight> {
    (-0.9f64..3.0, -0.9f64..3.0).prop_map(|(a, b)| JacobiWeight::new(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_rule_orthonormality(w in weight(), r in 1usize..12) {
        let (t, wt) = gauss_rule(w, r + 1).unwrap();
        let vals: Vec<Vec<f64>> = t.iter().map(|&x| eval_basis_probability(w, r, x).unwrap()).collect();
        prop_assert!((wt.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for a in 0..=r {
            for b in 0..=r {
                let ip: f64 = vals.iter().zip(&wt).map(|(v, q)| q * v[a] * v[b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((ip - want).abs() < 1e-9, "a={} b={} ip={}", a, b, ip);
            }
        }
    }

    #[test]
    fn roots_interlace(w in weight(), k in 2usize..40) {
        let a = roots(w, k).unwrap();
        let b = roots(w, k + 1).unwrap();
        for i in 0..k {
            prop_assert!(b[i] < a[i] && a[i] < b[i + 1]);
        }
        prop_assert!(a.iter().all(|x| x.abs() < 1.0));
    }

    #[test]
    fn smallest_root_moves_toward_minus_one(w in weight(), k in 4usize..128) {
        let x = smallest_root(w, k).unwrap();
        let y = smallest_root(w, k + 1).unwrap();
        prop_assert!(y < x);
        let c = (k * k) as f64 * (1.0 + x);
        prop_assert!(c > 0.1 && c < 20.0, "k^2(1+x) = {}", c);
    }
}
