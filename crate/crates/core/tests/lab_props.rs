use proptest::prelude::*;
use soslab::lab::{self, fmt12, Graph, RateSeries, ReferenceKind};
use soslab::lower::LbKind;
use soslab::measures::MeasureSpec;
use soslab::poly::Polynomial;

/// Independence number by the branching recursion α(G) = max(α(G−v), 1 + α(G−N[v])).
fn alpha_oracle(n: usize, adj: &[u32], alive: u32) -> usize {
    if alive == 0 {
        return 0;
    }
    let v = alive.trailing_zeros() as usize;
    let without = alpha_oracle(n, adj, alive & !(1 << v));
    let with = 1 + alpha_oracle(n, adj, alive & !(1 << v) & !adj[v]);
    without.max(with)
}

proptest! {
    #[test]
    fn power_laws_are_recovered(k in -4.0f64..-0.5, c in 0.01f64..100.0, lo in 1u32..10, len in 4u32..40) {
        let pts: Vec<(u32, f64)> = (lo..lo + len).map(|r| (r, 5.0 + c * (r as f64).powf(k))).collect();
        let s = RateSeries::new("p", &pts, 5.0, ReferenceKind::ClosedForm, 2);
        prop_assert!((s.fitted_slope.unwrap() - k).abs() < 1e-6);
        prop_assert_eq!(s.fit_range, Some((lo + 2, lo + len - 1)));
    }

    #[test]
    fn twelve_digit_round_trip(x in prop::num::f64::NORMAL) {
        let s = fmt12(x);
        let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect::<String>();
        prop_assert!(digits.trim_start_matches('0').len() <= 12, "{}", s);
        let y: f64 = s.parse().unwrap();
        prop_assert!((y - x).abs() <= 5e-12 * x.abs());
    }

    #[test]
    fn alpha_matches_branching(n in 1usize..=10, mask in any::<u64>()) {
        let mut edges = Vec::new();
        let mut bit = 0;
        for u in 0..n {
            for v in u + 1..n {
                if mask >> (bit % 64) & 1 == 1 {
                    edges.push((u, v));
                }
                bit += 1;
            }
        }
        let g = Graph::new(n, edges.clone()).unwrap();
        let mut adj = vec![0u32; n];
        for (u, v) in edges {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        prop_assert_eq!(g.alpha(), alpha_oracle(n, &adj, (1u32 << n) - 1));
    }
}

#[test]
fn stability_small_graphs() {
    for (g, alpha) in [
        (Graph::new(3, vec![]).unwrap(), 3),
        (Graph::new(2, vec![(0, 1)]).unwrap(), 1),
        (Graph::new(1, vec![]).unwrap(), 1),
        (Graph::cycle(4).unwrap(), 2),
    ] {
        let rep = lab::stability(&g, 2, 4, LbKind::Schmudgen).unwrap();
        assert_eq!(rep.alpha, alpha);
        assert!(rep.brackets, "{rep:?}");
        assert!(rep.lb <= 1.0 / alpha as f64 + 1e-7 && rep.ub >= 1.0 / alpha as f64 - 1e-7);
    }
}

#[test]
fn pkm_is_nonincreasing() {
    let mut prev = f64::INFINITY;
    for r in 1..=16 {
        let rep = lab::pkm(4, 3, r).unwrap();
        assert!(rep.opt <= prev + 1e-12);
        assert!(rep.opt >= -1e-12);
        let sum: f64 = rep.lambdas.iter().map(|l| 1.0 - l).sum();
        assert!((sum - rep.opt).abs() < 1e-9);
        prev = rep.opt;
    }
    assert!(lab::pkm(2, 1, 3).is_err());
}

#[test]
fn pkm_rate() {
    let pts: Vec<(u32, f64)> = (8..=64).map(|r| (r, lab::pkm(3, 2, r).unwrap().opt)).collect();
    let s = RateSeries::new("pkm", &pts, 0.0, ReferenceKind::ClosedForm, 0);
    let k = s.fitted_slope.unwrap();
    assert!((-2.5..=-1.5).contains(&k), "{k}");
}

#[test]
fn density_riemann_mass() {
    let f = Polynomial::parse("x1^2 + x2 - x1*x2", 2).unwrap();
    for m in [
        MeasureSpec::box_lebesgue(2),
        MeasureSpec::ball(2, 0.0).unwrap(),
        MeasureSpec::simplex(2).unwrap(),
    ] {
        let g = lab::density_grid(&f, &m, 4, 1.0, 200).unwrap();
        let mass = g.riemann_mass.unwrap();
        assert!((mass - 1.0).abs() < 1e-2, "{m:?}: {mass}");
    }
    assert!(lab::density_grid(&f, &MeasureSpec::box_chebyshev(2), 2, 1.0, 50).unwrap().riemann_mass.is_none());
    assert!(lab::density_grid(&Polynomial::variable(3, 0), &MeasureSpec::sphere(3).unwrap(), 2, 1.0, 10).is_err());
}

#[test]
fn motzkin_density_peaks() {
    let g = lab::motzkin_density(8, 200).unwrap();
    let center = g.density_at(&[0.0, 0.0]).unwrap();
    for x in [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]] {
        assert!(g.density_at(&x).unwrap() > center);
    }
    assert!((g.riemann_mass.unwrap() - 1.0).abs() < 1e-2);
}
