use soslab_web::{density, jacobi_roots, rate_svg};

#[test]
fn motzkin_density() {
    let d = density("motzkin", 8, 2.0, 100).unwrap();
    assert_eq!(d.values().len(), 100 * 100);
    assert!(d.ub() > 0.0 && d.max() > 1.0);
    assert!(density("x1 +", 2, 1.0, 10).is_err());
    assert!(density("x1", 40, 1.0, 10).is_err());
}

#[test]
fn rate_plot() {
    let svg = rate_svg("x1", "box1-chebyshev", 4, 20, -1.0).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("slope"));
    assert!(rate_svg("x1", "torus2", 4, 20, f64::NAN).is_err());
}

#[test]
fn chebyshev_roots() {
    let r = jacobi_roots(-0.5, -0.5, 5).unwrap();
    for (i, x) in r.iter().enumerate() {
        let want = -(std::f64::consts::PI * (2 * i + 1) as f64 / 10.0).cos();
        assert!((x - want).abs() < 1e-12);
    }
    assert!(jacobi_roots(-1.5, 0.0, 3).is_err());
}
