//! Upper bounds `ub(f, X, μ)_r` from sum-of-squares densities.
//!
//! `ub_r = min { ∫ f σ dμ : σ SOS, deg σ ≤ 2r, ∫ σ dμ = 1 }` equals the
//! smallest eigenvalue of `M = (∫ f P_a P_b dμ)` for an orthonormal basis
//! `{P_a}` of `ℝ[X]_r`, and the optimal density is `σ = (Σ v_a P_a)²` for a
//! minimizing eigenvector `v`.

use serde::{Deserialize, Serialize};

use crate::cheb::chebyshev_t_values;
use crate::error::{Error, Result};
use crate::grid;
use crate::linalg::{self, SymMatrix};
use crate::measures::{self, cubature, moment, Cubature, MeasureSpec, RecursiveBasis};
use crate::poly::{exponents_up_to, Polynomial};
use crate::sdp::{self, Constraint, SdpOptions, SdpProblem, SdpStatus};

fn check_dims(f: &Polynomial, m: &MeasureSpec) -> Result<()> {
    if f.nvars() != m.nvars() {
        return Err(Error::DimensionMismatch {
            expected: m.nvars(),
            found: f.nvars(),
        });
    }
    Ok(())
}

/// `(∫ f P_a P_b dμ)_{a,b}` over the orthonormal basis of `ℝ[X]_r`.
pub fn assemble_operator_matrix(f: &Polynomial, m: &MeasureSpec, r: u32) -> Result<SymMatrix> {
    check_dims(f, m)?;
    let basis = RecursiveBasis::new(m, r)?;
    let cub = cubature(m, f.degree() + 2 * r)?;
    basis.operator_matrix(f, &cub)
}

#[derive(Debug, Clone)]
pub struct UpperBoundResult {
    pub value: f64,
    pub order: u32,
    pub basis: RecursiveBasis,
    /// `σ = (Σ_a v_a P_a)²`.
    pub density_coeffs: Vec<f64>,
    pub residual: f64,
}

impl UpperBoundResult {
    /// `σ(x)`.
    pub fn density_at(&self, x: &[f64]) -> Result<f64> {
        let p = self.basis.eval(x)?;
        let s: f64 = p.iter().zip(&self.density_coeffs).map(|(a, b)| a * b).sum();
        Ok(s * s)
    }

    /// `∫ σ dμ`, which is `‖v‖²` by orthonormality.
    pub fn density_mass(&self) -> f64 {
        self.density_coeffs.iter().map(|v| v * v).sum()
    }

    /// `σ` as an explicit polynomial (small orders only).
    pub fn density_polynomial(&self) -> Polynomial {
        let n = self.basis.measure().nvars();
        let mut q = Polynomial::zero(n);
        for (p, v) in self.basis.polynomials().iter().zip(&self.density_coeffs) {
            q = q.add(&p.scale(*v)).expect("same variables");
        }
        q.multiply(&q).expect("same variables")
    }
}

/// `ub(f, X, μ)_r` via the eigenvalue reformulation.
pub fn ub(f: &Polynomial, m: &MeasureSpec, r: u32) -> Result<UpperBoundResult> {
    check_dims(f, m)?;
    let basis = RecursiveBasis::new(m, r)?;
    let cub = cubature(m, f.degree() + 2 * r)?;
    let mat = basis.operator_matrix(f, &cub)?;
    let eig = linalg::eig_min_sym(&mat)?;
    Ok(UpperBoundResult {
        value: eig.value,
        order: r,
        basis,
        density_coeffs: eig.vector,
        residual: eig.residual,
    })
}

/// The same bound from the monomial moment pencil `(∫ f x^α x^β, ∫ x^α x^β)`
/// with every moment multiplied by `mass`. Only practical for small `r`.
pub fn ub_moment_pencil(f: &Polynomial, m: &MeasureSpec, r: u32, mass: f64) -> Result<f64> {
    check_dims(f, m)?;
    if !(mass > 0.0) {
        return Err(Error::InvalidParameter("measure mass must be positive".into()));
    }
    let g = measures::gram(m, r)?;
    let (kept, _) = linalg::cholesky_ordered_dropping(&g, measures::NULL_TOL)?;
    let gf = measures::weighted_gram(m, r, Some(f))?;
    let k = kept.len();
    let a = SymMatrix::from_fn(k, |i, j| mass * gf.get(kept[i], kept[j]));
    let b = SymMatrix::from_fn(k, |i, j| mass * g.get(kept[i], kept[j]));
    Ok(linalg::gen_eig_min(&a, &b)?.value)
}

/// The upper bound program solved as an SDP over the monomial Gram matrix:
/// minimize `⟨G_f, X⟩` subject to `⟨G, X⟩ = 1`, `X ⪰ 0`.
pub fn ub_sdp(f: &Polynomial, m: &MeasureSpec, r: u32) -> Result<f64> {
    check_dims(f, m)?;
    let g = measures::gram(m, r)?;
    let (kept, _) = linalg::cholesky_ordered_dropping(&g, measures::NULL_TOL)?;
    let gf = measures::weighted_gram(m, r, Some(f))?;
    let k = kept.len();
    let mut p = SdpProblem::new(vec![k], 0);
    p.c[0] = SymMatrix::from_fn(k, |i, j| -gf.get(kept[i], kept[j]));
    let mut c = Constraint {
        rhs: 1.0,
        ..Default::default()
    };
    for i in 0..k {
        for j in i..k {
            c.push(0, i, j, g.get(kept[i], kept[j]));
        }
    }
    p.constraints.push(c);
    let sol = sdp::solve(&p, &SdpOptions::default())?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Numerical(format!("upper-bound SDP ended with {:?}", sol.status)));
    }
    Ok(-sol.primal_objective)
}

/// `m_k = ∫ f^k dμ` for `k = 0..=kmax`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushforwardMoments {
    pub values: Vec<f64>,
}

pub fn pushforward_moments(f: &Polynomial, m: &MeasureSpec, kmax: usize) -> Result<PushforwardMoments> {
    check_dims(f, m)?;
    let mut values = Vec::with_capacity(kmax + 1);
    let mut power = Polynomial::constant(f.nvars(), 1.0);
    for k in 0..=kmax {
        if k > 0 {
            power = power.multiply(f)?;
        }
        values.push(measures::integrate(&power, m)?);
    }
    Ok(PushforwardMoments { values })
}

fn node_range(f: &Polynomial, cub: &Cubature) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..cub.len() {
        let v = f.eval_unchecked(cub.node(i));
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Push-forward bound: densities restricted to `s(f(x))` with `s` a
/// univariate SOS of degree `2r`.
///
/// The pencil is assembled for `f̃ = (2f − lo − hi)/(hi − lo)` in the
/// Chebyshev basis `T_i(f̃)` (values from an exact cubature rule), then the
/// eigenvalue is mapped back. `[lo, hi]` is the range of `f` on the rule's
/// nodes, which only affects conditioning.
pub fn ub_pushforward(f: &Polynomial, m: &MeasureSpec, r: u32) -> Result<f64> {
    check_dims(f, m)?;
    let d = f.degree();
    if d == 0 {
        return Ok(f.coeff(&crate::poly::Exponent::zero(f.nvars())));
    }
    let cub = cubature(m, (2 * r + 1) * d)?;
    let (lo, hi) = node_range(f, &cub);
    let half = 0.5 * (hi - lo);
    if half <= 1e-14 * (1.0 + lo.abs()) {
        return Ok(lo);
    }
    let mid = 0.5 * (hi + lo);
    let k = r as usize + 1;
    let mut h0 = nalgebra::DMatrix::<f64>::zeros(k, k);
    let mut h1 = nalgebra::DMatrix::<f64>::zeros(k, k);
    for i in 0..cub.len() {
        let t = (f.eval_unchecked(cub.node(i)) - mid) / half;
        let tv = chebyshev_t_values(r, t);
        let w = cub.weights[i];
        for a in 0..k {
            for b in a..k {
                let v = w * tv[a] * tv[b];
                h0[(a, b)] += v;
                h1[(a, b)] += v * t;
            }
        }
    }
    let h0 = SymMatrix::from_upper(&h0);
    let h1 = SymMatrix::from_upper(&h1);
    let eig = linalg::gen_eig_min(&h1, &h0).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => Error::Numerical(format!(
            "push-forward moment matrix is singular at r = {r}; reduce r"
        )),
        other => other,
    })?;
    Ok(mid + half * eig.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubatureReport {
    pub ub: f64,
    pub node_min: f64,
    pub grid_min: f64,
    pub exactness_error: f64,
    pub holds: bool,
}

/// Checks `ub_r ≥ min_{nodes} f ≥ grid f_min − slack` for a user rule
/// exact to degree `deg f + 2r`.
pub fn cubature_check(
    f: &Polynomial,
    m: &MeasureSpec,
    r: u32,
    nodes: &[Vec<f64>],
    weights: &[f64],
    slack: f64,
) -> Result<CubatureReport> {
    check_dims(f, m)?;
    if nodes.len() != weights.len() || nodes.is_empty() {
        return Err(Error::InvalidParameter("nodes and weights must be nonempty and equal in length".into()));
    }
    if nodes.iter().any(|x| x.len() != m.nvars()) {
        return Err(Error::DimensionMismatch {
            expected: m.nvars(),
            found: nodes.iter().map(Vec::len).find(|&l| l != m.nvars()).unwrap_or(0),
        });
    }
    let mut err: f64 = 0.0;
    for e in exponents_up_to(m.nvars(), f.degree() + 2 * r) {
        let q: f64 = nodes
            .iter()
            .zip(weights)
            .map(|(x, w)| w * x.iter().zip(e.powers()).map(|(xi, &a)| xi.powi(a as i32)).product::<f64>())
            .sum();
        err = err.max((q - moment(m, &e)?).abs());
    }
    if err > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "cubature rule is not exact at degree {} (error {err:e})",
            f.degree() + 2 * r
        )));
    }
    let upper = ub(f, m, r)?.value;
    let node_min = nodes.iter().map(|x| f.eval_unchecked(x)).fold(f64::INFINITY, f64::min);
    let grid_min = grid::grid_fmin(f, m, 100_000, 50)?.value;
    Ok(CubatureReport {
        ub: upper,
        node_min,
        grid_min,
        exactness_error: err,
        holds: upper >= node_min - 1e-9 && node_min >= grid_min - slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(s: &str, n: usize) -> Polynomial {
        Polynomial::parse(s, n).unwrap()
    }

    #[test]
    fn chebyshev_identity_bound() {
        let m = MeasureSpec::box_chebyshev(1);
        for r in 1..=12 {
            let v = ub(&p("x1", 1), &m, r).unwrap().value;
            assert!((v + (PI / (2.0 * (r + 1) as f64)).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_matrix_structure() {
        let m = MeasureSpec::box_chebyshev(1);
        let id = assemble_operator_matrix(&Polynomial::constant(1, 1.0), &m, 4).unwrap();
        let x = assemble_operator_matrix(&p("x1", 1), &m, 4).unwrap();
        let x2 = assemble_operator_matrix(&p("x1^2", 1), &m, 4).unwrap();
        for i in 0..5usize {
            for j in 0..5usize {
                let d = i.abs_diff(j);
                assert!((id.get(i, j) - if d == 0 { 1.0 } else { 0.0 }).abs() < 1e-13);
                if d > 1 {
                    assert!(x.get(i, j).abs() < 1e-13);
                }
                if d > 2 {
                    assert!(x2.get(i, j).abs() < 1e-13);
                }
            }
        }
        assert!((x.get(0, 1) - 0.5f64.sqrt()).abs() < 1e-13);
        assert!(x2.get(0, 2).abs() > 0.1);
    }

    #[test]
    fn constant_and_order_zero() {
        let m = MeasureSpec::ball(2, 0.0).unwrap();
        for r in 0..4 {
            assert!((ub(&Polynomial::constant(2, 3.5), &m, r).unwrap().value - 3.5).abs() < 1e-12);
        }
        let cheb = MeasureSpec::box_chebyshev(1);
        let r0 = ub(&p("x1^2", 1), &cheb, 0).unwrap();
        assert!((r0.value - 0.5).abs() < 1e-14);
        assert!((r0.density_at(&[0.3]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_is_normalized() {
        let m = MeasureSpec::box_lebesgue(2);
        let f = p("x1^2*x2 - x2^2 + 0.3*x1", 2);
        let res = ub(&f, &m, 4).unwrap();
        assert!((res.density_mass() - 1.0).abs() < 1e-10);
        let sigma = res.density_polynomial();
        assert!((measures::integrate(&sigma, &m).unwrap() - 1.0).abs() < 1e-9);
        let fs = measures::integrate(&f.multiply(&sigma).unwrap(), &m).unwrap();
        assert!((fs - res.value).abs() < 1e-9);
    }

    #[test]
    fn routes_agree() {
        let f = p("x1^3 - 2*x1*x2 + x2^2 - 0.5", 2);
        for m in [
            MeasureSpec::box_chebyshev(2),
            MeasureSpec::ball(2, 1.0).unwrap(),
            MeasureSpec::simplex(2).unwrap(),
            MeasureSpec::sphere(2).unwrap(),
        ] {
            for r in 1..=3 {
                let a = ub(&f, &m, r).unwrap().value;
                let b = ub_moment_pencil(&f, &m, r, 1.0).unwrap();
                let c = ub_moment_pencil(&f, &m, r, 7.25).unwrap();
                assert!((a - b).abs() < 1e-9, "{m:?} r={r}: {a} vs {b}");
                assert!((b - c).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pushforward_examples() {
        let m = MeasureSpec::box_chebyshev(1);
        let mom = pushforward_moments(&p("x1", 1), &m, 4).unwrap();
        assert_eq!(mom.values[0], 1.0);
        assert_eq!(mom.values[1], 0.0);
        assert!((mom.values[2] - 0.5).abs() < 1e-15);
        for r in 1..6 {
            let a = ub_pushforward(&p("x1", 1), &m, r).unwrap();
            let b = ub(&p("x1", 1), &m, r).unwrap().value;
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(ub_pushforward(&Polynomial::constant(1, 2.0), &m, 3).unwrap(), 2.0);
    }

    #[test]
    fn sdp_route_matches() {
        let f = p("x1^2 - x1*x2 + 0.2*x2", 2);
        let m = MeasureSpec::box_lebesgue(2);
        let a = ub(&f, &m, 2).unwrap().value;
        let b = ub_sdp(&f, &m, 2).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}
