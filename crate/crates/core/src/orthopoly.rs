//! Orthonormal Jacobi polynomials on `[−1, 1]`.
//!
//! The weight is `(1−x)^λ (1+x)^λ′`. Coefficients follow the orthonormal
//! normalization, so the three-term recurrence
//! `x P_k = a_{k−1} P_{k−1} + b_k P_k + a_k P_{k+1}` has a symmetric
//! tridiagonal Jacobi operator whose eigenvalues are the roots of `P_{k+1}`.
//!
//! `P_0` is normalized against the raw (unnormalized) weight, so
//! `P_0 = 1/√mass` with `mass = 2^{λ+λ′+1} Γ(λ+1) Γ(λ′+1) / Γ(λ+λ′+2)`.
//! [`eval_basis_probability`] gives the same family for the probability
//! measure (`P_0 = 1`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};

/// Jacobi-type weight `(1−x)^lambda (1+x)^lambda_prime` on `[−1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiWeight {
    pub lambda: f64,
    pub lambda_prime: f64,
}

impl JacobiWeight {
    pub fn new(lambda: f64, lambda_prime: f64) -> Result<Self> {
        if !(lambda > -1.0 && lambda_prime > -1.0) {
            return Err(Error::InvalidParameter(format!(
                "Jacobi exponents must exceed -1 (got {lambda}, {lambda_prime})"
            )));
        }
        Ok(JacobiWeight {
            lambda,
            lambda_prime,
        })
    }

    /// Symmetric weight `(1−x²)^λ`.
    pub fn symmetric(lambda: f64) -> Result<Self> {
        Self::new(lambda, lambda)
    }

    pub fn chebyshev() -> Self {
        JacobiWeight {
            lambda: -0.5,
            lambda_prime: -0.5,
        }
    }

    pub fn legendre() -> Self {
        JacobiWeight {
            lambda: 0.0,
            lambda_prime: 0.0,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.lambda == self.lambda_prime
    }

    /// `∫_{−1}^{1} (1−x)^λ (1+x)^λ′ dx`.
    pub fn mass(&self) -> f64 {
        let (a, b) = (self.lambda, self.lambda_prime);
        let ln = (a + b + 1.0) * std::f64::consts::LN_2 + libm::lgamma(a + 1.0)
            + libm::lgamma(b + 1.0)
            - libm::lgamma(a + b + 2.0);
        ln.exp()
    }

    /// Raw moments `∫ x^k w / mass` for `k = 0..=kmax` of the normalized weight.
    ///
    /// Uses `m_{k+1}(k+λ+λ′+2) = k m_{k−1} + (λ′−λ) m_k`, which follows from
    /// integrating `d/dx[x^k (1−x²) w]` over the interval.
    pub fn moments(&self, kmax: usize) -> Vec<f64> {
        let (a, b) = (self.lambda, self.lambda_prime);
        let mut m = vec![0.0; kmax + 1];
        m[0] = 1.0;
        for k in 0..kmax {
            let prev = if k == 0 { 0.0 } else { k as f64 * m[k - 1] };
            m[k + 1] = (prev + (b - a) * m[k]) / (k as f64 + a + b + 2.0);
        }
        m
    }
}

/// Three-term recurrence coefficients of the orthonormal family.
///
/// `b[k]` is the diagonal for `k = 0..=kmax`; `a[k]` couples `P_k` and
/// `P_{k+1}` for `k = 0..=kmax` (so `a` has one more entry than the
/// Jacobi operator of order `kmax` needs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceCoeffs {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn recurrence_coefficients(w: JacobiWeight, kmax: usize) -> Result<RecurrenceCoeffs> {
    let w = JacobiWeight::new(w.lambda, w.lambda_prime)?;
    let (al, be) = (w.lambda, w.lambda_prime);
    let s = al + be;
    let mut a = Vec::with_capacity(kmax + 1);
    let mut b = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let kf = k as f64;
        let bk = if k == 0 {
            (be - al) / (s + 2.0)
        } else {
            let t = 2.0 * kf + s;
            (be * be - al * al) / (t * (t + 2.0))
        };
        let ak = if k == 0 {
            2.0 / (s + 2.0) * ((al + 1.0) * (be + 1.0) / (s + 3.0)).sqrt()
        } else {
            let t = 2.0 * kf + s;
            2.0 / (t + 2.0)
                * ((kf + 1.0) * (kf + al + 1.0) * (kf + be + 1.0) * (kf + s + 1.0)
                    / ((t + 1.0) * (t + 3.0)))
                    .sqrt()
        };
        a.push(ak);
        b.push(if w.is_symmetric() { 0.0 } else { bk });
    }
    Ok(RecurrenceCoeffs { a, b })
}

fn forward_recurrence(rc: &RecurrenceCoeffs, r: usize, t: f64, p0: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(r + 1);
    v.push(p0);
    if r >= 1 {
        v.push((t - rc.b[0]) * p0 / rc.a[0]);
    }
    for k in 1..r {
        let next = ((t - rc.b[k]) * v[k] - rc.a[k - 1] * v[k - 1]) / rc.a[k];
        v.push(next);
    }
    v
}

/// `P_0(t), …, P_r(t)` orthonormal against the raw weight.
pub fn eval_basis(w: JacobiWeight, r: usize, t: f64) -> Result<Vec<f64>> {
    let rc = recurrence_coefficients(w, r)?;
    Ok(forward_recurrence(&rc, r, t, 1.0 / w.mass().sqrt()))
}

/// `P_0(t), …, P_r(t)` orthonormal against the weight normalized to a
/// probability measure.
pub fn eval_basis_probability(w: JacobiWeight, r: usize, t: f64) -> Result<Vec<f64>> {
    let rc = recurrence_coefficients(w, r)?;
    Ok(forward_recurrence(&rc, r, t, 1.0))
}

/// Evaluator that reuses one set of recurrence coefficients.
#[derive(Debug, Clone)]
pub struct OrthonormalFamily {
    rc: RecurrenceCoeffs,
}

impl OrthonormalFamily {
    /// Probability-normalized family up to degree `kmax`.
    pub fn new(w: JacobiWeight, kmax: usize) -> Result<Self> {
        Ok(OrthonormalFamily {
            rc: recurrence_coefficients(w, kmax)?,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.rc.b.len() - 1
    }

    /// Writes `P_0(t), …, P_r(t)` into `out`.
    pub fn eval_into(&self, r: usize, t: f64, out: &mut Vec<f64>) {
        out.clear();
        out.push(1.0);
        if r >= 1 {
            out.push((t - self.rc.b[0]) / self.rc.a[0]);
        }
        for k in 1..r {
            let next = ((t - self.rc.b[k]) * out[k] - self.rc.a[k - 1] * out[k - 1]) / self.rc.a[k];
            out.push(next);
        }
    }

    pub fn coeffs(&self) -> &RecurrenceCoeffs {
        &self.rc
    }
}

/// The `(r+1)×(r+1)` Jacobi operator: diagonal `b_0..b_r`, off-diagonal
/// `a_0..a_{r−1}`.
pub fn jacobi_operator(w: JacobiWeight, r: usize) -> Result<SymMatrix> {
    let rc = recurrence_coefficients(w, r)?;
    Ok(SymMatrix::tridiagonal(&rc.b[..=r], &rc.a[..r]))
}

/// Smallest root of the degree-`k` orthonormal polynomial, as the minimum
/// eigenvalue of the order-`k−1` Jacobi operator (Sturm bisection).
pub fn smallest_root(w: JacobiWeight, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "a degree-0 polynomial has no roots".into(),
        ));
    }
    let rc = recurrence_coefficients(w, k - 1)?;
    Ok(linalg::eig_min_tridiag(&rc.b[..k], &rc.a[..k - 1]))
}

/// All roots of the degree-`k` orthonormal polynomial, ascending.
pub fn roots(w: JacobiWeight, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let rc = recurrence_coefficients(w, k - 1)?;
    linalg::eig_all_sym_tridiag(&rc.b[..k], &rc.a[..k - 1])
}

/// Gauss rule with `npts` nodes for the probability-normalized weight,
/// exact for polynomials of degree `2·npts − 1`.
///
/// Nodes are the operator eigenvalues; weights are the Christoffel numbers
/// `1 / Σ_k P_k(x_i)²`.
pub fn gauss_rule(w: JacobiWeight, npts: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if npts == 0 {
        return Err(Error::InvalidParameter("at least one node required".into()));
    }
    let nodes = roots(w, npts)?;
    let fam = OrthonormalFamily::new(w, npts)?;
    let mut buf = Vec::new();
    let weights = nodes
        .iter()
        .map(|&x| {
            fam.eval_into(npts - 1, x, &mut buf);
            1.0 / buf.iter().map(|p| p * p).sum::<f64>()
        })
        .collect();
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn invalid_weights_rejected() {
        assert!(JacobiWeight::new(-1.0, 0.0).is_err());
        assert!(recurrence_coefficients(
            JacobiWeight {
                lambda: -2.0,
                lambda_prime: 0.0
            },
            3
        )
        .is_err());
    }

    #[test]
    fn chebyshev_coefficients() {
        let rc = recurrence_coefficients(JacobiWeight::chebyshev(), 6).unwrap();
        assert!((rc.a[0] - 0.5f64.sqrt()).abs() < 1e-15);
        for k in 1..=6 {
            assert!((rc.a[k] - 0.5).abs() < 1e-15);
        }
        assert!(rc.b.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn symmetric_weights_have_zero_diagonal() {
        for lam in [0.0, 0.5, 1.0, 2.5] {
            let rc = recurrence_coefficients(JacobiWeight::symmetric(lam).unwrap(), 10).unwrap();
            assert!(rc.b.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn chebyshev_mass_is_pi() {
        assert!((JacobiWeight::chebyshev().mass() - PI).abs() < 1e-13);
        assert!((JacobiWeight::legendre().mass() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn p0_is_inverse_root_mass() {
        let w = JacobiWeight::new(0.5, -0.25).unwrap();
        for t in [-0.9, 0.0, 0.4] {
            let v = eval_basis(w, 3, t).unwrap();
            assert!((v[0] - 1.0 / w.mass().sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn odd_entries_vanish_at_zero() {
        let v = eval_basis(JacobiWeight::legendre(), 9, 0.0).unwrap();
        for k in (1..=9).step_by(2) {
            assert_eq!(v[k], 0.0);
        }
    }

    #[test]
    fn chebyshev_basis_matches_cosines() {
        let mut s = 0.123f64;
        for _ in 0..50 {
            s = (s * 9.73 + 0.311).fract();
            let theta = s * PI;
            let v = eval_basis(JacobiWeight::chebyshev(), 12, theta.cos()).unwrap();
            assert!((v[0] - 1.0 / PI.sqrt()).abs() < 1e-14);
            for k in 1..=12 {
                let expected = (2.0 / PI).sqrt() * (k as f64 * theta).cos();
                assert!((v[k] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_operator_order_one() {
        let j = jacobi_operator(JacobiWeight::chebyshev(), 1).unwrap();
        let h = 0.5f64.sqrt();
        assert_eq!(j.get(0, 0), 0.0);
        assert!((j.get(0, 1) - h).abs() < 1e-15);
        let ev = linalg::eigenvalues_sym(&j).unwrap();
        assert!((ev[0] + h).abs() < 1e-15 && (ev[1] - h).abs() < 1e-15);
    }

    #[test]
    fn smallest_root_examples() {
        for k in 1..30 {
            let r = smallest_root(JacobiWeight::chebyshev(), k).unwrap();
            assert!((r + (PI / (2.0 * k as f64)).cos()).abs() < 1e-14);
        }
        let r2 = smallest_root(JacobiWeight::legendre(), 2).unwrap();
        assert!((r2 + 1.0 / 3.0f64.sqrt()).abs() < 1e-15);
        assert!(smallest_root(JacobiWeight::legendre(), 0).is_err());
    }

    #[test]
    fn moment_recurrence() {
        let m = JacobiWeight::chebyshev().moments(6);
        assert_eq!(m[1], 0.0);
        assert!((m[2] - 0.5).abs() < 1e-15);
        assert!((m[4] - 0.375).abs() < 1e-15);
        let leg = JacobiWeight::legendre().moments(4);
        assert!((leg[2] - 1.0 / 3.0).abs() < 1e-15);
        assert!((leg[4] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn gauss_rule_integrates_moments() {
        let w = JacobiWeight::new(1.5, -0.5).unwrap();
        let (x, wt) = gauss_rule(w, 8).unwrap();
        let m = w.moments(15);
        for (k, mk) in m.iter().enumerate() {
            let q: f64 = x.iter().zip(&wt).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
            assert!((q - mk).abs() < 1e-13, "k={k}: {q} vs {mk}");
        }
    }
}
