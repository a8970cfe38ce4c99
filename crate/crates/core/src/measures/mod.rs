//! Reference measures on box, ball, simplex and sphere.
//!
//! Every measure is normalized to a probability measure. Moments are closed
//! form and memoized; [`orthonormal_basis`] orthonormalizes monomials
//! against the moment matrix. High-order work goes through the explicit
//! orthonormal systems and exact cubature of [`recursive`].

pub mod recursive;

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::orthopoly::JacobiWeight;
use crate::poly::{exponents_up_to, Exponent, Polynomial};

pub use recursive::{cubature, Cubature, RecursiveBasis};

/// A supported `(X, μ)` pair.
///
/// * `BoxJacobi`: `[−1,1]ⁿ` with `Π_i (1−x_i)^{λ_i} (1+x_i)^{λ′_i}`.
/// * `BallWeight`: unit ball with `(1−‖x‖²)^λ`.
/// * `SimplexLebesgue`: `{x ≥ 0, Σ x_i ≤ 1}` with Lebesgue measure.
/// * `SphereUniform`: the unit sphere in `ℝⁿ` with surface measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    BoxJacobi { weights: Vec<JacobiWeight> },
    BallWeight { n: usize, lambda: f64 },
    SimplexLebesgue { n: usize },
    SphereUniform { n: usize },
}

impl MeasureSpec {
    /// Box with the symmetric weight `(1−x_i²)^λ` on every coordinate.
    pub fn box_symmetric(n: usize, lambda: f64) -> Result<Self> {
        let w = JacobiWeight::symmetric(lambda)?;
        MeasureSpec::BoxJacobi {
            weights: vec![w; n],
        }
        .validated()
    }

    pub fn box_chebyshev(n: usize) -> Self {
        MeasureSpec::BoxJacobi {
            weights: vec![JacobiWeight::chebyshev(); n],
        }
    }

    pub fn box_lebesgue(n: usize) -> Self {
        MeasureSpec::BoxJacobi {
            weights: vec![JacobiWeight::legendre(); n],
        }
    }

    pub fn ball(n: usize, lambda: f64) -> Result<Self> {
        MeasureSpec::BallWeight { n, lambda }.validated()
    }

    pub fn simplex(n: usize) -> Result<Self> {
        MeasureSpec::SimplexLebesgue { n }.validated()
    }

    pub fn sphere(n: usize) -> Result<Self> {
        MeasureSpec::SphereUniform { n }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.nvars() == 0 {
            return Err(Error::InvalidParameter("measure needs n >= 1".into()));
        }
        match &self {
            MeasureSpec::BoxJacobi { weights } => {
                for w in weights {
                    JacobiWeight::new(w.lambda, w.lambda_prime)?;
                }
            }
            MeasureSpec::BallWeight { lambda, .. } => {
                if !(*lambda >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "ball weight exponent must be >= 0 (got {lambda})"
                    )));
                }
            }
            _ => {}
        }
        Ok(self)
    }

    pub fn nvars(&self) -> usize {
        match self {
            MeasureSpec::BoxJacobi { weights } => weights.len(),
            MeasureSpec::BallWeight { n, .. }
            | MeasureSpec::SimplexLebesgue { n }
            | MeasureSpec::SphereUniform { n } => *n,
        }
    }

    /// Always true: moments are those of the probability measure.
    pub fn normalized(&self) -> bool {
        true
    }

    /// True when `x ↦ −x` in any single coordinate preserves the measure.
    pub fn coordinate_symmetric(&self) -> bool {
        match self {
            MeasureSpec::BoxJacobi { weights } => weights.iter().all(JacobiWeight::is_symmetric),
            MeasureSpec::SimplexLebesgue { .. } => false,
            _ => true,
        }
    }

    /// Whether `x` lies in the support (with slack `tol`).
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            MeasureSpec::BoxJacobi { .. } => x.iter().all(|v| v.abs() <= 1.0 + tol),
            MeasureSpec::BallWeight { .. } => x.iter().map(|v| v * v).sum::<f64>() <= 1.0 + tol,
            MeasureSpec::SimplexLebesgue { .. } => {
                x.iter().all(|&v| v >= -tol) && x.iter().sum::<f64>() <= 1.0 + tol
            }
            MeasureSpec::SphereUniform { .. } => {
                (x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() <= tol
            }
        }
    }

    /// Nearest-ish point of the support, used by grid searches.
    pub fn project(&self, x: &mut [f64]) {
        match self {
            MeasureSpec::BoxJacobi { .. } => {
                for v in x.iter_mut() {
                    *v = v.clamp(-1.0, 1.0);
                }
            }
            MeasureSpec::BallWeight { .. } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r > 1.0 {
                    x.iter_mut().for_each(|v| *v /= r);
                }
            }
            MeasureSpec::SphereUniform { .. } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r > 0.0 {
                    x.iter_mut().for_each(|v| *v /= r);
                } else {
                    x[0] = 1.0;
                }
            }
            MeasureSpec::SimplexLebesgue { .. } => {
                for v in x.iter_mut() {
                    *v = v.max(0.0);
                }
                let s: f64 = x.iter().sum();
                if s > 1.0 {
                    x.iter_mut().for_each(|v| *v /= s);
                }
            }
        }
    }

    fn cache_key(&self) -> Vec<u64> {
        match self {
            MeasureSpec::BoxJacobi { weights } => {
                let mut k = vec![0];
                for w in weights {
                    k.push(w.lambda.to_bits());
                    k.push(w.lambda_prime.to_bits());
                }
                k
            }
            MeasureSpec::BallWeight { n, lambda } => vec![1, *n as u64, lambda.to_bits()],
            MeasureSpec::SimplexLebesgue { n } => vec![2, *n as u64],
            MeasureSpec::SphereUniform { n } => vec![3, *n as u64],
        }
    }
}

type MomentCache = RwLock<HashMap<(Vec<u64>, Exponent), f64>>;

fn cache() -> &'static MomentCache {
    static CACHE: OnceLock<MomentCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Product of `num[i]/den[i]` after sorting both, so partial products stay
/// near 1 and never overflow.
fn balanced_ratio(mut num: Vec<f64>, mut den: Vec<f64>) -> f64 {
    num.sort_by(f64::total_cmp);
    den.sort_by(f64::total_cmp);
    debug_assert_eq!(num.len(), den.len());
    num.iter().zip(&den).map(|(a, b)| a / b).product()
}

/// `E[x^{2β}]` for the ball/sphere family with `c = n/2 + λ + 1` (ball) or
/// `c = n/2` (sphere).
fn rotational_moment(alpha: &Exponent, c: f64) -> f64 {
    if !alpha.is_even() {
        return 0.0;
    }
    let mut num = Vec::new();
    for &a in alpha.powers() {
        num.extend((0..a / 2).map(|j| j as f64 + 0.5));
    }
    let den = (0..num.len()).map(|j| c + j as f64).collect();
    balanced_ratio(num, den)
}

fn compute_moment(m: &MeasureSpec, alpha: &Exponent) -> f64 {
    match m {
        MeasureSpec::BoxJacobi { weights } => weights
            .iter()
            .zip(alpha.powers())
            .map(|(w, &a)| w.moments(a as usize)[a as usize])
            .product(),
        MeasureSpec::BallWeight { n, lambda } => {
            rotational_moment(alpha, *n as f64 / 2.0 + lambda + 1.0)
        }
        MeasureSpec::SphereUniform { n } => rotational_moment(alpha, *n as f64 / 2.0),
        MeasureSpec::SimplexLebesgue { n } => {
            // n! Π α_i! / (|α| + n)!
            let mut num: Vec<f64> = (1..=*n).map(|j| j as f64).collect();
            for &a in alpha.powers() {
                num.extend((1..=a).map(|j| j as f64));
            }
            let total = alpha.degree() as usize + n;
            let den = (1..=total).map(|j| j as f64).collect();
            balanced_ratio(num, den)
        }
    }
}

/// `∫ x^α dμ` for the probability-normalized measure.
pub fn moment(m: &MeasureSpec, alpha: &Exponent) -> Result<f64> {
    if alpha.nvars() != m.nvars() {
        return Err(Error::DimensionMismatch {
            expected: m.nvars(),
            found: alpha.nvars(),
        });
    }
    let key = (m.cache_key(), alpha.clone());
    if let Some(v) = cache().read().ok().and_then(|c| c.get(&key).copied()) {
        return Ok(v);
    }
    let v = compute_moment(m, alpha);
    if let Ok(mut c) = cache().write() {
        c.insert(key, v);
    }
    Ok(v)
}

pub fn integrate(p: &Polynomial, m: &MeasureSpec) -> Result<f64> {
    if p.nvars() != m.nvars() {
        return Err(Error::DimensionMismatch {
            expected: m.nvars(),
            found: p.nvars(),
        });
    }
    let mut s = 0.0;
    for (e, c) in p.terms() {
        s += c * moment(m, e)?;
    }
    Ok(s)
}

/// `⟨p, q⟩_μ = ∫ p q dμ`.
pub fn inner_product(p: &Polynomial, q: &Polynomial, m: &MeasureSpec) -> Result<f64> {
    integrate(&p.multiply(q)?, m)
}

/// Moment matrix `(∫ w x^α x^β dμ)` over `α, β ∈ ℕⁿ_d`, graded-lex order.
/// With `w = None` this is the plain Gram matrix.
pub fn weighted_gram(m: &MeasureSpec, d: u32, w: Option<&Polynomial>) -> Result<SymMatrix> {
    let exps = exponents_up_to(m.nvars(), d);
    let k = exps.len();
    let mut out = SymMatrix::zeros(k);
    for i in 0..k {
        for j in i..k {
            let e = exps[i].add(&exps[j]);
            let v = match w {
                None => moment(m, &e)?,
                Some(p) => {
                    let mut s = 0.0;
                    for (we, c) in p.terms() {
                        s += c * moment(m, &we.add(&e))?;
                    }
                    s
                }
            };
            out.set(i, j, v);
        }
    }
    Ok(out)
}

pub fn gram(m: &MeasureSpec, d: u32) -> Result<SymMatrix> {
    weighted_gram(m, d, None)
}

/// Null-space tolerance (relative to the largest Gram diagonal entry).
pub const NULL_TOL: f64 = 1e-10;

/// A graded orthonormal basis of `ℝ[X]_d` in the monomial basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthoBasis {
    pub measure: MeasureSpec,
    pub degree: u32,
    /// Leading monomial of each basis element (the kept monomials).
    pub leading: Vec<Exponent>,
    pub polys: Vec<Polynomial>,
    pub rank: usize,
}

impl OrthoBasis {
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.polys.iter().map(|p| p.evaluate(x)).collect()
    }
}

/// Orthonormalizes the graded monomial basis of degree `d` against `μ`.
///
/// Cholesky runs in graded order and skips monomials whose remaining pivot
/// is below [`NULL_TOL`], so the result keeps the graded structure and has
/// one element per dimension of `ℝ[X]_d`.
pub fn orthonormal_basis(m: &MeasureSpec, d: u32) -> Result<OrthoBasis> {
    let exps = exponents_up_to(m.nvars(), d);
    let g = gram(m, d)?;
    let (kept, l) = linalg::cholesky_ordered_dropping(&g, NULL_TOL)?;
    let r = kept.len();
    let linv = l
        .solve_lower_triangular(&DMatrix::identity(r, r))
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let polys = (0..r)
        .map(|i| {
            let mut p = Polynomial::zero(m.nvars());
            for j in 0..=i {
                p.add_term(exps[kept[j]].clone(), linv[(i, j)]);
            }
            p
        })
        .collect();
    Ok(OrthoBasis {
        measure: m.clone(),
        degree: d,
        leading: kept.iter().map(|&i| exps[i].clone()).collect(),
        polys,
        rank: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly;

    fn e(v: &[u32]) -> Exponent {
        Exponent::new(v.to_vec())
    }

    #[test]
    fn moment_examples() {
        let cheb = MeasureSpec::box_chebyshev(1);
        assert!((moment(&cheb, &e(&[2])).unwrap() - 0.5).abs() < 1e-15);
        let simplex = MeasureSpec::simplex(2).unwrap();
        assert!((moment(&simplex, &e(&[1, 0])).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let sphere = MeasureSpec::sphere(2).unwrap();
        let x1 = Polynomial::variable(2, 0);
        assert!((inner_product(&x1, &x1, &sphere).unwrap() - 0.5).abs() < 1e-15);
        for m in [cheb.clone(), MeasureSpec::ball(3, 1.0).unwrap(), sphere] {
            let n = m.nvars();
            let mut a = vec![2; n];
            a[0] = 3;
            assert_eq!(moment(&m, &Exponent::new(a)).unwrap(), 0.0);
            assert_eq!(integrate(&Polynomial::constant(n, 1.0), &m).unwrap(), 1.0);
        }
    }

    #[test]
    fn ball_and_simplex_closed_forms() {
        // uniform disc: E[x²] = 1/4, E[x²y²] = 1/24
        let disc = MeasureSpec::ball(2, 0.0).unwrap();
        assert!((moment(&disc, &e(&[2, 0])).unwrap() - 0.25).abs() < 1e-15);
        assert!((moment(&disc, &e(&[2, 2])).unwrap() - 1.0 / 24.0).abs() < 1e-15);
        // S²: E[x⁴] = 1/5
        let s2 = MeasureSpec::sphere(3).unwrap();
        assert!((moment(&s2, &e(&[4, 0, 0])).unwrap() - 0.2).abs() < 1e-15);
        // triangle: E[xy] = 2·1·1/4! = 1/12
        let t = MeasureSpec::simplex(2).unwrap();
        assert!((moment(&t, &e(&[1, 1])).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        // huge degree stays finite
        let big = moment(&MeasureSpec::simplex(4).unwrap(), &e(&[90, 80, 70, 60])).unwrap();
        assert!(big.is_finite() && big > 0.0);
    }

    #[test]
    fn gram_examples() {
        let g = gram(&MeasureSpec::box_chebyshev(1), 1).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(0, 1), 0.0);
        assert!((g.get(1, 1) - 0.5).abs() < 1e-15);
        let s = gram(&MeasureSpec::sphere(2).unwrap(), 2).unwrap();
        let ev = linalg::eigenvalues_sym(&s).unwrap();
        assert!(ev[0].abs() < 1e-14);
    }

    #[test]
    fn orthonormal_basis_examples() {
        let b0 = orthonormal_basis(&MeasureSpec::ball(2, 0.0).unwrap(), 0).unwrap();
        assert_eq!(b0.polys, vec![Polynomial::constant(2, 1.0)]);

        let cheb = MeasureSpec::box_chebyshev(1);
        let b = orthonormal_basis(&cheb, 2).unwrap();
        assert_eq!(b.rank, 3);
        for i in 0..20 {
            let t = -0.95 + 0.1 * i as f64;
            let want =
                orthopoly::eval_basis_probability(JacobiWeight::chebyshev(), 2, t).unwrap();
            let got = b.eval(&[t]).unwrap();
            for k in 0..3 {
                assert!((want[k] - got[k]).abs() < 1e-8);
            }
        }

        let s = orthonormal_basis(&MeasureSpec::sphere(2).unwrap(), 2).unwrap();
        assert_eq!(s.rank, 5);
        assert!(!s.leading.contains(&e(&[0, 2])));
    }

    #[test]
    fn invalid_specs() {
        assert!(MeasureSpec::ball(2, -0.5).is_err());
        assert!(MeasureSpec::sphere(0).is_err());
        assert!(MeasureSpec::box_symmetric(2, -1.0).is_err());
        assert!(moment(&MeasureSpec::box_lebesgue(2), &e(&[1])).is_err());
    }
}
