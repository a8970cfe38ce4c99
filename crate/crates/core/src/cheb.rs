//! Polynomials in the tensor Chebyshev basis `T_α(x) = Π_i T_{α_i}(x_i)`.
//!
//! Products linearize exactly through `T_a T_b = (T_{a+b} + T_{|a−b|})/2`,
//! so coefficient matching against Gram matrices stays well scaled at
//! high degree, unlike the monomial basis.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::poly::{Exponent, Polynomial};

#[derive(Debug, Clone, PartialEq)]
pub struct ChebPoly {
    nvars: usize,
    terms: BTreeMap<Exponent, f64>,
}

/// Coefficients of `x^a` in the univariate Chebyshev basis.
fn monomial_in_chebyshev(a: u32) -> Vec<(u32, f64)> {
    // x^a = 2^{1-a} Σ_{k<a/2} C(a,k) T_{a-2k} + [a even] 2^{-a} C(a, a/2) T_0
    let mut out = Vec::new();
    let mut binom = 1.0f64;
    let scale = 0.5f64.powi(a as i32 - 1);
    for k in 0..=a / 2 {
        if k > 0 {
            binom = binom * (a - k + 1) as f64 / k as f64;
        }
        let deg = a - 2 * k;
        let c = if deg == 0 { binom * scale * 0.5 } else { binom * scale };
        out.push((deg, c));
    }
    out
}

/// Monomial coefficients of `T_k`, lowest degree first.
pub fn chebyshev_t_coeffs(k: u32) -> Vec<f64> {
    let mut prev = vec![1.0];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for _ in 1..k {
        let mut next = vec![0.0; cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `T_0(x), …, T_k(x)`.
pub fn chebyshev_t_values(k: u32, x: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(k as usize + 1);
    v.push(1.0);
    if k >= 1 {
        v.push(x);
    }
    for j in 2..=k as usize {
        let t = 2.0 * x * v[j - 1] - v[j - 2];
        v.push(t);
    }
    v
}

impl ChebPoly {
    pub fn zero(nvars: usize) -> Self {
        ChebPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Exponent::zero(nvars), c);
        p
    }

    /// The basis element `T_α`.
    pub fn basis(exp: Exponent) -> Self {
        let mut p = Self::zero(exp.nvars());
        p.add_term(exp, 1.0);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_term(&mut self, exp: Exponent, c: f64) {
        if c == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exp) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let v = *o.get() + c;
                if v == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> {
        self.terms.iter().map(|(e, c)| (e, *c))
    }

    pub fn coeff(&self, exp: &Exponent) -> f64 {
        self.terms.get(exp).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Exponent::degree).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn from_polynomial(p: &Polynomial) -> Self {
        let n = p.nvars();
        let mut out = Self::zero(n);
        for (exp, c) in p.terms() {
            let mut partial: Vec<(Vec<u32>, f64)> = vec![(Vec::with_capacity(n), c)];
            for &a in exp.powers() {
                let expansion = monomial_in_chebyshev(a);
                let mut next = Vec::with_capacity(partial.len() * expansion.len());
                for (prefix, pc) in &partial {
                    for &(deg, ec) in &expansion {
                        let mut e = prefix.clone();
                        e.push(deg);
                        next.push((e, pc * ec));
                    }
                }
                partial = next;
            }
            for (e, v) in partial {
                out.add_term(Exponent::new(e), v);
            }
        }
        out
    }

    pub fn to_polynomial(&self) -> Polynomial {
        let n = self.nvars;
        let mut out = Polynomial::zero(n);
        for (exp, c) in &self.terms {
            let mut partial: Vec<(Vec<u32>, f64)> = vec![(Vec::with_capacity(n), *c)];
            for &a in exp.powers() {
                let coeffs = chebyshev_t_coeffs(a);
                let mut next = Vec::new();
                for (prefix, pc) in &partial {
                    for (deg, &tc) in coeffs.iter().enumerate() {
                        if tc != 0.0 {
                            let mut e = prefix.clone();
                            e.push(deg as u32);
                            next.push((e, pc * tc));
                        }
                    }
                }
                partial = next;
            }
            for (e, v) in partial {
                out.add_term(Exponent::new(e), v);
            }
        }
        out
    }

    pub fn add(&self, other: &ChebPoly) -> Result<ChebPoly> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> ChebPoly {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    fn check(&self, other: &ChebPoly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &ChebPoly) -> Result<ChebPoly> {
        self.check(other)?;
        let mut acc: BTreeMap<Exponent, f64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                for_each_product_term(ea, eb, ca * cb, |e, v| {
                    *acc.entry(e).or_insert(0.0) += v;
                });
            }
        }
        let mut out = Self::zero(self.nvars);
        for (e, v) in acc {
            if v != 0.0 {
                out.terms.insert(e, v);
            }
        }
        Ok(out)
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        let deg = self.degree();
        let tables: Vec<Vec<f64>> = point.iter().map(|&x| chebyshev_t_values(deg, x)).collect();
        Ok(self
            .terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .powers()
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| tables[i][a as usize])
                    .product::<f64>()
            })
            .sum())
    }

    /// Largest coefficient difference against `other`.
    pub fn max_coeff_diff(&self, other: &ChebPoly) -> Result<f64> {
        Ok(self.add(&other.scale(-1.0))?.max_abs_coeff())
    }
}

/// Calls `f` for each term of `T_a · T_b · c` after linearization.
pub fn for_each_product_term(a: &Exponent, b: &Exponent, c: f64, mut f: impl FnMut(Exponent, f64)) {
    let n = a.nvars();
    let pa = a.powers();
    let pb = b.powers();
    let mut split = 0usize;
    let mut factor = c;
    for i in 0..n {
        if pa[i] > 0 && pb[i] > 0 {
            split += 1;
            factor *= 0.5;
        }
    }
    for mask in 0..(1usize << split) {
        let mut e = Vec::with_capacity(n);
        let mut bit = 0;
        for i in 0..n {
            if pa[i] > 0 && pb[i] > 0 {
                if mask >> bit & 1 == 0 {
                    e.push(pa[i] + pb[i]);
                } else {
                    e.push(pa[i].abs_diff(pb[i]));
                }
                bit += 1;
            } else {
                e.push(pa[i] + pb[i]);
            }
        }
        f(Exponent::new(e), factor);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_conversion_round_trips() {
        let p = Polynomial::parse("3*x1^4*x2 - x1^2 + 0.5*x2^3 + 2", 2).unwrap();
        let c = ChebPoly::from_polynomial(&p);
        let back = c.to_polynomial();
        assert!(back.max_coeff_diff(&p).unwrap() < 1e-13);
    }

    #[test]
    fn x_squared_in_chebyshev() {
        let p = Polynomial::parse("x1^2", 1).unwrap();
        let c = ChebPoly::from_polynomial(&p);
        assert_eq!(c.coeff(&Exponent::new(vec![0])), 0.5);
        assert_eq!(c.coeff(&Exponent::new(vec![2])), 0.5);
    }

    #[test]
    fn product_matches_pointwise() {
        let a = ChebPoly::from_polynomial(&Polynomial::parse("x1^3 - x1*x2 + 1", 2).unwrap());
        let b = ChebPoly::from_polynomial(&Polynomial::parse("x2^2 + 2*x1", 2).unwrap());
        let ab = a.multiply(&b).unwrap();
        for pt in [[0.3, -0.7], [0.9, 0.1], [-0.5, 0.5]] {
            let lhs = ab.evaluate(&pt).unwrap();
            let rhs = a.evaluate(&pt).unwrap() * b.evaluate(&pt).unwrap();
            assert!((lhs - rhs).abs() < 1e-13);
        }
    }

    #[test]
    fn t_values_match_cosine() {
        let theta: f64 = 0.77;
        let v = chebyshev_t_values(12, theta.cos());
        for (k, t) in v.iter().enumerate() {
            assert!((t - (k as f64 * theta).cos()).abs() < 1e-13);
        }
    }
}
