//! Reference minima by quasi-random search plus coordinate descent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::MeasureSpec;
use crate::poly::Polynomial;

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical inverse of `i` in base `b`.
pub fn halton(mut i: u64, b: u32) -> f64 {
    let b = b as u64;
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// The `i`-th Halton point in `[0,1]^n` (n ≤ 12).
pub fn halton_point(i: u64, n: usize) -> Vec<f64> {
    (0..n).map(|k| halton(i + 1, PRIMES[k])).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMin {
    pub value: f64,
    pub point: Vec<f64>,
    pub samples: usize,
}

fn sample_point(m: &MeasureSpec, u: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = match m {
        MeasureSpec::SimplexLebesgue { .. } => u.to_vec(),
        _ => u.iter().map(|v| 2.0 * v - 1.0).collect(),
    };
    m.project(&mut x);
    x
}

/// Estimates `min_X f` from `samples` Halton points projected into `X`,
/// then polishes the best few by `polish_steps` rounds of coordinate descent.
pub fn grid_fmin(f: &Polynomial, m: &MeasureSpec, samples: usize, polish_steps: usize) -> Result<GridMin> {
    let n = m.nvars();
    if f.nvars() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: f.nvars(),
        });
    }
    if n > PRIMES.len() {
        return Err(Error::InvalidParameter(format!("grid search supports n <= {}", PRIMES.len())));
    }
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    const KEEP: usize = 8;
    let consider = |x: Vec<f64>, best: &mut Vec<(f64, Vec<f64>)>| {
        let v = f.eval_unchecked(&x);
        if best.len() < KEEP || v < best[best.len() - 1].0 {
            best.push((v, x));
            best.sort_by(|a, b| a.0.total_cmp(&b.0));
            best.truncate(KEEP);
        }
    };
    // a few structured points: the center-ish point and the vertices of the simplex
    let mut origin = vec![0.0; n];
    m.project(&mut origin);
    consider(origin, &mut best);
    if let MeasureSpec::SimplexLebesgue { .. } = m {
        for i in 0..n {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            consider(v, &mut best);
        }
    }
    for i in 0..samples {
        consider(sample_point(m, &halton_point(i as u64, n)), &mut best);
    }
    let h0 = 2.0 / (samples.max(1) as f64).powf(1.0 / n as f64);
    let mut out = best[0].clone();
    for (mut v, mut x) in best {
        let mut h = h0;
        for _ in 0..polish_steps {
            let mut improved = false;
            for k in 0..n {
                for dir in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[k] += dir * h;
                    m.project(&mut y);
                    let fy = f.eval_unchecked(&y);
                    if fy < v {
                        v = fy;
                        x = y;
                        improved = true;
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        if v < out.0 {
            out = (v, x);
        }
    }
    Ok(GridMin {
        value: out.0,
        point: out.1,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_base_two() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(2, 2), 0.25);
        assert_eq!(halton(3, 2), 0.75);
    }

    #[test]
    fn finds_simple_minima() {
        let f = Polynomial::parse("x1^2 + x1", 1).unwrap();
        let g = grid_fmin(&f, &MeasureSpec::box_chebyshev(1), 1000, 50).unwrap();
        assert!((g.value + 0.25).abs() < 1e-9);
        let s = Polynomial::parse("x1", 3).unwrap();
        let g = grid_fmin(&s, &MeasureSpec::sphere(3).unwrap(), 2000, 50).unwrap();
        assert!((g.value + 1.0).abs() < 1e-6);
    }
}
