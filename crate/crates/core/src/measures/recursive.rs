//! Explicit orthonormal systems and exact product cubature.
//!
//! Box measures use tensor Jacobi polynomials. Ball, sphere and simplex are
//! built one coordinate at a time: writing `x = (t, ρ·y)` the measure
//! factors into a Jacobi weight in `t` times the same kind of measure in one
//! dimension less, and
//!
//! ```text
//! P_{k,β}(x) = c_m · q_k^{(m)}(t) · ρ^m · Q_β(x′/ρ),   m = deg Q_β,
//! ```
//!
//! where `q^{(m)}` is orthonormal for the `t`-weight multiplied by `ρ^{2m}`.
//! `ρ^m Q_β(x′/ρ)` is a polynomial in `(x′, ρ²)` (ball, sphere) or
//! `(x′, ρ)` (simplex, `ρ = 1 − t`), so everything is evaluated in
//! homogenized form without ever dividing by `ρ`.
//!
//! The same splitting gives Gauss product rules: Gauss–Jacobi nodes in `t`
//! against the lower-dimensional rule scaled by `ρ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::measures::MeasureSpec;
use crate::orthopoly::{self, recurrence_coefficients, JacobiWeight, RecurrenceCoeffs};
use crate::poly::{Exponent, Polynomial};

/// Minimal ring interface so the same recursion evaluates numbers and
/// builds symbolic polynomials.
trait Ring: Clone {
    fn constant_like(&self, c: f64) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn scaled(&self, c: f64) -> Self;
}

impl Ring for f64 {
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scaled(&self, c: f64) -> Self {
        self * c
    }
}

impl Ring for Polynomial {
    fn constant_like(&self, c: f64) -> Self {
        Polynomial::constant(self.nvars(), c)
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o).expect("matching variable counts")
    }
    fn times(&self, o: &Self) -> Self {
        self.multiply(o).expect("matching variable counts")
    }
    fn scaled(&self, c: f64) -> Self {
        self.scale(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    /// Plain recurrence on `[−1,1]`, `s` ignored.
    Plain,
    /// Symmetric weight, `s` carries `ρ²`.
    Even,
    /// Weight on `[0,1]` mapped from `[−1,1]`, `s` carries `ρ`.
    Affine,
}

/// Homogenized values `s^k q_k(u/s)` for `k = 0..=kmax`.
fn family_values<R: Ring>(rc: &RecurrenceCoeffs, kmax: usize, u: &R, s: &R, mode: Mode) -> Vec<R> {
    let one = u.constant_like(1.0);
    let (z, s1, s2) = match mode {
        Mode::Plain => (u.clone(), one.clone(), one.clone()),
        Mode::Even => (u.clone(), u.constant_like(0.0), s.clone()),
        Mode::Affine => (u.scaled(2.0).plus(&s.scaled(-1.0)), s.clone(), s.times(s)),
    };
    let mut v = Vec::with_capacity(kmax + 1);
    v.push(one);
    if kmax >= 1 {
        v.push(z.plus(&s1.scaled(-rc.b[0])).scaled(1.0 / rc.a[0]));
    }
    for k in 1..kmax {
        let lead = z.plus(&s1.scaled(-rc.b[k])).times(&v[k]);
        let back = s2.times(&v[k - 1]).scaled(-rc.a[k - 1]);
        v.push(lead.plus(&back).scaled(1.0 / rc.a[k]));
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Nest {
    Ball,
    Sphere,
    Simplex,
}

#[derive(Debug, Clone)]
struct Entry {
    k: usize,
    lower: usize,
    m: usize,
}

#[derive(Debug, Clone)]
struct Level {
    entries: Vec<Entry>,
    // indexed by m
    fams: Vec<RecurrenceCoeffs>,
    norm: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Structure {
    Tensor { fams: Vec<RecurrenceCoeffs> },
    Nested { nest: Nest, base: Vec<usize>, levels: Vec<Level> },
}

/// Orthonormal basis of `ℝ[X]_r` for the probability measure `μ`, graded
/// by total degree.
#[derive(Debug, Clone)]
pub struct RecursiveBasis {
    measure: MeasureSpec,
    degree: u32,
    labels: Vec<Exponent>,
    structure: Structure,
}

fn level_weight(nest: Nest, lambda: f64, dim: usize, m: usize) -> Result<JacobiWeight> {
    let d = dim as f64;
    let m = m as f64;
    match nest {
        Nest::Ball => JacobiWeight::symmetric(lambda + (d - 1.0) / 2.0 + m),
        Nest::Sphere => JacobiWeight::symmetric((d - 3.0) / 2.0 + m),
        Nest::Simplex => JacobiWeight::new(2.0 * m + d - 1.0, 0.0),
    }
}

/// `1/√E[ρ^{2m}]` under the level's `t`-marginal.
fn level_norm(nest: Nest, lambda: f64, dim: usize, m: usize) -> f64 {
    let d = dim as f64;
    let e = match nest {
        Nest::Ball | Nest::Sphere => {
            let a = match nest {
                Nest::Ball => lambda + (d - 1.0) / 2.0,
                _ => (d - 3.0) / 2.0,
            };
            (0..m)
                .map(|j| (a + 1.0 + j as f64) / (a + 1.5 + j as f64))
                .product::<f64>()
        }
        Nest::Simplex => d / (2.0 * m as f64 + d),
    };
    1.0 / e.sqrt()
}

impl RecursiveBasis {
    pub fn new(measure: &MeasureSpec, r: u32) -> Result<Self> {
        let measure = measure.clone().validated()?;
        let ru = r as usize;
        let (labels, structure) = match &measure {
            MeasureSpec::BoxJacobi { weights } => {
                let fams = weights
                    .iter()
                    .map(|w| recurrence_coefficients(*w, ru))
                    .collect::<Result<Vec<_>>>()?;
                let labels = crate::poly::exponents_up_to(weights.len(), r);
                (labels, Structure::Tensor { fams })
            }
            other => {
                let (nest, lambda, n) = match other {
                    MeasureSpec::BallWeight { n, lambda } => (Nest::Ball, *lambda, *n),
                    MeasureSpec::SphereUniform { n } => (Nest::Sphere, 0.0, *n),
                    MeasureSpec::SimplexLebesgue { n } => (Nest::Simplex, 0.0, *n),
                    MeasureSpec::BoxJacobi { .. } => unreachable!(),
                };
                // base level: a point (ball, simplex) or S⁰ (sphere)
                let (mut labels, base, base_dim): (Vec<Vec<u32>>, Vec<usize>, usize) =
                    if nest == Nest::Sphere {
                        let mut l = vec![vec![0]];
                        let mut b = vec![0];
                        if r >= 1 {
                            l.push(vec![1]);
                            b.push(1);
                        }
                        (l, b, 1)
                    } else {
                        (vec![vec![]], vec![0], 0)
                    };
                let mut degrees: Vec<usize> = base.clone();
                let mut levels = Vec::new();
                for dim in base_dim + 1..=n {
                    let mut fams = Vec::with_capacity(ru + 1);
                    let mut norm = Vec::with_capacity(ru + 1);
                    for m in 0..=ru {
                        fams.push(recurrence_coefficients(level_weight(nest, lambda, dim, m)?, ru - m + 1)?);
                        norm.push(level_norm(nest, lambda, dim, m));
                    }
                    let mut entries = Vec::new();
                    let mut new_labels = Vec::new();
                    let mut new_degrees = Vec::new();
                    for total in 0..=ru {
                        for (idx, &m) in degrees.iter().enumerate() {
                            if m <= total {
                                let k = total - m;
                                entries.push(Entry { k, lower: idx, m });
                                let mut lab = vec![k as u32];
                                lab.extend_from_slice(&labels[idx]);
                                new_labels.push(lab);
                                new_degrees.push(total);
                            }
                        }
                    }
                    levels.push(Level {
                        entries,
                        fams,
                        norm,
                    });
                    labels = new_labels;
                    degrees = new_degrees;
                }
                let labels = labels.into_iter().map(Exponent::new).collect();
                (labels, Structure::Nested { nest, base, levels })
            }
        };
        Ok(RecursiveBasis {
            measure,
            degree: r,
            labels,
            structure,
        })
    }

    pub fn measure(&self) -> &MeasureSpec {
        &self.measure
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Index labels; the total degree of element `i` is `labels()[i].degree()`.
    pub fn labels(&self) -> &[Exponent] {
        &self.labels
    }

    fn eval_generic<R: Ring>(&self, x: &[R]) -> Vec<R> {
        match &self.structure {
            Structure::Tensor { fams } => {
                let r = self.degree as usize;
                let tables: Vec<Vec<R>> = fams
                    .iter()
                    .zip(x)
                    .map(|(rc, xi)| family_values(rc, r, xi, xi, Mode::Plain))
                    .collect();
                self.labels
                    .iter()
                    .map(|lab| {
                        let mut acc = x[0].constant_like(1.0);
                        for (i, &a) in lab.powers().iter().enumerate() {
                            if a > 0 {
                                acc = acc.times(&tables[i][a as usize]);
                            }
                        }
                        acc
                    })
                    .collect()
            }
            Structure::Nested { nest, base, levels } => {
                let one = x[0].constant_like(1.0);
                eval_nested(*nest, base, levels, levels.len(), x, &one)
            }
        }
    }

    /// Values of all basis elements at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.measure.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.measure.nvars(),
                found: x.len(),
            });
        }
        Ok(self.eval_generic(x))
    }

    /// The basis elements as explicit polynomials (practical for small degree).
    pub fn polynomials(&self) -> Vec<Polynomial> {
        let n = self.measure.nvars();
        let vars: Vec<Polynomial> = (0..n).map(|i| Polynomial::variable(n, i)).collect();
        self.eval_generic(&vars)
    }

    /// Values at every node, one row per node.
    pub fn eval_matrix(&self, cub: &Cubature) -> Result<DMatrix<f64>> {
        let n = self.len();
        let mut phi = DMatrix::zeros(cub.len(), n);
        for i in 0..cub.len() {
            let v = self.eval(cub.node(i))?;
            for (j, val) in v.into_iter().enumerate() {
                phi[(i, j)] = val;
            }
        }
        Ok(phi)
    }

    /// `(Σ_i w_i f(x_i) P_a(x_i) P_b(x_i))_{a,b}`, i.e. `∫ f P_a P_b dμ` when
    /// the rule is exact to degree `deg f + 2r`.
    pub fn operator_matrix(&self, f: &Polynomial, cub: &Cubature) -> Result<SymMatrix> {
        if f.nvars() != self.measure.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.measure.nvars(),
                found: f.nvars(),
            });
        }
        let n = self.len();
        let mut acc = DMatrix::<f64>::zeros(n, n);
        const CHUNK: usize = 2048;
        let mut start = 0;
        while start < cub.len() {
            let end = (start + CHUNK).min(cub.len());
            let rows = end - start;
            let mut phi = DMatrix::<f64>::zeros(rows, n);
            let mut scaled = DMatrix::<f64>::zeros(rows, n);
            for i in 0..rows {
                let x = cub.node(start + i);
                let wf = cub.weights[start + i] * f.eval_unchecked(x);
                for (j, v) in self.eval_generic(x).into_iter().enumerate() {
                    phi[(i, j)] = v;
                    scaled[(i, j)] = v * wf;
                }
            }
            acc += phi.transpose() * scaled;
            start = end;
        }
        let m = SymMatrix::symmetrized(&acc);
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }
}

fn eval_nested<R: Ring>(nest: Nest, base: &[usize], levels: &[Level], upto: usize, x: &[R], s: &R) -> Vec<R> {
    if upto == 0 {
        return match nest {
            Nest::Sphere => base
                .iter()
                .map(|&d| if d == 0 { s.constant_like(1.0) } else { x[0].clone() })
                .collect(),
            _ => vec![s.constant_like(1.0)],
        };
    }
    let level = &levels[upto - 1];
    let t = &x[0];
    let s_lower = match nest {
        Nest::Ball | Nest::Sphere => s.plus(&t.times(t).scaled(-1.0)),
        Nest::Simplex => s.plus(&t.scaled(-1.0)),
    };
    let lower = eval_nested(nest, base, levels, upto - 1, &x[1..], &s_lower);
    let mode = if nest == Nest::Simplex { Mode::Affine } else { Mode::Even };
    let rmax = level.fams.len() - 1;
    let mut tables: Vec<Option<Vec<R>>> = vec![None; rmax + 1];
    let mut out = Vec::with_capacity(level.entries.len());
    for e in &level.entries {
        let tab = tables[e.m].get_or_insert_with(|| family_values(&level.fams[e.m], rmax - e.m, t, s, mode));
        out.push(tab[e.k].times(&lower[e.lower]).scaled(level.norm[e.m]));
    }
    out
}

/// A positive cubature rule for a probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Cubature {
    pub nvars: usize,
    /// Flattened nodes, `nvars` coordinates each.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Cubature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.nvars..(i + 1) * self.nvars]
    }

    pub fn integrate(&self, p: &Polynomial) -> f64 {
        (0..self.len())
            .map(|i| self.weights[i] * p.eval_unchecked(self.node(i)))
            .sum()
    }
}

fn gauss_points(degree: u32) -> usize {
    degree as usize / 2 + 1
}

/// Gauss product rule exact for all polynomials of degree `≤ degree`.
pub fn cubature(m: &MeasureSpec, degree: u32) -> Result<Cubature> {
    let npts = gauss_points(degree);
    match m {
        MeasureSpec::BoxJacobi { weights } => {
            let rules = weights
                .iter()
                .map(|w| orthopoly::gauss_rule(*w, npts))
                .collect::<Result<Vec<_>>>()?;
            let mut cub = Cubature {
                nvars: 0,
                nodes: Vec::new(),
                weights: vec![1.0],
            };
            for (x, w) in &rules {
                let mut nodes = Vec::new();
                let mut wts = Vec::new();
                for i in 0..cub.len() {
                    for (xj, wj) in x.iter().zip(w) {
                        nodes.extend_from_slice(cub.node(i));
                        nodes.push(*xj);
                        wts.push(cub.weights[i] * wj);
                    }
                }
                cub = Cubature {
                    nvars: cub.nvars + 1,
                    nodes,
                    weights: wts,
                };
            }
            Ok(cub)
        }
        other => {
            let (nest, lambda, n) = match other {
                MeasureSpec::BallWeight { n, lambda } => (Nest::Ball, *lambda, *n),
                MeasureSpec::SphereUniform { n } => (Nest::Sphere, 0.0, *n),
                MeasureSpec::SimplexLebesgue { n } => (Nest::Simplex, 0.0, *n),
                MeasureSpec::BoxJacobi { .. } => unreachable!(),
            };
            let (mut cub, base_dim) = if nest == Nest::Sphere {
                (
                    Cubature {
                        nvars: 1,
                        nodes: vec![-1.0, 1.0],
                        weights: vec![0.5, 0.5],
                    },
                    1,
                )
            } else {
                (
                    Cubature {
                        nvars: 0,
                        nodes: Vec::new(),
                        weights: vec![1.0],
                    },
                    0,
                )
            };
            for dim in base_dim + 1..=n {
                let (z, wz) = orthopoly::gauss_rule(level_weight(nest, lambda, dim, 0)?, npts)?;
                let mut nodes = Vec::with_capacity(z.len() * cub.nodes.len() + z.len() * cub.len());
                let mut wts = Vec::with_capacity(z.len() * cub.len());
                for (zi, wi) in z.iter().zip(&wz) {
                    let (t, rho) = match nest {
                        Nest::Simplex => {
                            let t = 0.5 * (1.0 + zi);
                            (t, 1.0 - t)
                        }
                        _ => (*zi, (1.0 - zi * zi).max(0.0).sqrt()),
                    };
                    for j in 0..cub.len() {
                        nodes.push(t);
                        nodes.extend(cub.node(j).iter().map(|y| rho * y));
                        wts.push(wi * cub.weights[j]);
                    }
                }
                cub = Cubature {
                    nvars: dim,
                    nodes,
                    weights: wts,
                };
            }
            Ok(cub)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{self, moment};
    use crate::poly::exponents_up_to;

    fn specs() -> Vec<MeasureSpec> {
        vec![
            MeasureSpec::box_chebyshev(2),
            MeasureSpec::BoxJacobi {
                weights: vec![JacobiWeight::new(0.5, -0.25).unwrap(), JacobiWeight::legendre()],
            },
            MeasureSpec::ball(1, 0.0).unwrap(),
            MeasureSpec::ball(3, 0.5).unwrap(),
            MeasureSpec::sphere(1).unwrap(),
            MeasureSpec::sphere(2).unwrap(),
            MeasureSpec::sphere(3).unwrap(),
            MeasureSpec::sphere(4).unwrap(),
            MeasureSpec::simplex(1).unwrap(),
            MeasureSpec::simplex(3).unwrap(),
        ]
    }

    #[test]
    fn cubature_reproduces_moments() {
        for m in specs() {
            let deg = 9;
            let cub = cubature(&m, deg).unwrap();
            for e in exponents_up_to(m.nvars(), deg) {
                let mono = Polynomial::monomial(e.clone(), 1.0);
                let q = cub.integrate(&mono);
                let exact = moment(&m, &e).unwrap();
                assert!((q - exact).abs() < 1e-13, "{m:?} {e:?}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn bases_are_orthonormal_and_span() {
        for m in specs() {
            let r = 4;
            let b = RecursiveBasis::new(&m, r).unwrap();
            let cub = cubature(&m, 2 * r).unwrap();
            let one = Polynomial::constant(m.nvars(), 1.0);
            let g = b.operator_matrix(&one, &cub).unwrap();
            for i in 0..b.len() {
                for j in 0..b.len() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g.get(i, j) - want).abs() < 1e-11, "{m:?} ({i},{j})");
                }
            }
            let reference = measures::orthonormal_basis(&m, r).unwrap();
            assert_eq!(b.len(), reference.rank, "{m:?}");
            for (lab, p) in b.labels().iter().zip(b.polynomials()) {
                assert!(p.degree() <= lab.degree());
            }
        }
    }

    #[test]
    fn symbolic_and_numeric_evaluation_agree() {
        for m in specs() {
            let b = RecursiveBasis::new(&m, 3).unwrap();
            let polys = b.polynomials();
            let mut x = vec![0.3; m.nvars()];
            m.project(&mut x);
            let v = b.eval(&x).unwrap();
            for (p, vi) in polys.iter().zip(&v) {
                assert!((p.evaluate(&x).unwrap() - vi).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(RecursiveBasis::new(&MeasureSpec::sphere(3).unwrap(), 32).unwrap().len(), 1089);
        assert_eq!(RecursiveBasis::new(&MeasureSpec::sphere(2).unwrap(), 2).unwrap().len(), 5);
        assert_eq!(RecursiveBasis::new(&MeasureSpec::simplex(4).unwrap(), 10).unwrap().len(), 1001);
        assert_eq!(cubature(&MeasureSpec::sphere(3).unwrap(), 65).unwrap().len(), 2178);
    }
}
