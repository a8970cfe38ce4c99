//! Dense symmetric eigenvalue routines, Sturm bisection for tridiagonal
//! matrices, generalized symmetric-definite pencils and Cholesky variants.
//!
//! Dense storage and matrix products come from `nalgebra`; the eigenvalue
//! path (Householder tridiagonalization, Sturm bisection, inverse
//! iteration) is implemented here so that results are deterministic and
//! the smallest eigenvalue is bracketed rather than iterated to.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense symmetric matrix.
///
/// Backed by a full `DMatrix`; every constructor symmetrizes from the upper
/// triangle, so the upper triangle is authoritative.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    /// Builds from `f(i, j)` evaluated on `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    /// Copies the upper triangle of `m` into both triangles.
    pub fn from_upper(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "square matrix required");
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    /// Averages `m` with its transpose.
    pub fn symmetrized(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "square matrix required");
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.0[(i, i)] = *v;
        }
        m
    }

    /// Symmetric tridiagonal matrix with the given diagonal and off-diagonal.
    pub fn tridiagonal(diag: &[f64], off: &[f64]) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        let mut m = Self::from_diagonal(diag);
        for (i, v) in off.iter().enumerate() {
            m.set(i, i + 1, *v);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Sets entries `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] = v;
        self.0[(j, i)] = v;
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// `‖A‖_max`, the largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `A + c·I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c;
        }
        SymMatrix(m)
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymMatrix(&self.0 * c)
    }

    /// `vᵀAv`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for j in 0..n {
            let mut col = 0.0;
            for i in 0..n {
                col += self.0[(i, j)] * v[i];
            }
            s += col * v[j];
        }
        s
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for j in 0..n {
            let vj = v[j];
            for i in 0..n {
                out[i] += self.0[(i, j)] * vj;
            }
        }
        out
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("matrix rows must form a square"));
        }
        Ok(SymMatrix::from_fn(n, |i, j| rows[i][j]))
    }
}

/// An eigenpair with its residual `‖Av − λv‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigResult {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Householder reduction `A = Q T Qᵀ` with `Q` kept as reflectors.
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    // reflector k acts on indices k+1..n; stored with its scaling beta
    reflectors: Vec<(Vec<f64>, f64)>,
}

fn tridiagonalize(a: &SymMatrix) -> Tridiagonal {
    let n = a.dim();
    let mut m = a.0.clone();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v: Vec<f64> = (0..len).map(|i| m[(k + 1 + i, k)]).collect();
        let scale = v.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        if scale == 0.0 {
            diag[k] = m[(k, k)];
            off[k] = 0.0;
            reflectors.push((vec![0.0; len], 0.0));
            continue;
        }
        let norm = scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt();
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        diag[k] = m[(k, k)];
        off[k] = alpha;
        if vtv == 0.0 {
            reflectors.push((v, 0.0));
            continue;
        }
        let beta = 2.0 / vtv;
        // p = beta * A22 v
        for i in 0..len {
            p[i] = 0.0;
        }
        for j in 0..len {
            let vj = v[j];
            if vj == 0.0 {
                continue;
            }
            let col = m.column(k + 1 + j);
            for i in 0..len {
                p[i] += col[k + 1 + i] * vj;
            }
        }
        for x in p.iter_mut().take(len) {
            *x *= beta;
        }
        let ptv: f64 = (0..len).map(|i| p[i] * v[i]).sum();
        let half = 0.5 * beta * ptv;
        let w: Vec<f64> = (0..len).map(|i| p[i] - half * v[i]).collect();
        for j in 0..len {
            let (vj, wj) = (v[j], w[j]);
            let mut col = m.column_mut(k + 1 + j);
            for i in 0..len {
                col[k + 1 + i] -= v[i] * wj + w[i] * vj;
            }
        }
        reflectors.push((v, beta));
    }
    if n >= 2 {
        diag[n - 2] = m[(n - 2, n - 2)];
        off[n - 2] = m[(n - 1, n - 2)];
    }
    if n >= 1 {
        diag[n - 1] = m[(n - 1, n - 1)];
    }
    Tridiagonal {
        diag,
        off,
        reflectors,
    }
}

impl Tridiagonal {
    /// Maps an eigenvector of `T` back to one of `A`.
    fn back_transform(&self, z: &mut [f64]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let tail = &mut z[k + 1..];
            let dot: f64 = v.iter().zip(tail.iter()).map(|(a, b)| a * b).sum();
            let s = beta * dot;
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= s * vi;
            }
        }
    }
}

const PIVOT_GUARD: f64 = 1e-300;

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q: f64 = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        let q_safe = if q.abs() < PIVOT_GUARD {
            PIVOT_GUARD.copysign(q)
        } else {
            q
        };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q_safe };
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let pad = f64::EPSILON * (lo.abs().max(hi.abs()) + 1.0) * n as f64;
    (lo - pad, hi + pad)
}

/// The `k`-th smallest eigenvalue (0-based) by Sturm bisection.
pub fn tridiag_kth_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    assert!(k < diag.len());
    let (mut lo, mut hi) = gershgorin(diag, off);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix (Sturm bisection).
pub fn eig_min_tridiag(diag: &[f64], off: &[f64]) -> f64 {
    tridiag_kth_eigenvalue(diag, off, 0)
}

/// All eigenvalues of a symmetric tridiagonal matrix, ascending.
pub fn eig_all_sym_tridiag(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    if off.len() + 1 != diag.len() && !(diag.is_empty() && off.is_empty()) {
        return Err(Error::DimensionMismatch {
            expected: diag.len().saturating_sub(1),
            found: off.len(),
        });
    }
    Ok((0..diag.len())
        .map(|k| tridiag_kth_eigenvalue(diag, off, k))
        .collect())
}

/// LU factorization with partial pivoting of `T − shift·I`.
struct TridiagLu {
    d: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    fn new(diag: &[f64], off: &[f64], shift: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut u1 = vec![0.0; n];
        u1[..n - 1].copy_from_slice(off);
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swap = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            let a = d[i];
            let s = off[i];
            if s.abs() > a.abs() {
                let (r1, r2) = (d[i + 1], u1[i + 1]);
                let (q1, q2) = (u1[i], 0.0);
                let m = a / s;
                d[i] = s;
                u1[i] = r1;
                u2[i] = r2;
                d[i + 1] = q1 - m * r1;
                u1[i + 1] = q2 - m * r2;
                mult[i] = m;
                swap[i] = true;
            } else {
                let m = if a == 0.0 { 0.0 } else { s / a };
                d[i + 1] -= m * u1[i];
                mult[i] = m;
            }
        }
        TridiagLu {
            d,
            u1,
            u2,
            mult,
            swap,
        }
    }

    fn solve(&self, b: &mut [f64], tiny: f64) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.mult[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.u1[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * b[i + 2];
            }
            let piv = if self.d[i].abs() < tiny {
                tiny.copysign(self.d[i])
            } else {
                self.d[i]
            };
            b[i] = s / piv;
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return 0.0;
    }
    for x in v.iter_mut() {
        *x /= scale;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
    norm * scale
}

/// Eigenvector of a tridiagonal matrix for a known eigenvalue, by inverse
/// iteration from a fixed deterministic start.
fn tridiag_eigenvector(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let tnorm = diag.iter().chain(off).fold(0.0f64, |m, x| m.max(x.abs())) + 1e-300;
    let tiny = f64::EPSILON * tnorm;
    let lu = TridiagLu::new(diag, off, lambda);
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662).fract())
        .collect();
    normalize(&mut v);
    for _ in 0..3 {
        lu.solve(&mut v, tiny);
        if normalize(&mut v) == 0.0 {
            v = vec![0.0; n];
            v[0] = 1.0;
        }
    }
    v
}

fn check_finite(a: &SymMatrix) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn residual(a: &SymMatrix, value: f64, v: &[f64]) -> f64 {
    let av = a.mul_vec(v);
    av.iter()
        .zip(v)
        .map(|(x, y)| (x - value * y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Smallest eigenvalue and a unit eigenvector of a symmetric matrix.
pub fn eig_min_sym(a: &SymMatrix) -> Result<EigResult> {
    check_finite(a)?;
    let n = a.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let t = tridiagonalize(a);
    let value = eig_min_tridiag(&t.diag, &t.off);
    let mut z = tridiag_eigenvector(&t.diag, &t.off, value);
    t.back_transform(&mut z);
    normalize(&mut z);
    // sign convention: largest-magnitude entry positive
    let imax = z
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, x)| {
            if x.abs() > bv.abs() + 1e-12 {
                (i, *x)
            } else {
                (bi, bv)
            }
        })
        .0;
    if z[imax] < 0.0 {
        z.iter_mut().for_each(|x| *x = -*x);
    }
    let res = residual(a, value, &z);
    Ok(EigResult {
        value,
        vector: z,
        residual: res,
    })
}

/// Smallest eigenvalue only.
pub fn eig_min_value(a: &SymMatrix) -> Result<f64> {
    check_finite(a)?;
    if a.dim() == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let t = tridiagonalize(a);
    Ok(eig_min_tridiag(&t.diag, &t.off))
}

/// All eigenvalues of a dense symmetric matrix, ascending.
pub fn eigenvalues_sym(a: &SymMatrix) -> Result<Vec<f64>> {
    check_finite(a)?;
    let t = tridiagonalize(a);
    eig_all_sym_tridiag(&t.diag, &t.off)
}

/// Full eigendecomposition `(values ascending, vectors as columns)`.
pub fn eig_full_sym(a: &SymMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    check_finite(a)?;
    let eig = nalgebra::SymmetricEigen::new(a.0.clone());
    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.dim(), a.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Plain Cholesky factor `A = LLᵀ` (lower triangular).
pub fn cholesky(a: &SymMatrix) -> Result<DMatrix<f64>> {
    check_finite(a)?;
    let n = a.dim();
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.0[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a.0[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Output of [`cholesky_pivoted`]: `PᵀAP ≈ LLᵀ` with `rank` columns in `L`.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    pub l: DMatrix<f64>,
    pub rank: usize,
    /// `perm[k]` is the original index placed at position `k`.
    pub perm: Vec<usize>,
}

/// Cholesky with diagonal pivoting; stops once the largest remaining pivot
/// drops to `tol·‖A‖_max`.
pub fn cholesky_pivoted(a: &SymMatrix, tol: f64) -> Result<PivotedCholesky> {
    check_finite(a)?;
    let n = a.dim();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut w = a.0.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = DMatrix::zeros(n, n);
    let mut rank = 0;
    for k in 0..n {
        let (p, piv) = (k..n)
            .map(|i| (i, w[(i, i)]))
            .fold((k, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
        if piv <= tol * scale {
            let worst = (k..n).map(|i| w[(i, i)]).fold(0.0f64, f64::min);
            if worst < -10.0 * tol * scale {
                return Err(Error::Indefinite {
                    pivot: k,
                    value: worst,
                });
            }
            break;
        }
        if p != k {
            w.swap_rows(k, p);
            w.swap_columns(k, p);
            l.swap_rows(k, p);
            perm.swap(k, p);
        }
        let d = w[(k, k)].sqrt();
        l[(k, k)] = d;
        for i in k + 1..n {
            l[(i, k)] = w[(i, k)] / d;
        }
        for j in k + 1..n {
            let ljk = l[(j, k)];
            for i in k + 1..n {
                w[(i, j)] -= l[(i, k)] * ljk;
            }
        }
        rank += 1;
    }
    let l = l.columns(0, rank).into_owned();
    Ok(PivotedCholesky { l, rank, perm })
}

/// Cholesky in the given order that skips (drops) any index whose
/// remaining pivot is at most `tol` times the largest diagonal entry.
///
/// Returns the kept indices and the lower-triangular factor restricted to
/// them, so `A[kept, kept] = LLᵀ`. Order is never permuted.
pub fn cholesky_ordered_dropping(a: &SymMatrix, tol: f64) -> Result<(Vec<usize>, DMatrix<f64>)> {
    check_finite(a)?;
    let n = a.dim();
    let dmax = (0..n).map(|i| a.0[(i, i)]).fold(0.0f64, f64::max);
    let thresh = tol * dmax.max(f64::MIN_POSITIVE);
    let mut kept: Vec<usize> = Vec::new();
    // rows of L for kept indices, stored densely by kept position
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let r = kept.len();
        // solve L[0..r,0..r] x = a[kept, j]
        let mut x = vec![0.0; r];
        for p in 0..r {
            let mut s = a.0[(kept[p], j)];
            for q in 0..p {
                s -= l[(p, q)] * x[q];
            }
            x[p] = s / l[(p, p)];
        }
        let d = a.0[(j, j)] - x.iter().map(|v| v * v).sum::<f64>();
        if d <= thresh {
            if d < -1e3 * thresh.max(f64::EPSILON * dmax) {
                return Err(Error::Indefinite { pivot: j, value: d });
            }
            continue;
        }
        for (q, xv) in x.iter().enumerate() {
            l[(r, q)] = *xv;
        }
        l[(r, r)] = d.sqrt();
        kept.push(j);
    }
    let r = kept.len();
    Ok((kept, l.view((0, 0), (r, r)).into_owned()))
}

/// Solves `Lx = b` in place for lower-triangular `L`.
pub fn forward_substitute(l: &DMatrix<f64>, b: &mut [f64]) {
    let n = b.len();
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Solves `Lᵀx = b` in place for lower-triangular `L`.
pub fn backward_substitute_transpose(l: &DMatrix<f64>, b: &mut [f64]) {
    let n = b.len();
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[(k, i)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// `L⁻¹ A L⁻ᵀ` for lower-triangular `L`.
pub fn congruence_inverse(l: &DMatrix<f64>, a: &SymMatrix) -> SymMatrix {
    let n = a.dim();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("nonsingular triangular factor");
    SymMatrix::symmetrized(&(&linv * &a.0 * linv.transpose()))
}

/// Smallest `λ` with `Av = λBv` for positive definite `B`.
pub fn gen_eig_min(a: &SymMatrix, b: &SymMatrix) -> Result<EigResult> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    check_finite(a)?;
    check_finite(b)?;
    let n = b.dim();
    let tol = 1e-12 * n as f64 * b.max_abs();
    let l = cholesky(b)?;
    if let Some(j) = (0..n).find(|&j| l[(j, j)] * l[(j, j)] <= tol) {
        return Err(Error::NotPositiveDefinite {
            pivot: j,
            value: l[(j, j)] * l[(j, j)],
        });
    }
    let c = congruence_inverse(&l, a);
    let eig = eig_min_sym(&c)?;
    let mut v = eig.vector.clone();
    backward_substitute_transpose(&l, &mut v);
    // residual of the original pencil, normalized so vᵀBv = 1
    let av = a.mul_vec(&v);
    let bv = b.mul_vec(&v);
    let res = av
        .iter()
        .zip(&bv)
        .map(|(x, y)| (x - eig.value * y).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(EigResult {
        value: eig.value,
        vector: v,
        residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_min_eigenpair() {
        let a = SymMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let e = eig_min_sym(&a).unwrap();
        assert!((e.value - 1.0).abs() < 1e-14);
        assert!((e.vector[0].abs() - 1.0).abs() < 1e-12);
        assert!(e.residual < 1e-12);
    }

    #[test]
    fn two_by_two_characteristic_polynomial() {
        let h = 0.5f64.sqrt();
        let a = SymMatrix::tridiagonal(&[0.0, 0.0], &[h]);
        let e = eig_min_sym(&a).unwrap();
        assert!((e.value + h).abs() < 1e-15);
        let all = eig_all_sym_tridiag(&[0.0, 0.0], &[h]).unwrap();
        assert!((all[0] + h).abs() < 1e-15 && (all[1] - h).abs() < 1e-15);
    }

    #[test]
    fn spectral_shift() {
        let a = SymMatrix::from_fn(4, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let e0 = eig_min_sym(&a).unwrap();
        let e1 = eig_min_sym(&a.shifted(2.5)).unwrap();
        assert!((e1.value - e0.value - 2.5).abs() < 1e-13);
        let dot: f64 = e0.vector.iter().zip(&e1.vector).map(|(x, y)| x * y).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_offdiagonal_gives_sorted_diagonal() {
        let ev = eig_all_sym_tridiag(&[3.0, -1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(ev, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn tridiag_length_mismatch() {
        assert!(eig_all_sym_tridiag(&[1.0, 2.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let mut a = SymMatrix::identity(2);
        a.set(0, 1, f64::NAN);
        assert_eq!(eig_min_sym(&a).unwrap_err(), Error::NonFinite);
    }

    #[test]
    fn identity_eigenvector_is_unit() {
        let e = eig_min_sym(&SymMatrix::identity(5)).unwrap();
        assert!((e.value - 1.0).abs() < 1e-14);
        let n: f64 = e.vector.iter().map(|x| x * x).sum();
        assert!((n - 1.0).abs() < 1e-12);
        assert!(e.residual < 1e-12);
    }

    #[test]
    fn gen_eig_special_cases() {
        let a = SymMatrix::from_fn(3, |i, j| (i + 2 * j) as f64 - 1.5);
        let id = SymMatrix::identity(3);
        let g = gen_eig_min(&a, &id).unwrap();
        let s = eig_min_sym(&a).unwrap();
        assert!((g.value - s.value).abs() < 1e-12);
        let b = SymMatrix::from_fn(3, |i, j| if i == j { 2.0 } else { 0.3 });
        let g2 = gen_eig_min(&b.scaled(4.0), &b).unwrap();
        assert!((g2.value - 4.0).abs() < 1e-12);
        let sing = SymMatrix::from_fn(2, |_, _| 1.0);
        assert!(gen_eig_min(&id.clone().scaled(1.0).shifted(0.0), &id).is_ok());
        assert!(matches!(
            gen_eig_min(&SymMatrix::identity(2), &sing),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn pivoted_cholesky_ranks() {
        let id = SymMatrix::identity(4);
        let c = cholesky_pivoted(&id, 1e-12).unwrap();
        assert_eq!(c.rank, 4);
        assert!((&c.l - DMatrix::<f64>::identity(4, 4)).abs().max() < 1e-15);
        let v = [1.0, -2.0, 0.5];
        let r1 = SymMatrix::from_fn(3, |i, j| v[i] * v[j]);
        assert_eq!(cholesky_pivoted(&r1, 1e-12).unwrap().rank, 1);
        let indef = SymMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            cholesky_pivoted(&indef, 1e-12),
            Err(Error::Indefinite { .. })
        ));
    }

    #[test]
    fn pivoted_cholesky_reconstructs() {
        let b = DMatrix::from_fn(5, 3, |i, j| ((i * 3 + j * 7) % 5) as f64 - 2.0);
        let a = SymMatrix::symmetrized(&(&b * b.transpose()));
        let c = cholesky_pivoted(&a, 1e-12).unwrap();
        assert_eq!(c.rank, 3);
        let llt = &c.l * c.l.transpose();
        for i in 0..5 {
            for j in 0..5 {
                let orig = a.get(c.perm[i], c.perm[j]);
                assert!((llt[(i, j)] - orig).abs() <= 10.0 * 1e-12 * a.max_abs() + 1e-12);
            }
        }
    }

    #[test]
    fn ordered_dropping_skips_dependent_rows() {
        let v = [1.0, 1.0, 0.0];
        let w = [0.0, 1.0, 1.0];
        let a = SymMatrix::from_fn(3, |i, j| v[i] * v[j] + w[i] * w[j]);
        let (kept, l) = cholesky_ordered_dropping(&a, 1e-10).unwrap();
        assert_eq!(kept, vec![0, 1]);
        assert_eq!(l.nrows(), 2);
    }
}
