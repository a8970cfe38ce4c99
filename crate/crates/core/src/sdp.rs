//! Dense block semidefinite programming.
//!
//! Primal:  maximize `⟨C, X⟩ + c_uᵀu`  subject to `𝒜(X) + Bu = b`, `X ⪰ 0`,
//! where `u` collects free scalar variables.
//!
//! Dual:    minimize `bᵀy`  subject to `S = 𝒜*(y) − C ⪰ 0`, `Bᵀy = c_u`.
//!
//! The solver is a primal-dual path-following method with the HKM direction
//! and Mehrotra's predictor-corrector. Free variables enter the Schur system
//! through a small reduced system instead of being split into PSD pieces.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// One upper-triangle entry `(i ≤ j)` of a symmetric constraint matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub v: f64,
}

/// `Σ_b ⟨A_b, X_b⟩ + Σ_k B_k u_k = rhs`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub entries: Vec<Entry>,
    /// `(free variable index, coefficient)`.
    #[serde(default)]
    pub free: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl Constraint {
    /// Adds `v` to the symmetric entries `(i, j)` and `(j, i)`.
    pub fn push(&mut self, block: usize, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push(Entry { block, i, j, v });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub c: Vec<SymMatrix>,
    #[serde(default)]
    pub free_vars: usize,
    #[serde(default)]
    pub free_obj: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    /// Zero objective, no constraints.
    pub fn new(blocks: Vec<usize>, free_vars: usize) -> Self {
        let c = blocks.iter().map(|&n| SymMatrix::zeros(n)).collect();
        SdpProblem {
            blocks,
            c,
            free_vars,
            free_obj: vec![0.0; free_vars],
            constraints: Vec::new(),
        }
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.constraints.is_empty() {
            return bad("an SDP needs at least one constraint".into());
        }
        if self.c.len() != self.blocks.len() {
            return bad(format!("{} objective blocks for {} blocks", self.c.len(), self.blocks.len()));
        }
        for (b, (c, &n)) in self.c.iter().zip(&self.blocks).enumerate() {
            if c.dim() != n {
                return bad(format!("objective block {b} has dimension {} not {n}", c.dim()));
            }
            if !c.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        if self.free_obj.len() != self.free_vars {
            return bad("free objective length differs from free variable count".into());
        }
        for (k, con) in self.constraints.iter().enumerate() {
            if !con.rhs.is_finite() {
                return Err(Error::NonFinite);
            }
            for e in &con.entries {
                if e.block >= self.blocks.len() || e.i > e.j || e.j >= self.blocks[e.block] {
                    return bad(format!("constraint {k}: entry {e:?} out of range"));
                }
                if !e.v.is_finite() {
                    return Err(Error::NonFinite);
                }
            }
            for &(u, v) in &con.free {
                if u >= self.free_vars || !v.is_finite() {
                    return bad(format!("constraint {k}: bad free term ({u}, {v})"));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("SDP problems serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: SdpProblem =
            serde_json::from_str(s).map_err(|e| Error::InvalidParameter(format!("SDP JSON: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    /// `𝒜(X) + Bu`.
    pub fn apply(&self, x: &[DMatrix<f64>], u: &[f64]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|con| {
                let mut s = 0.0;
                for e in &con.entries {
                    let m = &x[e.block];
                    s += if e.i == e.j {
                        e.v * m[(e.i, e.i)]
                    } else {
                        e.v * (m[(e.i, e.j)] + m[(e.j, e.i)])
                    };
                }
                for &(k, v) in &con.free {
                    s += v * u[k];
                }
                s
            })
            .collect()
    }

    /// `𝒜*(y) = Σ_j y_j A_j`.
    pub fn adjoint(&self, y: &[f64]) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (con, &yj) in self.constraints.iter().zip(y) {
            if yj == 0.0 {
                continue;
            }
            for e in &con.entries {
                out[e.block][(e.i, e.j)] += yj * e.v;
                if e.i != e.j {
                    out[e.block][(e.j, e.i)] += yj * e.v;
                }
            }
        }
        out
    }

    /// `Bᵀy`.
    pub fn free_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.free_vars];
        for (con, &yj) in self.constraints.iter().zip(y) {
            for &(k, v) in &con.free {
                out[k] += v * yj;
            }
        }
        out
    }

    pub fn primal_objective(&self, x: &[DMatrix<f64>], u: &[f64]) -> f64 {
        let mut s: f64 = self
            .c
            .iter()
            .zip(x)
            .map(|(c, xb)| c.as_matrix().dot(xb))
            .sum();
        s += self.free_obj.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        s
    }

    pub fn dual_objective(&self, y: &[f64]) -> f64 {
        self.constraints.iter().zip(y).map(|(c, v)| c.rhs * v).sum()
    }

    fn max_data(&self) -> f64 {
        let mut m: f64 = 0.0;
        for c in &self.c {
            m = m.max(c.max_abs());
        }
        for v in &self.free_obj {
            m = m.max(v.abs());
        }
        for con in &self.constraints {
            m = m.max(con.rhs.abs());
            for e in &con.entries {
                m = m.max(e.v.abs());
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    pub max_iters: usize,
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub step_fraction: f64,
    /// Tolerance used to certify infeasibility rays.
    pub infeas_tol: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            max_iters: 200,
            gap_tol: 1e-8,
            feas_tol: 1e-9,
            step_fraction: 0.95,
            infeas_tol: 1e-8,
        }
    }
}

/// Contract tolerances for an `Optimal` verdict.
pub const CONTRACT_GAP: f64 = 1e-6;
pub const CONTRACT_RESIDUAL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<SymMatrix>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<SymMatrix>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|dual − primal|`.
    pub gap: f64,
    /// `‖b − 𝒜(X) − Bu‖ / (1 + ‖b‖)`.
    pub primal_residual: f64,
    /// `(‖𝒜*(y) − C − S‖ + ‖Bᵀy − c_u‖) / (1 + ‖C‖)`.
    pub dual_residual: f64,
    pub iterations: usize,
    pub message: Option<String>,
}

impl SdpSolution {
    /// Primal objective when optimal.
    pub fn value(&self) -> Option<f64> {
        (self.status == SdpStatus::Optimal).then_some(self.primal_objective)
    }
}

/// True when the primal objective does not exceed the dual one by more
/// than `1e-6` at the returned point.
pub fn weak_duality_check(p: &SdpProblem, sol: &SdpSolution) -> bool {
    let x: Vec<DMatrix<f64>> = sol.x.iter().map(|m| m.as_matrix().clone()).collect();
    p.primal_objective(&x, &sol.u) <= p.dual_objective(&sol.y) + 1e-6
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Largest `α` with `M + αΔ ⪰ 0`, given the Cholesky factor of `M ≻ 0`.
fn max_step(chol: &Cholesky<f64, Dyn>, d: &DMatrix<f64>) -> f64 {
    let l = chol.l();
    let Some(t) = l.solve_lower_triangular(d) else {
        return 0.0;
    };
    let Some(z) = l.solve_lower_triangular(&t.transpose()) else {
        return 0.0;
    };
    let lam = min_eig(&sym(&z));
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    ds: Vec<DMatrix<f64>>,
    dy: Vec<f64>,
    du: Vec<f64>,
}

/// Per-block constraint lists, so the Schur assembly touches only the
/// constraints living in each block.
struct BlockIndex {
    // per block: (constraint index, entries of that constraint in the block)
    by_block: Vec<Vec<(usize, Vec<Entry>)>>,
}

impl BlockIndex {
    fn new(p: &SdpProblem) -> Self {
        let mut by_block: Vec<Vec<(usize, Vec<Entry>)>> = vec![Vec::new(); p.blocks.len()];
        for (k, con) in p.constraints.iter().enumerate() {
            let mut per: Vec<Vec<Entry>> = vec![Vec::new(); p.blocks.len()];
            for e in &con.entries {
                per[e.block].push(*e);
            }
            for (b, es) in per.into_iter().enumerate() {
                if !es.is_empty() {
                    by_block[b].push((k, es));
                }
            }
        }
        BlockIndex { by_block }
    }
}

fn inner_sparse(es: &[Entry], g: &DMatrix<f64>) -> f64 {
    es.iter()
        .map(|e| {
            if e.i == e.j {
                e.v * g[(e.i, e.i)]
            } else {
                e.v * (g[(e.i, e.j)] + g[(e.j, e.i)])
            }
        })
        .sum()
}

/// `X A S⁻¹` for sparse symmetric `A`.
fn x_a_sinv(x: &DMatrix<f64>, es: &[Entry], sinv: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let mut xa = DMatrix::<f64>::zeros(n, n);
    for e in es {
        {
            let src = x.column(e.i).clone_owned();
            let mut dst = xa.column_mut(e.j);
            dst.axpy(e.v, &src, 1.0);
        }
        if e.i != e.j {
            let src = x.column(e.j).clone_owned();
            let mut dst = xa.column_mut(e.i);
            dst.axpy(e.v, &src, 1.0);
        }
    }
    xa * sinv
}

struct Solver<'a> {
    p: &'a SdpProblem,
    idx: BlockIndex,
    opts: SdpOptions,
    ntot: f64,
    bnorm: f64,
    cnorm: f64,
}

struct State {
    x: Vec<DMatrix<f64>>,
    s: Vec<DMatrix<f64>>,
    y: Vec<f64>,
    u: Vec<f64>,
}

struct Residuals {
    rp: Vec<f64>,
    rd: Vec<DMatrix<f64>>,
    rdu: Vec<f64>,
    mu: f64,
    pobj: f64,
    dobj: f64,
    prel: f64,
    drel: f64,
}

impl Residuals {
    fn gap(&self) -> f64 {
        (self.dobj - self.pobj).abs()
    }

    fn rel_gap(&self) -> f64 {
        self.gap() / (1.0 + self.pobj.abs() + self.dobj.abs())
    }

    fn infeasibility(&self) -> f64 {
        self.prel + self.drel
    }

    fn merit(&self) -> f64 {
        self.infeasibility() + self.rel_gap()
    }
}

impl<'a> Solver<'a> {
    fn residuals(&self, st: &State) -> Residuals {
        let p = self.p;
        let ax = p.apply(&st.x, &st.u);
        let rp: Vec<f64> = p.constraints.iter().zip(&ax).map(|(c, a)| c.rhs - a).collect();
        let aty = p.adjoint(&st.y);
        let rd: Vec<DMatrix<f64>> = aty
            .iter()
            .zip(&p.c)
            .zip(&st.s)
            .map(|((a, c), s)| a - c.as_matrix() - s)
            .collect();
        let bty = p.free_adjoint(&st.y);
        let rdu: Vec<f64> = p.free_obj.iter().zip(&bty).map(|(c, b)| c - b).collect();
        let xs: f64 = st.x.iter().zip(&st.s).map(|(x, s)| x.dot(s)).sum();
        let rdn = rd.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();
        Residuals {
            mu: xs / self.ntot,
            pobj: p.primal_objective(&st.x, &st.u),
            dobj: p.dual_objective(&st.y),
            prel: norm(&rp) / (1.0 + self.bnorm),
            drel: (rdn + norm(&rdu)) / (1.0 + self.cnorm),
            rp,
            rd,
            rdu,
        }
    }

    fn schur(&self, st: &State, sinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.p.num_constraints();
        let mut mat = DMatrix::<f64>::zeros(m, m);
        for (b, list) in self.idx.by_block.iter().enumerate() {
            for (k, ek) in list {
                let g = x_a_sinv(&st.x[b], ek, &sinv[b]);
                for (j, ej) in list {
                    mat[(*j, *k)] += inner_sparse(ej, &g);
                }
            }
        }
        sym(&mat)
    }

    /// Newton direction with two rounds of iterative refinement against the
    /// exact operator; the Schur complement is badly conditioned near the end.
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        st: &State,
        res: &Residuals,
        sinv: &[DMatrix<f64>],
        mchol: &Cholesky<f64, Dyn>,
        reduced: &Option<(DMatrix<f64>, nalgebra::LU<f64, Dyn, Dyn>)>,
        rc: &[DMatrix<f64>],
    ) -> Option<Direction> {
        let p = self.p;
        let mut d = self.direction_raw(st, &res.rp, &res.rd, &res.rdu, sinv, mchol, reduced, rc)?;
        let zero_rd: Vec<DMatrix<f64>> = p.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for _ in 0..2 {
            let ad = p.apply(&d.dx, &d.du);
            let ep: Vec<f64> = res.rp.iter().zip(&ad).map(|(r, a)| r - a).collect();
            let bdy = p.free_adjoint(&d.dy);
            let eu: Vec<f64> = res.rdu.iter().zip(&bdy).map(|(r, b)| r - b).collect();
            let err = norm(&ep) + norm(&eu);
            if err <= 1e-15 * (1.0 + norm(&res.rp) + norm(&res.rdu)) {
                break;
            }
            let c = self.direction_raw(st, &ep, &zero_rd, &eu, sinv, mchol, reduced, &zero_rd)?;
            for b in 0..d.dx.len() {
                d.dx[b] += &c.dx[b];
                d.ds[b] += &c.ds[b];
            }
            d.dy.iter_mut().zip(&c.dy).for_each(|(a, b)| *a += b);
            d.du.iter_mut().zip(&c.du).for_each(|(a, b)| *a += b);
        }
        Some(d)
    }

    #[allow(clippy::too_many_arguments)]
    fn direction_raw(
        &self,
        st: &State,
        rp: &[f64],
        rd: &[DMatrix<f64>],
        rdu: &[f64],
        sinv: &[DMatrix<f64>],
        mchol: &Cholesky<f64, Dyn>,
        reduced: &Option<(DMatrix<f64>, nalgebra::LU<f64, Dyn, Dyn>)>,
        rc: &[DMatrix<f64>],
    ) -> Option<Direction> {
        let p = self.p;
        // h = 𝒜(Rc S⁻¹ − X Rd S⁻¹) − rp
        let inner: Vec<DMatrix<f64>> = (0..p.blocks.len())
            .map(|b| (&rc[b] - &st.x[b] * &rd[b]) * &sinv[b])
            .collect();
        let zero_u = vec![0.0; p.free_vars];
        let a_inner = p.apply(&inner, &zero_u);
        let h = DVector::from_iterator(a_inner.len(), a_inner.iter().zip(rp).map(|(a, r)| a - r));
        let minv_h = mchol.solve(&h);
        let du = match reduced {
            Some((_, lu)) => {
                // (BᵀM⁻¹B) Δu = rdu − BᵀM⁻¹h
                let bt_minv_h = p.free_adjoint(minv_h.as_slice());
                let rhs = DVector::from_iterator(
                    p.free_vars,
                    rdu.iter().zip(&bt_minv_h).map(|(a, b)| a - b),
                );
                lu.solve(&rhs)?.as_slice().to_vec()
            }
            None => Vec::new(),
        };
        let dy: Vec<f64> = match reduced {
            Some((minv_b, _)) => {
                let corr = minv_b * DVector::from_column_slice(&du);
                (minv_h + corr).as_slice().to_vec()
            }
            None => minv_h.as_slice().to_vec(),
        };
        let ady = p.adjoint(&dy);
        let ds: Vec<DMatrix<f64>> = ady.iter().zip(rd).map(|(a, r)| a + r).collect();
        let dx: Vec<DMatrix<f64>> = (0..p.blocks.len())
            .map(|b| sym(&((&rc[b] - &st.x[b] * &ds[b]) * &sinv[b])))
            .collect();
        if dx.iter().chain(&ds).any(|m| m.iter().any(|v| !v.is_finite())) || dy.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(Direction { dx, ds, dy, du })
    }

    fn steps(&self, st: &State, xchol: &[Cholesky<f64, Dyn>], schol: &[Cholesky<f64, Dyn>], d: &Direction) -> (f64, f64) {
        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for b in 0..st.x.len() {
            ap = ap.min(max_step(&xchol[b], &d.dx[b]));
            ad = ad.min(max_step(&schol[b], &d.ds[b]));
        }
        (ap, ad)
    }

    fn ray_checks(&self, st: &State, res: &Residuals) -> Option<SdpStatus> {
        let p = self.p;
        let tol = self.opts.infeas_tol;
        // primal infeasibility: 𝒜*(ȳ) ⪰ 0, Bᵀȳ = 0, bᵀȳ = −1
        if res.dobj < 0.0 {
            let scale = -1.0 / res.dobj;
            let ybar: Vec<f64> = st.y.iter().map(|v| v * scale).collect();
            let aty = p.adjoint(&ybar);
            let psd = aty.iter().all(|m| min_eig(&sym(m)) >= -tol);
            let bt = norm(&p.free_adjoint(&ybar));
            if psd && bt <= tol {
                return Some(SdpStatus::PrimalInfeasible);
            }
        }
        // dual infeasibility: 𝒜(X̄) + Bū = 0, X̄ ⪰ 0, ⟨C,X̄⟩ + c_uᵀū = 1
        if res.pobj > 0.0 {
            let scale = 1.0 / res.pobj;
            let xbar: Vec<DMatrix<f64>> = st.x.iter().map(|m| m * scale).collect();
            let ubar: Vec<f64> = st.u.iter().map(|v| v * scale).collect();
            let ax = p.apply(&xbar, &ubar);
            if norm(&ax) <= tol {
                return Some(SdpStatus::DualInfeasible);
            }
        }
        None
    }

    fn run(&self) -> SdpSolution {
        let p = self.p;
        let tau = 1.0 + p.max_data();
        let mut st = State {
            x: p.blocks.iter().map(|&n| DMatrix::identity(n, n) * tau).collect(),
            s: p.blocks.iter().map(|&n| DMatrix::identity(n, n) * tau).collect(),
            y: vec![0.0; p.num_constraints()],
            u: vec![0.0; p.free_vars],
        };
        let mut message = None;
        let mut iterations = 0;
        let mut status = None;
        let mut res = self.residuals(&st);
        for it in 0..self.opts.max_iters {
            iterations = it;
            if res.rel_gap() <= self.opts.gap_tol
                && res.prel <= self.opts.feas_tol
                && res.drel <= self.opts.feas_tol
            {
                status = Some(SdpStatus::Optimal);
                break;
            }
            if let Some(s) = self.ray_checks(&st, &res) {
                status = Some(s);
                break;
            }
            match self.iterate(&mut st, &res) {
                Ok(new_res) => res = new_res,
                Err(msg) => {
                    message = Some(msg);
                    break;
                }
            }
            iterations = it + 1;
        }
        let status = status.unwrap_or_else(|| {
            if let Some(s) = self.ray_checks(&st, &res) {
                s
            } else if res.gap() <= CONTRACT_GAP * (1.0 + res.pobj.abs())
                && res.prel <= CONTRACT_RESIDUAL
                && res.drel <= CONTRACT_RESIDUAL
            {
                SdpStatus::Optimal
            } else {
                if message.is_none() {
                    message = Some(format!("iteration limit {} reached", self.opts.max_iters));
                }
                SdpStatus::MaxIter
            }
        });
        SdpSolution {
            status,
            x: st.x.iter().map(SymMatrix::symmetrized).collect(),
            u: st.u.clone(),
            y: st.y.clone(),
            s: st.s.iter().map(SymMatrix::symmetrized).collect(),
            primal_objective: res.pobj,
            dual_objective: res.dobj,
            gap: res.gap(),
            primal_residual: res.prel,
            dual_residual: res.drel,
            iterations,
            message,
        }
    }

    /// One predictor-corrector step. Returns the new residuals, or a
    /// message when the iteration cannot continue.
    fn iterate(&self, st: &mut State, res: &Residuals) -> std::result::Result<Residuals, String> {
        let p = self.p;
        let nb = p.blocks.len();
        let mut xchol = Vec::with_capacity(nb);
        let mut schol = Vec::with_capacity(nb);
        let mut sinv = Vec::with_capacity(nb);
        for b in 0..nb {
            let xc = Cholesky::new(sym(&st.x[b])).ok_or("X lost positive definiteness")?;
            let sc = Cholesky::new(sym(&st.s[b])).ok_or("S lost positive definiteness")?;
            sinv.push(sym(&sc.inverse()));
            xchol.push(xc);
            schol.push(sc);
        }
        let mut m = self.schur(st, &sinv);
        let dmax = m.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
        let mut mchol = Cholesky::new(m.clone());
        let mut reg = 1e-15 * dmax;
        while mchol.is_none() && reg < 1e-6 * dmax {
            for i in 0..m.nrows() {
                m[(i, i)] += reg;
            }
            mchol = Cholesky::new(m.clone());
            reg *= 10.0;
        }
        let mchol = mchol.ok_or("Schur complement is not positive definite")?;
        let reduced = if p.free_vars > 0 {
            let mut bmat = DMatrix::<f64>::zeros(p.num_constraints(), p.free_vars);
            for (j, con) in p.constraints.iter().enumerate() {
                for &(k, v) in &con.free {
                    bmat[(j, k)] += v;
                }
            }
            let minv_b = mchol.solve(&bmat);
            let k = bmat.transpose() * &minv_b;
            Some((minv_b, sym(&k).lu()))
        } else {
            None
        };

        // predictor
        let rc_aff: Vec<DMatrix<f64>> = (0..nb).map(|b| -(&st.x[b] * &st.s[b])).collect();
        let da = self
            .direction(st, res, &sinv, &mchol, &reduced, &rc_aff)
            .ok_or("predictor direction is not finite")?;
        let (ap, ad) = self.steps(st, &xchol, &schol, &da);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff: f64 = (0..nb)
            .map(|b| (&st.x[b] + &da.dx[b] * ap).dot(&(&st.s[b] + &da.ds[b] * ad)))
            .sum::<f64>()
            / self.ntot;
        let sigma = (mu_aff / res.mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let rc: Vec<DMatrix<f64>> = (0..nb)
            .map(|b| {
                let n = p.blocks[b];
                DMatrix::identity(n, n) * (sigma * res.mu) - &st.x[b] * &st.s[b] - &da.dx[b] * &da.ds[b]
            })
            .collect();
        let d = self
            .direction(st, res, &sinv, &mchol, &reduced, &rc)
            .ok_or("corrector direction is not finite")?;
        let (ap, ad) = self.steps(st, &xchol, &schol, &d);
        let mut ap = (self.opts.step_fraction * ap).min(1.0);
        let mut ad = (self.opts.step_fraction * ad).min(1.0);

        let old = res.merit();
        let old_inf = res.infeasibility();
        for _ in 0..8 {
            let trial = State {
                x: (0..nb).map(|b| &st.x[b] + &d.dx[b] * ap).collect(),
                s: (0..nb).map(|b| &st.s[b] + &d.ds[b] * ad).collect(),
                y: st.y.iter().zip(&d.dy).map(|(a, b)| a + ad * b).collect(),
                u: st.u.iter().zip(&d.du).map(|(a, b)| a + ap * b).collect(),
            };
            let r = self.residuals(&trial);
            // infeasible or unbounded problems need the gap to grow while
            // the residuals shrink, so either measure may justify a step
            let shrink = 1.0 - 0.1 * ap.min(ad);
            if r.merit() <= old * (1.0 + 1e-12) || r.infeasibility() <= shrink * old_inf {
                *st = trial;
                return Ok(r);
            }
            ap *= 0.5;
            ad *= 0.5;
        }
        Err("no step reduces the merit function".into())
    }
}

/// Solves `p`. Deterministic for identical input and options.
pub fn solve(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    p.validate()?;
    let ntot = p.blocks.iter().sum::<usize>().max(1) as f64;
    let bnorm = norm(&p.constraints.iter().map(|c| c.rhs).collect::<Vec<_>>());
    let cnorm = p
        .c
        .iter()
        .map(|c| c.as_matrix().norm_squared())
        .sum::<f64>()
        .sqrt()
        + norm(&p.free_obj);
    let solver = Solver {
        p,
        idx: BlockIndex::new(p),
        opts: *opts,
        ntot,
        bnorm,
        cnorm,
    };
    Ok(solver.run())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_problem(rhs: f64) -> SdpProblem {
        let mut p = SdpProblem::new(vec![2], 0);
        p.c[0] = SymMatrix::identity(2);
        let mut c = Constraint {
            rhs,
            ..Default::default()
        };
        c.push(0, 0, 0, 1.0);
        c.push(0, 1, 1, 1.0);
        p.constraints.push(c);
        p
    }

    #[test]
    fn pinned_trace() {
        let sol = solve(&trace_problem(1.0), &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_objective - 1.0).abs() < 1e-7);
        assert!(weak_duality_check(&trace_problem(1.0), &sol));
    }

    #[test]
    fn negative_trace_is_infeasible() {
        let mut p = trace_problem(-1.0);
        p.c[0] = SymMatrix::zeros(2);
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::PrimalInfeasible);
    }

    #[test]
    fn free_variable_maximization() {
        // max u  s.t.  X00 + u = 1,  X11 − u = 0,  X01 = 0; optimum u = 1
        let mut p = SdpProblem::new(vec![2], 1);
        p.free_obj = vec![1.0];
        let mut a = Constraint {
            rhs: 1.0,
            free: vec![(0, 1.0)],
            ..Default::default()
        };
        a.push(0, 0, 0, 1.0);
        let mut b = Constraint {
            rhs: 0.0,
            free: vec![(0, -1.0)],
            ..Default::default()
        };
        b.push(0, 1, 1, 1.0);
        let mut c = Constraint::default();
        c.push(0, 0, 1, 1.0);
        p.constraints = vec![a, b, c];
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.u[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unbounded_is_dual_infeasible() {
        // max X11  s.t.  X00 = 1
        let mut p = SdpProblem::new(vec![2], 0);
        p.c[0] = SymMatrix::from_diagonal(&[0.0, 1.0]);
        let mut c = Constraint {
            rhs: 1.0,
            ..Default::default()
        };
        c.push(0, 0, 0, 1.0);
        p.constraints.push(c);
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::DualInfeasible, "{sol:?}");
    }

    #[test]
    fn json_round_trip() {
        let p = trace_problem(1.0);
        let q = SdpProblem::from_json(&p.to_json()).unwrap();
        assert_eq!(p, q);
        assert!(SdpProblem::from_json("{\"blocks\": [2]}").is_err());
    }

    #[test]
    fn rejects_bad_structure() {
        let mut p = trace_problem(1.0);
        p.constraints[0].entries.push(Entry {
            block: 0,
            i: 1,
            j: 5,
            v: 1.0,
        });
        assert!(solve(&p, &SdpOptions::default()).is_err());
        assert!(solve(&SdpProblem::new(vec![2], 0), &SdpOptions::default()).is_err());
    }
}
