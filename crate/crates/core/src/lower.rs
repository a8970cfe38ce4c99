//! Lower bounds from Putinar- and Schmüdgen-type certificates, and SOS
//! certification of single polynomials.
//!
//! All Gram matrices are indexed by the tensor Chebyshev basis `T_a(x)`,
//! and coefficient matching happens in that basis as well.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cheb::{for_each_product_term, ChebPoly};
use crate::error::{Error, Result};
use crate::grid::halton_point;
use crate::linalg::{self, SymMatrix};
use crate::poly::{exponents_up_to, Exponent, Polynomial};
use crate::sdp::{self, Constraint, SdpOptions, SdpProblem, SdpSolution, SdpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Geq0,
    Eq0,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetConstraint {
    pub g: Polynomial,
    pub relation: Relation,
}

/// `X = {x : g_j(x) ≥ 0 or = 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetDescription {
    pub nvars: usize,
    pub constraints: Vec<SetConstraint>,
    pub name: Option<String>,
}

/// Largest inequality count accepted for the preordering.
pub const MAX_PREORDERING: usize = 8;

impl SetDescription {
    pub fn new(nvars: usize, constraints: Vec<SetConstraint>, name: Option<String>) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::InvalidParameter("a set needs at least one constraint".into()));
        }
        for c in &constraints {
            if c.g.nvars() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: c.g.nvars(),
                });
            }
        }
        Ok(SetDescription {
            nvars,
            constraints,
            name,
        })
    }

    pub fn inequalities(&self) -> Vec<usize> {
        (0..self.constraints.len())
            .filter(|&i| self.constraints[i].relation == Relation::Geq0)
            .collect()
    }

    pub fn equalities(&self) -> Vec<usize> {
        (0..self.constraints.len())
            .filter(|&i| self.constraints[i].relation == Relation::Eq0)
            .collect()
    }

    /// Smallest slack over the constraints (equalities count as `−|g|`).
    pub fn slack(&self, x: &[f64]) -> Result<f64> {
        let mut s = f64::INFINITY;
        for c in &self.constraints {
            let v = c.g.evaluate(x)?;
            s = s.min(match c.relation {
                Relation::Geq0 => v,
                Relation::Eq0 => -v.abs(),
            });
        }
        Ok(s)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.slack(x)? >= -tol)
    }

    /// Substitutes `x = s·y` in every constraint.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let scale = vec![s; self.nvars];
        let shift = vec![0.0; self.nvars];
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                Ok(SetConstraint {
                    g: c.g.affine_substitute(&scale, &shift)?,
                    relation: c.relation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SetDescription::new(self.nvars, constraints, self.name.clone())
    }
}

/// `box`, `ball`, `simplex` (full-dimensional) or `sphere` in `n` variables.
pub fn builtin_set(name: &str, n: usize) -> Result<SetDescription> {
    if n == 0 {
        return Err(Error::InvalidParameter("sets need n >= 1".into()));
    }
    let one = Polynomial::constant(n, 1.0);
    let x = |i: usize| Polynomial::variable(n, i);
    let sq_norm = (0..n).fold(Polynomial::zero(n), |acc, i| acc.add(&x(i).multiply(&x(i)).unwrap()).unwrap());
    let geq = |g: Polynomial| SetConstraint {
        g,
        relation: Relation::Geq0,
    };
    let constraints = match name {
        "box" => (0..n)
            .map(|i| geq(one.sub(&x(i).multiply(&x(i)).unwrap()).unwrap()))
            .collect(),
        "ball" => vec![geq(one.sub(&sq_norm).unwrap())],
        "sphere" => vec![SetConstraint {
            g: one.sub(&sq_norm).unwrap(),
            relation: Relation::Eq0,
        }],
        "simplex" => {
            let mut c: Vec<SetConstraint> = (0..n).map(|i| geq(x(i))).collect();
            let sum = (0..n).fold(Polynomial::zero(n), |acc, i| acc.add(&x(i)).unwrap());
            c.push(geq(one.sub(&sum).unwrap()));
            c
        }
        other => return Err(Error::InvalidParameter(format!("unknown set '{other}'"))),
    };
    SetDescription::new(n, constraints, Some(format!("{name}({n})")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LbKind {
    Putinar,
    Schmudgen,
}

/// One Gram block: `σ_J = T(x)ᵀ Q T(x)` multiplying `Π_{j∈J} g_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramBlock {
    /// Constraint indices in `J` (empty for `σ_0`).
    pub subset: Vec<usize>,
    /// Chebyshev multi-indices `a` of the basis `T_a`.
    pub basis: Vec<Exponent>,
    pub gram: SymMatrix,
}

/// Free multiplier `q_e = Σ_δ c_δ T_δ` of an equality constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqMultiplier {
    pub constraint: usize,
    pub chebyshev: Vec<(Exponent, f64)>,
}

impl EqMultiplier {
    pub fn as_cheb(&self, nvars: usize) -> ChebPoly {
        let mut p = ChebPoly::zero(nvars);
        for (e, c) in &self.chebyshev {
            p.add_term(e.clone(), *c);
        }
        p
    }
}

/// `f − λ = Σ_J σ_J Π_{j∈J} g_j + Σ_e q_e g_e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub lambda: f64,
    pub basis: String,
    pub grams: Vec<GramBlock>,
    pub multipliers: Vec<EqMultiplier>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LbStatus {
    /// Solved and independently verified.
    Verified,
    /// The solver or the verifier could not confirm the bound.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub coeff_error: f64,
    pub point_error: f64,
    pub min_gram_eig: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundResult {
    pub value: f64,
    pub order: u32,
    pub kind: LbKind,
    pub status: LbStatus,
    pub verified: bool,
    pub certificate: Option<Certificate>,
    pub sdp_status: SdpStatus,
    pub iterations: usize,
    pub diagnostics: Vec<String>,
}

/// An assembled lower-bound SDP and the layout needed to read it back.
#[derive(Debug, Clone)]
pub struct LowerBoundProgram {
    pub problem: SdpProblem,
    pub kind: LbKind,
    pub order: u32,
    subsets: Vec<Vec<usize>>,
    bases: Vec<Vec<Exponent>>,
    // (equality index, basis, first free variable)
    eq_layout: Vec<(usize, Vec<Exponent>, usize)>,
    // constant Chebyshev coefficient of f
    f0: f64,
}

fn half_ceil(d: u32) -> u32 {
    d.div_ceil(2)
}

fn product_cheb(set: &SetDescription, subset: &[usize]) -> Result<ChebPoly> {
    let mut p = ChebPoly::constant(set.nvars, 1.0);
    for &j in subset {
        p = p.multiply(&ChebPoly::from_polynomial(&set.constraints[j].g))?;
    }
    Ok(p)
}

fn subset_degree(set: &SetDescription, subset: &[usize]) -> u32 {
    subset.iter().map(|&j| set.constraints[j].g.degree()).sum()
}

fn assemble(f: &Polynomial, set: &SetDescription, r: u32, kind: LbKind) -> Result<LowerBoundProgram> {
    let n = set.nvars;
    if f.nvars() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: f.nvars(),
        });
    }
    if r == 0 {
        return Err(Error::InvalidParameter("lower bounds need r >= 1".into()));
    }
    if f.degree() > 2 * r {
        return Err(Error::DegreeTooSmall(format!(
            "2r = {} is below deg f = {}",
            2 * r,
            f.degree()
        )));
    }
    let ineq = set.inequalities();
    let mut subsets: Vec<Vec<usize>> = vec![Vec::new()];
    match kind {
        LbKind::Putinar => subsets.extend(ineq.iter().map(|&j| vec![j])),
        LbKind::Schmudgen => {
            if ineq.len() > MAX_PREORDERING {
                return Err(Error::TooManyConstraints(ineq.len()));
            }
            for mask in 1u32..(1 << ineq.len()) {
                subsets.push((0..ineq.len()).filter(|b| mask >> b & 1 == 1).map(|b| ineq[b]).collect());
            }
        }
    }
    // drop products whose degree exceeds 2r
    subsets.retain(|s| subset_degree(set, s) <= 2 * r);

    let coeffs = exponents_up_to(n, 2 * r);
    let index: HashMap<Exponent, usize> = coeffs.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    let mut constraints: Vec<Constraint> = vec![Constraint::default(); coeffs.len()];
    let fc = ChebPoly::from_polynomial(f);
    for (e, c) in fc.terms() {
        constraints[index[e]].rhs = c;
    }

    let mut bases = Vec::with_capacity(subsets.len());
    let mut blocks = Vec::with_capacity(subsets.len());
    for (b, s) in subsets.iter().enumerate() {
        let d = r - half_ceil(subset_degree(set, s));
        let basis = exponents_up_to(n, d);
        let g = product_cheb(set, s)?;
        let gterms: Vec<(Exponent, f64)> = g.terms().map(|(e, c)| (e.clone(), c)).collect();
        let mut acc: HashMap<Exponent, f64> = HashMap::new();
        for a in 0..basis.len() {
            for bb in a..basis.len() {
                acc.clear();
                for_each_product_term(&basis[a], &basis[bb], 1.0, |e, v| {
                    for (ge, gc) in &gterms {
                        for_each_product_term(&e, ge, v * gc, |e2, v2| {
                            *acc.entry(e2).or_insert(0.0) += v2;
                        });
                    }
                });
                for (e, v) in acc.iter() {
                    if *v != 0.0 {
                        constraints[index[e]].push(b, a, bb, *v);
                    }
                }
            }
        }
        blocks.push(basis.len());
        bases.push(basis);
    }

    let mut free = 0;
    let mut eq_layout = Vec::new();
    for e in set.equalities() {
        let ge = &set.constraints[e].g;
        if ge.degree() > 2 * r {
            continue;
        }
        let basis = exponents_up_to(n, 2 * r - ge.degree());
        let gc = ChebPoly::from_polynomial(ge);
        for (k, delta) in basis.iter().enumerate() {
            let mut acc: HashMap<Exponent, f64> = HashMap::new();
            for (te, tc) in gc.terms() {
                for_each_product_term(delta, te, tc, |e2, v2| {
                    *acc.entry(e2).or_insert(0.0) += v2;
                });
            }
            for (e2, v) in acc {
                if v != 0.0 {
                    constraints[index[&e2]].free.push((free + k, v));
                }
            }
        }
        eq_layout.push((e, basis.clone(), free));
        free += basis.len();
    }
    // λ only enters the constant coefficient, λ = f_0 − ⟨A_0, X⟩ − B_0ᵀu, so
    // that row becomes the objective instead of a free variable
    let row0 = constraints.remove(index[&Exponent::zero(n)]);
    let mut problem = SdpProblem::new(blocks, free);
    for e in &row0.entries {
        let c = &mut problem.c[e.block];
        c.set(e.i, e.j, c.get(e.i, e.j) - e.v);
    }
    for &(k, v) in &row0.free {
        problem.free_obj[k] -= v;
    }
    problem.constraints = constraints;
    Ok(LowerBoundProgram {
        f0: row0.rhs,
        problem,
        kind,
        order: r,
        subsets,
        bases,
        eq_layout,
    })
}

/// Truncated quadratic module `Q(g)_{2r}`: `σ_0 + Σ_j σ_j g_j`.
pub fn assemble_putinar(f: &Polynomial, set: &SetDescription, r: u32) -> Result<LowerBoundProgram> {
    assemble(f, set, r, LbKind::Putinar)
}

/// Truncated preordering `T(g)_{2r}`: `Σ_J σ_J Π_{j∈J} g_j`.
pub fn assemble_schmudgen(f: &Polynomial, set: &SetDescription, r: u32) -> Result<LowerBoundProgram> {
    assemble(f, set, r, LbKind::Schmudgen)
}

impl LowerBoundProgram {
    pub fn certificate(&self, sol: &SdpSolution) -> Certificate {
        let grams = self
            .subsets
            .iter()
            .zip(&self.bases)
            .zip(&sol.x)
            .map(|((s, b), x)| GramBlock {
                subset: s.clone(),
                basis: b.clone(),
                gram: x.clone(),
            })
            .collect();
        let multipliers = self
            .eq_layout
            .iter()
            .map(|(e, basis, off)| EqMultiplier {
                constraint: *e,
                chebyshev: basis
                    .iter()
                    .enumerate()
                    .map(|(k, d)| (d.clone(), sol.u[off + k]))
                    .collect(),
            })
            .collect();
        Certificate {
            lambda: self.f0 + sol.primal_objective,
            basis: "chebyshev-tensor".into(),
            grams,
            multipliers,
        }
    }
}

/// Solves the hierarchy at order `r` and verifies the certificate.
pub fn lb(f: &Polynomial, set: &SetDescription, r: u32, kind: LbKind) -> Result<LowerBoundResult> {
    let prog = assemble(f, set, r, kind)?;
    let sol = sdp::solve(&prog.problem, &SdpOptions::default())?;
    let mut diagnostics = Vec::new();
    if let Some(m) = &sol.message {
        diagnostics.push(m.clone());
    }
    if sol.status != SdpStatus::Optimal {
        diagnostics.push(format!("SDP status {:?}", sol.status));
        return Ok(LowerBoundResult {
            value: f64::NAN,
            order: r,
            kind,
            status: LbStatus::Unknown,
            verified: false,
            certificate: None,
            sdp_status: sol.status,
            iterations: sol.iterations,
            diagnostics,
        });
    }
    let cert = prog.certificate(&sol);
    let mut result = LowerBoundResult {
        value: cert.lambda,
        order: r,
        kind,
        status: LbStatus::Unknown,
        verified: false,
        certificate: Some(cert),
        sdp_status: sol.status,
        iterations: sol.iterations,
        diagnostics,
    };
    let report = verify_certificate(&result, f, set);
    if report.ok {
        result.status = LbStatus::Verified;
        result.verified = true;
    } else {
        result.diagnostics.push(format!("verification failed: {}", report.message));
    }
    Ok(result)
}

/// Expands `Σ_ab Q_ab T_a T_b`.
fn gram_to_cheb(nvars: usize, basis: &[Exponent], q: &SymMatrix) -> ChebPoly {
    let mut acc: HashMap<Exponent, f64> = HashMap::new();
    for a in 0..basis.len() {
        for b in a..basis.len() {
            let w = if a == b { q.get(a, a) } else { 2.0 * q.get(a, b) };
            if w != 0.0 {
                for_each_product_term(&basis[a], &basis[b], w, |e, v| {
                    *acc.entry(e).or_insert(0.0) += v;
                });
            }
        }
    }
    let mut p = ChebPoly::zero(nvars);
    for (e, v) in acc {
        p.add_term(e, v);
    }
    p
}

/// Independently re-derives the identity behind a lower bound.
///
/// Each Gram matrix is eigendecomposed (negative eigenvalues above `−1e-8`
/// are clipped to zero), the resulting sum of squares is expanded and
/// compared coefficientwise with `f − λ` (tolerance `1e-6·(1 + max|f_α|)`),
/// and both sides are evaluated at 100 quasi-random points.
pub fn verify_certificate(result: &LowerBoundResult, f: &Polynomial, set: &SetDescription) -> VerifyReport {
    let fail = |msg: String| VerifyReport {
        ok: false,
        coeff_error: f64::NAN,
        point_error: f64::NAN,
        min_gram_eig: f64::NAN,
        message: msg,
    };
    let Some(cert) = &result.certificate else {
        return fail("no certificate".into());
    };
    let n = set.nvars;
    if f.nvars() != n {
        return fail("dimension mismatch".into());
    }
    let tol = 1e-6 * (1.0 + f.max_abs_coeff());
    let mut min_eig = f64::INFINITY;
    let mut rhs = ChebPoly::constant(n, cert.lambda);
    // factors for pointwise evaluation: (subset, eigenvalues, eigenvector columns)
    let mut factors = Vec::new();
    for blk in &cert.grams {
        if blk.gram.dim() != blk.basis.len() {
            return fail("Gram block size differs from its basis".into());
        }
        if blk.subset.iter().any(|&j| j >= set.constraints.len()) {
            return fail("certificate refers to a missing constraint".into());
        }
        let (vals, vecs) = match linalg::eig_full_sym(&blk.gram) {
            Ok(v) => v,
            Err(e) => return fail(format!("eigendecomposition failed: {e}")),
        };
        let lo = vals.first().copied().unwrap_or(0.0);
        min_eig = min_eig.min(lo);
        if lo < -1e-8 {
            return VerifyReport {
                ok: false,
                coeff_error: f64::NAN,
                point_error: f64::NAN,
                min_gram_eig: min_eig,
                message: format!("Gram block {:?} has eigenvalue {lo:e}", blk.subset),
            };
        }
        let clipped: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
        let k = blk.basis.len();
        let q = SymMatrix::from_fn(k, |a, b| (0..k).map(|i| clipped[i] * vecs[(a, i)] * vecs[(b, i)]).sum());
        let sigma = gram_to_cheb(n, &blk.basis, &q);
        let g = match product_cheb(set, &blk.subset) {
            Ok(g) => g,
            Err(e) => return fail(e.to_string()),
        };
        rhs = rhs.add(&sigma.multiply(&g).expect("same nvars")).expect("same nvars");
        factors.push((blk.subset.clone(), blk.basis.clone(), clipped, vecs));
    }
    for m in &cert.multipliers {
        if m.constraint >= set.constraints.len() {
            return fail("certificate refers to a missing constraint".into());
        }
        let g = ChebPoly::from_polynomial(&set.constraints[m.constraint].g);
        rhs = rhs.add(&m.as_cheb(n).multiply(&g).expect("same nvars")).expect("same nvars");
    }
    let coeff_error = ChebPoly::from_polynomial(f).max_coeff_diff(&rhs).unwrap_or(f64::INFINITY);

    let mut point_error: f64 = 0.0;
    for i in 0..100 {
        let x: Vec<f64> = halton_point(i, n).iter().map(|u| 2.0 * u - 1.0).collect();
        let lhs = f.eval_unchecked(&x) - cert.lambda;
        let mut s = 0.0;
        for (subset, basis, vals, vecs) in &factors {
            let tb: Vec<f64> = basis
                .iter()
                .map(|a| ChebPoly::basis(a.clone()).evaluate(&x).unwrap_or(f64::NAN))
                .collect();
            let mut sigma = 0.0;
            for (col, lam) in vals.iter().enumerate() {
                let dot: f64 = (0..basis.len()).map(|a| vecs[(a, col)] * tb[a]).sum();
                sigma += lam * dot * dot;
            }
            let g: f64 = subset.iter().map(|&j| set.constraints[j].g.eval_unchecked(&x)).product();
            s += sigma * g;
        }
        for m in &cert.multipliers {
            s += m.as_cheb(n).evaluate(&x).unwrap_or(f64::NAN) * set.constraints[m.constraint].g.eval_unchecked(&x);
        }
        point_error = point_error.max((lhs - s).abs());
    }
    let ok = coeff_error <= tol && point_error <= tol && point_error.is_finite();
    VerifyReport {
        ok,
        coeff_error,
        point_error,
        min_gram_eig: min_eig,
        message: if ok {
            "certificate reproduces f − λ".into()
        } else {
            format!("coefficient error {coeff_error:e}, point error {point_error:e}, tolerance {tol:e}")
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SosVerdict {
    Sos,
    NotSos,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SosResult {
    pub verdict: SosVerdict,
    /// `Some(true)` / `Some(false)` for conclusive verdicts.
    pub is_sos: Option<bool>,
    /// Largest `t` with `f − t·Σ_a T_a² ` SOS.
    pub t_star: f64,
    /// Gram matrix of `f` in the Chebyshev basis when SOS.
    pub gram: Option<GramBlock>,
    /// Linear functional `L` on Chebyshev coefficients with
    /// `L(T_a T_b) ⪰ 0`, `L(p₀) = 1`, `L(f) < 0`, when not SOS.
    pub dual: Option<Vec<(Exponent, f64)>>,
    pub message: String,
}

/// Margin below which `t*` counts as negative.
pub const SOS_TOL: f64 = 1e-7;

/// Decides whether `f` is a sum of squares by maximizing `t` such that
/// `f − t·p₀` is SOS, where `p₀ = Σ_a T_a(x)²` has identity Gram matrix.
pub fn certify_sos(f: &Polynomial) -> Result<SosResult> {
    let n = f.nvars();
    let deg = f.degree();
    if deg % 2 != 0 {
        return Err(Error::InvalidParameter(format!("an SOS polynomial has even degree (got {deg})")));
    }
    let d = deg / 2;
    let basis = exponents_up_to(n, d);
    let coeffs = exponents_up_to(n, deg);
    let index: HashMap<Exponent, usize> = coeffs.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    let mut cons: Vec<Constraint> = vec![Constraint::default(); coeffs.len()];
    for (e, c) in ChebPoly::from_polynomial(f).terms() {
        cons[index[e]].rhs = c;
    }
    let k = basis.len();
    let p0 = gram_to_cheb(n, &basis, &SymMatrix::identity(k));
    for a in 0..k {
        for b in a..k {
            let mut acc: HashMap<Exponent, f64> = HashMap::new();
            for_each_product_term(&basis[a], &basis[b], 1.0, |e, v| {
                *acc.entry(e).or_insert(0.0) += v;
            });
            for (e, v) in acc {
                cons[index[&e]].push(0, a, b, v);
            }
        }
    }
    for (e, c) in p0.terms() {
        cons[index[e]].free.push((0, c));
    }
    let mut p = SdpProblem::new(vec![k], 1);
    p.free_obj[0] = 1.0;
    p.constraints = cons;
    let sol = sdp::solve(&p, &SdpOptions::default())?;
    if sol.status != SdpStatus::Optimal {
        return Ok(SosResult {
            verdict: SosVerdict::Unknown,
            is_sos: None,
            t_star: f64::NAN,
            gram: None,
            dual: None,
            message: format!("SDP ended with {:?}", sol.status),
        });
    }
    let t = sol.u[0];
    if t >= -SOS_TOL {
        let g = SymMatrix::from_fn(k, |a, b| sol.x[0].get(a, b) + if a == b { t } else { 0.0 });
        let (vals, vecs) = linalg::eig_full_sym(&g)?;
        let clipped = SymMatrix::from_fn(k, |a, b| {
            (0..k).map(|i| vals[i].max(0.0) * vecs[(a, i)] * vecs[(b, i)]).sum()
        });
        let err = ChebPoly::from_polynomial(f)
            .max_coeff_diff(&gram_to_cheb(n, &basis, &clipped))?;
        return Ok(SosResult {
            verdict: SosVerdict::Sos,
            is_sos: Some(true),
            t_star: t,
            gram: Some(GramBlock {
                subset: Vec::new(),
                basis,
                gram: clipped,
            }),
            dual: None,
            message: format!("Gram reconstruction error {err:e}"),
        });
    }
    // dual certificate: y with 𝒜*(y) ⪰ 0, p₀ᵀy = 1, fᵀy = t* < 0
    let aty = p.adjoint(&sol.y);
    let lam_min = linalg::eigenvalues_sym(&SymMatrix::symmetrized(&aty[0]))?[0];
    let p0y: f64 = p.free_adjoint(&sol.y)[0];
    let fy = p.dual_objective(&sol.y);
    let ok = lam_min >= -SOS_TOL && (p0y - 1.0).abs() <= SOS_TOL && fy < -SOS_TOL;
    let dual = Some(coeffs.iter().cloned().zip(sol.y.iter().copied()).collect());
    Ok(if ok {
        SosResult {
            verdict: SosVerdict::NotSos,
            is_sos: Some(false),
            t_star: t,
            gram: None,
            dual,
            message: format!("separating functional: L(f) = {fy:e}, min eig {lam_min:e}"),
        }
    } else {
        SosResult {
            verdict: SosVerdict::Unknown,
            is_sos: None,
            t_star: t,
            gram: None,
            dual,
            message: format!("inconclusive: L(f) = {fy:e}, L(p0) = {p0y}, min eig {lam_min:e}"),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{motzkin, robinson};

    fn p(s: &str, n: usize) -> Polynomial {
        Polynomial::parse(s, n).unwrap()
    }

    #[test]
    fn builtin_sets() {
        let b = builtin_set("box", 2).unwrap();
        assert_eq!(b.constraints.len(), 2);
        assert_eq!(b.constraints[0].g, p("1 - x1^2", 2));
        let s = builtin_set("sphere", 3).unwrap();
        assert_eq!(s.equalities(), vec![0]);
        let ball = builtin_set("ball", 2).unwrap();
        assert!(ball.slack(&[0.6, 0.8]).unwrap().abs() < 1e-15);
        assert!(builtin_set("torus", 2).is_err());
        assert_eq!(builtin_set("simplex", 3).unwrap().inequalities().len(), 4);
    }

    #[test]
    fn linear_on_interval() {
        let set = builtin_set("box", 1).unwrap();
        let res = lb(&p("x1", 1), &set, 1, LbKind::Putinar).unwrap();
        assert!(res.verified);
        assert!((res.value + 1.0).abs() < 1e-6, "{}", res.value);
        let s = lb(&p("x1", 1), &set, 1, LbKind::Schmudgen).unwrap();
        assert!((s.value - res.value).abs() < 1e-7);
    }

    #[test]
    fn sphere_linear() {
        let set = builtin_set("sphere", 2).unwrap();
        let res = lb(&p("x1", 2), &set, 1, LbKind::Putinar).unwrap();
        assert!(res.verified, "{:?}", res.diagnostics);
        assert!((res.value + 1.0).abs() < 1e-6);
    }

    #[test]
    fn constants_and_squares() {
        let set = builtin_set("ball", 1).unwrap();
        let c = lb(&Polynomial::constant(1, 2.5), &set, 1, LbKind::Putinar).unwrap();
        assert!((c.value - 2.5).abs() < 1e-6);
        let sq = lb(&p("x1^2", 1), &set, 1, LbKind::Putinar).unwrap();
        assert!(sq.value.abs() < 1e-6);
        assert!(matches!(
            assemble_putinar(&p("x1^4", 1), &set, 1),
            Err(Error::DegreeTooSmall(_))
        ));
    }

    #[test]
    fn hand_built_certificate() {
        // 1 + x = ½(1+x)² + ½(1−x²)
        let set = builtin_set("box", 1).unwrap();
        let basis = exponents_up_to(1, 1);
        let mut cheb_sq = SymMatrix::zeros(2);
        cheb_sq.set(0, 0, 0.5);
        cheb_sq.set(0, 1, 0.5);
        cheb_sq.set(1, 1, 0.5);
        let cert = Certificate {
            lambda: -1.0,
            basis: "chebyshev-tensor".into(),
            grams: vec![
                GramBlock {
                    subset: vec![],
                    basis: basis.clone(),
                    gram: cheb_sq,
                },
                GramBlock {
                    subset: vec![0],
                    basis: vec![Exponent::zero(1)],
                    gram: SymMatrix::from_diagonal(&[0.5]),
                },
            ],
            multipliers: vec![],
        };
        let mut res = LowerBoundResult {
            value: -1.0,
            order: 1,
            kind: LbKind::Putinar,
            status: LbStatus::Unknown,
            verified: false,
            certificate: Some(cert),
            sdp_status: SdpStatus::Optimal,
            iterations: 0,
            diagnostics: vec![],
        };
        assert!(verify_certificate(&res, &p("x1", 1), &set).ok);
        let g = &mut res.certificate.as_mut().unwrap().grams[0].gram;
        g.set(0, 1, g.get(0, 1) + 1e-3);
        assert!(!verify_certificate(&res, &p("x1", 1), &set).ok);
    }

    #[test]
    fn preordering_cap() {
        let set = builtin_set("box", 9).unwrap();
        assert!(matches!(
            assemble_schmudgen(&p("x1", 9), &set, 1),
            Err(Error::TooManyConstraints(9))
        ));
        let b2 = builtin_set("box", 2).unwrap();
        let prog = assemble_schmudgen(&p("x1*x2", 2), &b2, 2).unwrap();
        assert_eq!(prog.problem.blocks.len(), 4);
    }

    #[test]
    fn sos_verdicts() {
        let quartic = certify_sos(&p("x1^4 + 1", 1)).unwrap();
        assert_eq!(quartic.is_sos, Some(true));
        let m = certify_sos(&motzkin()).unwrap();
        assert_eq!(m.is_sos, Some(false), "{m:?}");
        let r = certify_sos(&robinson()).unwrap();
        assert_eq!(r.is_sos, Some(false), "{r:?}");
        assert!(certify_sos(&p("x1^3", 1)).is_err());
    }
}
