//! Experiment harness: rate sweeps, the univariate "opt" program, the
//! stability-number instance, density grids, and output formatting.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{grid_fmin, GridMin};
use crate::lower::{self, builtin_set, LbKind, LbStatus, SetDescription};
use crate::measures::{cubature, MeasureSpec};
use crate::orthopoly::JacobiWeight;
use crate::poly::Polynomial;
use crate::upper::{self, UpperBoundResult};

/// `x` with 12 significant digits, `%.12g` style.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if !(-5..12).contains(&e) {
        let s = format!("{x:.11e}");
        let (m, ex) = s.split_once('e').expect("scientific format");
        format!("{}e{}", trim(m.to_string()), ex)
    } else {
        // rounding can carry into the next decade; the digit count is still ≤ 12
        trim(format!("{:.*}", (11 - e).max(0) as usize, x))
    }
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    fmt12(x).parse().unwrap_or(x)
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64() {
                    if let Some(m) = serde_json::Number::from_f64(round12(x)) {
                        *n = m;
                    }
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_json),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Splits `box2-chebyshev`, `sphere3`, `ball2:0.5` into kind, dimension and
/// optional parameter. A missing dimension falls back to `n`.
pub fn parse_domain(s: &str, n: Option<usize>) -> Result<(String, usize, Option<String>)> {
    let s = s.trim();
    let (head, tail) = match s.find(['-', ':']) {
        Some(i) => (&s[..i], Some(s[i + 1..].to_string())),
        None => (s, None),
    };
    let split = head.find(|c: char| c.is_ascii_digit()).unwrap_or(head.len());
    let kind = head[..split].to_ascii_lowercase();
    let dim = if split < head.len() {
        let d: usize = head[split..]
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad dimension in '{s}'")))?;
        if let Some(n) = n {
            if n != d {
                return Err(Error::DimensionMismatch { expected: d, found: n });
            }
        }
        d
    } else {
        n.ok_or_else(|| Error::InvalidParameter(format!("'{s}' needs a dimension (e.g. {kind}2 or --n)")))?
    };
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    Ok((kind, dim, tail.filter(|t| !t.is_empty())))
}

/// Measures: `box-chebyshev`, `box-lebesgue`, `box-jacobi:λ` (weight
/// `(1−x²)^λ`), `ball[:λ]`, `simplex`, `sphere`.
pub fn parse_measure(s: &str, n: Option<usize>) -> Result<MeasureSpec> {
    let (kind, n, param) = parse_domain(s, n)?;
    let num = |p: &str| -> Result<f64> {
        let p = p.trim_start_matches("jacobi").trim_start_matches([':', '=']);
        p.parse()
            .map_err(|_| Error::InvalidParameter(format!("bad measure parameter '{p}'")))
    };
    match (kind.as_str(), param.as_deref()) {
        ("box", None | Some("chebyshev")) => Ok(MeasureSpec::box_chebyshev(n)),
        ("box", Some("lebesgue" | "uniform")) => Ok(MeasureSpec::box_lebesgue(n)),
        ("box", Some(p)) => MeasureSpec::box_symmetric(n, num(p)?),
        ("ball", None | Some("uniform" | "lebesgue")) => MeasureSpec::ball(n, 0.0),
        ("ball", Some(p)) => MeasureSpec::ball(n, num(p)?),
        ("simplex", None | Some("uniform" | "lebesgue")) => MeasureSpec::simplex(n),
        ("sphere", None | Some("uniform")) => MeasureSpec::sphere(n),
        _ => Err(Error::InvalidParameter(format!("unknown measure '{s}'"))),
    }
}

/// Constraint description of the set underlying a domain string.
pub fn parse_set(s: &str, n: Option<usize>) -> Result<SetDescription> {
    let (kind, n, _) = parse_domain(s, n)?;
    builtin_set(&kind, n)
}

/// `10` or `8..64` (inclusive).
pub fn parse_r_range(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::InvalidParameter(format!("bad order range '{s}'"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().trim_start_matches('=').parse().map_err(|_| bad())?,
        ),
        None => {
            let r = s.trim().parse().map_err(|_| bad())?;
            (r, r)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Reference minimum from 10⁵ Halton points and 50 polish steps.
pub fn reference_min(f: &Polynomial, m: &MeasureSpec) -> Result<GridMin> {
    grid_fmin(f, m, 100_000, 50)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    ClosedForm,
    GridEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEntry {
    pub r: u32,
    pub bound: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSeries {
    pub label: String,
    pub entries: Vec<RateEntry>,
    pub reference: f64,
    pub reference_kind: ReferenceKind,
    pub fitted_slope: Option<f64>,
    pub fit_range: Option<(u32, u32)>,
    pub note: Option<String>,
}

/// Errors at or below this are treated as zero and kept out of fits.
pub const ZERO_ERROR: f64 = 1e-12;

/// Least-squares slope of `log y` against `log x`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

impl RateSeries {
    /// Builds the series and fits the slope, skipping the `skip` smallest orders.
    pub fn new(label: &str, bounds: &[(u32, f64)], reference: f64, reference_kind: ReferenceKind, skip: usize) -> Self {
        let mut entries: Vec<RateEntry> = bounds
            .iter()
            .map(|&(r, b)| RateEntry {
                r,
                bound: b,
                error: (b - reference).abs(),
            })
            .collect();
        entries.sort_by_key(|e| e.r);
        let fit: Vec<&RateEntry> = entries.iter().skip(skip).filter(|e| e.error > ZERO_ERROR).collect();
        let pts: Vec<(f64, f64)> = fit.iter().map(|e| (e.r.max(1) as f64, e.error)).collect();
        let slope = fit_loglog(&pts);
        let note = if slope.is_none() {
            Some(if entries.iter().skip(skip).all(|e| e.error <= ZERO_ERROR) {
                format!("all errors below {ZERO_ERROR:e}; no fit")
            } else {
                "fewer than two usable points; no fit".to_string()
            })
        } else {
            None
        };
        RateSeries {
            label: label.to_string(),
            fit_range: slope.map(|_| (fit[0].r, fit[fit.len() - 1].r)),
            entries,
            reference,
            reference_kind,
            fitted_slope: slope,
            note,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,bound,error\n");
        for e in &self.entries {
            let _ = writeln!(s, "{},{},{}", e.r, fmt12(e.bound), fmt12(e.error));
        }
        s
    }

    /// Log-log plot of the errors with the fitted line.
    pub fn to_svg(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .entries
            .iter()
            .filter(|e| e.error > ZERO_ERROR && e.r > 0)
            .map(|e| ((e.r as f64).log10(), e.error.log10()))
            .collect();
        loglog_svg(&self.label, &pts, self.fitted_slope, self.fit_range)
    }
}

fn loglog_svg(title: &str, pts: &[(f64, f64)], slope: Option<f64>, range: Option<(u32, u32)>) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 420.0, 70.0, 20.0, 40.0, 50.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, xml_escape(title));
    if pts.is_empty() {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">no positive errors</text>"#, w / 2.0, h / 2.0);
        s.push_str("</svg>\n");
        return s;
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, sel: fn(&(f64, f64)) -> f64| pts.iter().map(sel).fold(init, f);
    let (x0, x1) = (fold(f64::min, f64::INFINITY, |p| p.0).floor(), fold(f64::max, f64::NEG_INFINITY, |p| p.0).ceil());
    let (y0, y1) = (fold(f64::min, f64::INFINITY, |p| p.1).floor(), fold(f64::max, f64::NEG_INFINITY, |p| p.1).ceil());
    let x1 = if x1 <= x0 { x0 + 1.0 } else { x1 };
    let y1 = if y1 <= y0 { y0 + 1.0 } else { y1 };
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let _ = writeln!(
        s,
        r#"<path d="M{ml} {mt} V{} H{}" fill="none" stroke="black"/>"#,
        h - mb,
        w - mr
    );
    for d in (x0 as i32)..=(x1 as i32) {
        let x = px(d as f64);
        let _ = writeln!(s, r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/>"#, h - mb, h - mb + 5.0);
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">1e{d}</text>"#, h - mb + 18.0);
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = py(d as f64);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y}" x2="{ml}" y2="{y}" stroke="black"/>"#, ml - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">1e{d}</text>"#, ml - 8.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">r</text>"#, (ml + w - mr) / 2.0, h - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">error</text>"#,
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0
    );
    let line: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue"/>"#, line.join(" "));
    for &(x, y) in pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, px(x), py(y));
    }
    if let (Some(k), Some((lo, hi))) = (slope, range) {
        let (a, b) = ((lo.max(1) as f64).log10(), (hi.max(1) as f64).log10());
        // anchor the line at the mean of the fitted points
        let fitted: Vec<&(f64, f64)> = pts.iter().filter(|p| p.0 >= a - 1e-12 && p.0 <= b + 1e-12).collect();
        if !fitted.is_empty() {
            let mx = fitted.iter().map(|p| p.0).sum::<f64>() / fitted.len() as f64;
            let my = fitted.iter().map(|p| p.1).sum::<f64>() / fitted.len() as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-dasharray="6 4"/>"#,
                px(a),
                py(my + k * (a - mx)),
                px(b),
                py(my + k * (b - mx))
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end" fill="crimson">slope {}</text>"#,
                w - mr - 4.0,
                mt + 14.0,
                fmt12(round_to(k, 4))
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn round_to(x: f64, digits: i32) -> f64 {
    let p = 10f64.powi(digits);
    (x * p).round() / p
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateBound {
    Upper,
    Pushforward,
}

#[cfg(feature = "parallel")]
fn map_orders<T: Send>(rs: &[u32], f: impl Fn(u32) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    use rayon::prelude::*;
    rs.par_iter().map(|&r| f(r)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_orders<T>(rs: &[u32], f: impl Fn(u32) -> Result<T>) -> Result<Vec<T>> {
    rs.iter().map(|&r| f(r)).collect()
}

/// Sweeps `r = lo..=hi`. Without a closed-form `reference` the grid
/// estimate is used.
pub fn rates(
    f: &Polynomial,
    m: &MeasureSpec,
    (lo, hi): (u32, u32),
    bound: RateBound,
    reference: Option<f64>,
    skip: usize,
) -> Result<RateSeries> {
    let (reference, kind) = match reference {
        Some(v) => (v, ReferenceKind::ClosedForm),
        None => (reference_min(f, m)?.value, ReferenceKind::GridEstimate),
    };
    let rs: Vec<u32> = (lo..=hi).collect();
    let values = map_orders(&rs, |r| match bound {
        RateBound::Upper => upper::ub(f, m, r).map(|u| u.value),
        RateBound::Pushforward => upper::ub_pushforward(f, m, r),
    })?;
    let pts: Vec<(u32, f64)> = rs.into_iter().zip(values).collect();
    let label = format!("{:?} bound of {} ({})", bound, f, measure_label(m));
    Ok(RateSeries::new(&label, &pts, reference, kind, skip))
}

pub fn measure_label(m: &MeasureSpec) -> String {
    match m {
        MeasureSpec::BoxJacobi { weights } => {
            let w = &weights[0];
            let name = if weights.iter().any(|v| v != w) {
                "jacobi-mixed".to_string()
            } else if (w.lambda + 0.5).abs() < 1e-15 && (w.lambda_prime + 0.5).abs() < 1e-15 {
                "chebyshev".to_string()
            } else if w.lambda == 0.0 && w.lambda_prime == 0.0 {
                "lebesgue".to_string()
            } else {
                format!("jacobi({}, {})", w.lambda, w.lambda_prime)
            };
            format!("box({})-{}", weights.len(), name)
        }
        MeasureSpec::BallWeight { n, lambda } => format!("ball({n}) weight (1-|x|^2)^{lambda}"),
        MeasureSpec::SimplexLebesgue { n } => format!("simplex({n})"),
        MeasureSpec::SphereUniform { n } => format!("sphere({n})"),
    }
}

/// Gegenbauer polynomial for the weight `(1−t²)^{(n−3)/2}`, scaled so `𝒢_k(1) = 1`.
pub fn gegenbauer_normalized(n: usize, k: u32) -> Result<Polynomial> {
    if n < 3 {
        return Err(Error::InvalidParameter("the opt program needs n >= 3".into()));
    }
    let mu = (n as f64 - 2.0) / 2.0;
    let t = Polynomial::variable(1, 0);
    let mut prev = Polynomial::constant(1, 1.0);
    let mut cur = t.scale(2.0 * mu);
    if k == 0 {
        return Ok(prev);
    }
    for j in 1..k {
        let j = j as f64;
        let next = t
            .multiply(&cur)?
            .scale(2.0 * (j + mu) / (j + 1.0))
            .sub(&prev.scale((j + 2.0 * mu - 1.0) / (j + 1.0)))?;
        prev = cur;
        cur = next;
    }
    let at1 = cur.evaluate(&[1.0])?;
    Ok(cur.scale(1.0 / at1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PkmReport {
    pub n: usize,
    pub d: u32,
    pub r: u32,
    pub opt: f64,
    pub g: String,
    /// `λ_k = ∫ 𝒢_k q w dt` for `k = 1..=d`.
    pub lambdas: Vec<f64>,
}

/// `opt = ub(g, [−1,1], w)_r` with `g = d − Σ_{k=1}^d 𝒢_k`.
pub fn pkm(n: usize, d: u32, r: u32) -> Result<PkmReport> {
    if d == 0 {
        return Err(Error::InvalidParameter("the opt program needs d >= 1".into()));
    }
    let gk = (1..=d).map(|k| gegenbauer_normalized(n, k)).collect::<Result<Vec<_>>>()?;
    let mut g = Polynomial::constant(1, d as f64);
    for p in &gk {
        g = g.sub(p)?;
    }
    let m = MeasureSpec::BoxJacobi {
        weights: vec![JacobiWeight::symmetric((n as f64 - 3.0) / 2.0)?],
    };
    let res = upper::ub(&g, &m, r)?;
    let cub = cubature(&m, 2 * r + d)?;
    let mut lambdas = vec![0.0; gk.len()];
    for i in 0..cub.len() {
        let x = cub.node(i);
        let q = res.density_at(x)?;
        for (l, p) in lambdas.iter_mut().zip(&gk) {
            *l += cub.weights[i] * p.eval_unchecked(x) * q;
        }
    }
    Ok(PkmReport {
        n,
        d,
        r,
        opt: res.value,
        g: g.to_string(),
        lambdas,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

/// Largest graph accepted by the brute-force oracle.
pub const MAX_GRAPH: usize = 12;

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 || n > MAX_GRAPH {
            return Err(Error::InvalidParameter(format!("graphs need 1..={MAX_GRAPH} vertices")));
        }
        let mut seen = Vec::new();
        for &(u, v) in &edges {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidParameter(format!("bad edge ({}, {})", u + 1, v + 1)));
            }
            let key = (u.min(v), u.max(v));
            if !seen.contains(&key) {
                seen.push(key);
            }
        }
        Ok(Graph { n, edges: seen })
    }

    /// One `u v` pair per line, 1-based; `#` starts a comment. A line with a
    /// single number declares an isolated vertex count (`n`).
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut n = 0;
        let mut edges = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    pos: ln + 1,
                    msg: format!("expected integers, got '{line}'"),
                })?;
            match nums.as_slice() {
                [k] => n = n.max(*k),
                [u, v] if *u >= 1 && *v >= 1 => {
                    n = n.max(*u).max(*v);
                    edges.push((u - 1, v - 1));
                }
                _ => {
                    return Err(Error::Parse {
                        pos: ln + 1,
                        msg: format!("expected 'u v' with 1-based vertices, got '{line}'"),
                    })
                }
            }
        }
        Graph::new(n, edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
    }

    /// Independence number by enumeration.
    pub fn alpha(&self) -> usize {
        let adj: Vec<u32> = (0..self.n)
            .map(|i| {
                self.edges
                    .iter()
                    .filter_map(|&(u, v)| match (u == i, v == i) {
                        (true, _) => Some(1 << v),
                        (_, true) => Some(1 << u),
                        _ => None,
                    })
                    .fold(0u32, |a, b| a | b)
            })
            .collect();
        (0u32..(1 << self.n))
            .filter(|&s| (0..self.n).all(|i| s >> i & 1 == 0 || adj[i] & s == 0))
            .map(|s| s.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    /// `xᵀ(I + A)x` with `x_n = 1 − Σ_{i<n} y_i`, as a polynomial in `y`.
    pub fn reduced_polynomial(&self) -> Result<Polynomial> {
        let k = self.n - 1;
        if k == 0 {
            return Err(Error::InvalidParameter("a single vertex has no reduced form".into()));
        }
        let mut xs: Vec<Polynomial> = (0..k).map(|i| Polynomial::variable(k, i)).collect();
        let sum = xs.iter().try_fold(Polynomial::zero(k), |a, p| a.add(p))?;
        xs.push(Polynomial::constant(k, 1.0).sub(&sum)?);
        let mut f = Polynomial::zero(k);
        for x in &xs {
            f = f.add(&x.multiply(x)?)?;
        }
        for &(u, v) in &self.edges {
            f = f.add(&xs[u].multiply(&xs[v])?.scale(2.0))?;
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub n: usize,
    pub edges: usize,
    pub alpha: usize,
    pub fmin: f64,
    pub lb: f64,
    pub lb_order: u32,
    pub lb_kind: LbKind,
    pub lb_status: LbStatus,
    pub ub: f64,
    pub ub_order: u32,
    /// `⌈1/ub⌉ ≤ α ≤ ⌊1/lb⌋`.
    pub alpha_lower: usize,
    pub alpha_upper: Option<usize>,
    pub brackets: bool,
}

/// Bounds on `1/α(G) = min_{Δ} xᵀ(I+A)x` from both hierarchies, in the
/// reduced coordinates on the full-dimensional simplex of dimension `n − 1`.
pub fn stability(g: &Graph, lb_order: u32, ub_order: u32, kind: LbKind) -> Result<StabilityReport> {
    let alpha = g.alpha();
    let fmin = 1.0 / alpha as f64;
    let (lb, lb_status, ub) = if g.n == 1 {
        (1.0, LbStatus::Verified, 1.0)
    } else {
        let f = g.reduced_polynomial()?;
        let set = builtin_set("simplex", g.n - 1)?;
        let l = lower::lb(&f, &set, lb_order, kind)?;
        let u = upper::ub(&f, &MeasureSpec::simplex(g.n - 1)?, ub_order)?;
        (l.value, l.status, u.value)
    };
    let alpha_lower = (1.0 / ub - 1e-9).ceil().max(1.0) as usize;
    let alpha_upper = (lb > 0.0).then(|| (1.0 / lb + 1e-9).floor() as usize);
    Ok(StabilityReport {
        n: g.n,
        edges: g.edges.len(),
        alpha,
        fmin,
        lb,
        lb_order,
        lb_kind: kind,
        lb_status,
        ub,
        ub_order,
        alpha_lower,
        alpha_upper,
        brackets: lb <= fmin + 1e-7 && ub >= fmin - 1e-7,
    })
}

/// The optimal upper-bound density sampled on a square grid.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    pub ub: UpperBoundResult,
    pub scale: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major, `values[j * xs.len() + i] = σ(xs[i], ys[j])`; zero outside the set.
    pub values: Vec<f64>,
    /// Riemann sum of `∫ σ dμ` for uniform measures.
    pub riemann_mass: Option<f64>,
}

fn uniform_area(m: &MeasureSpec) -> Option<f64> {
    match m {
        MeasureSpec::BoxJacobi { weights } if weights.iter().all(|w| w.lambda == 0.0 && w.lambda_prime == 0.0) => {
            Some(2f64.powi(weights.len() as i32))
        }
        MeasureSpec::BallWeight { n: 2, lambda } if *lambda == 0.0 => Some(std::f64::consts::PI),
        MeasureSpec::SimplexLebesgue { n: 2 } => Some(0.5),
        _ => None,
    }
}

/// Samples `σ` for `f(s·y)` with `y ~ μ`; coordinates are reported as `x = s·y`.
pub fn density_grid(f: &Polynomial, m: &MeasureSpec, r: u32, scale: f64, npts: usize) -> Result<DensityGrid> {
    if m.nvars() != 2 || matches!(m, MeasureSpec::SphereUniform { .. }) {
        return Err(Error::InvalidParameter("density grids need a full-dimensional 2D measure".into()));
    }
    if !(scale > 0.0) || npts == 0 {
        return Err(Error::InvalidParameter("scale and grid size must be positive".into()));
    }
    let fs = f.affine_substitute(&[scale, scale], &[0.0, 0.0])?;
    let ub = upper::ub(&fs, m, r)?;
    let (lo, hi) = match m {
        MeasureSpec::SimplexLebesgue { .. } => (0.0, 1.0),
        _ => (-1.0, 1.0),
    };
    let h = (hi - lo) / npts as f64;
    let ys_std: Vec<f64> = (0..npts).map(|i| lo + (i as f64 + 0.5) * h).collect();
    let mut values = Vec::with_capacity(npts * npts);
    let mut sum = 0.0;
    for &y in &ys_std {
        for &x in &ys_std {
            let v = if m.contains(&[x, y], 0.0) { ub.density_at(&[x, y])? } else { 0.0 };
            sum += v;
            values.push(v);
        }
    }
    let riemann_mass = uniform_area(m).map(|a| sum * h * h / a);
    let coords: Vec<f64> = ys_std.iter().map(|v| v * scale).collect();
    Ok(DensityGrid {
        ub,
        scale,
        xs: coords.clone(),
        ys: coords,
        values,
        riemann_mass,
    })
}

impl DensityGrid {
    /// `σ` at a point in the reported coordinates.
    pub fn density_at(&self, x: &[f64]) -> Result<f64> {
        let y: Vec<f64> = x.iter().map(|v| v / self.scale).collect();
        self.ub.density_at(&y)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x1,x2,sigma\n");
        let nx = self.xs.len();
        for (j, y) in self.ys.iter().enumerate() {
            for (i, x) in self.xs.iter().enumerate() {
                let _ = writeln!(s, "{},{},{}", fmt12(*x), fmt12(*y), fmt12(self.values[j * nx + i]));
            }
        }
        s
    }
}

/// Motzkin on `[−2,2]²` with the uniform measure.
pub fn motzkin_density(r: u32, npts: usize) -> Result<DensityGrid> {
    density_grid(&crate::poly::motzkin(), &MeasureSpec::box_lebesgue(2), r, 2.0, npts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(-0.25), "-0.25");
        assert_eq!(fmt12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt12(1.0 / 3.0 * 1e-7), "3.33333333333e-8");
        assert_eq!(fmt12(123456789012345.0), "1.23456789012e14");
    }

    #[test]
    fn domains() {
        assert_eq!(parse_domain("box1-chebyshev", None).unwrap(), ("box".into(), 1, Some("chebyshev".into())));
        assert_eq!(parse_domain("sphere", Some(3)).unwrap().1, 3);
        assert!(parse_domain("ball", None).is_err());
        assert!(parse_domain("ball2", Some(3)).is_err());
        assert_eq!(parse_measure("box-jacobi:0.5", Some(2)).unwrap(), MeasureSpec::box_symmetric(2, 0.5).unwrap());
        assert_eq!(parse_measure("ball2", None).unwrap(), MeasureSpec::ball(2, 0.0).unwrap());
        assert!(parse_measure("torus2", None).is_err());
        assert_eq!(parse_r_range("8..64").unwrap(), (8, 64));
        assert_eq!(parse_r_range("3").unwrap(), (3, 3));
        assert!(parse_r_range("9..2").is_err());
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<(u32, f64)> = (1..=20).map(|r| (r, 1.0 / (r * r) as f64)).collect();
        let s = RateSeries::new("synthetic", &pts, 0.0, ReferenceKind::ClosedForm, 2);
        assert!((s.fitted_slope.unwrap() + 2.0).abs() < 1e-6);
        assert_eq!(s.fit_range, Some((3, 20)));
        let zero = RateSeries::new("zero", &[(1, 0.5), (2, 0.5), (3, 0.5)], 0.5, ReferenceKind::ClosedForm, 0);
        assert!(zero.fitted_slope.is_none() && zero.note.is_some());
        assert!(s.to_svg().starts_with("<svg"));
    }

    #[test]
    fn gegenbauer_at_one() {
        for n in 3..6 {
            for k in 0..6 {
                let g = gegenbauer_normalized(n, k).unwrap();
                assert!((g.evaluate(&[1.0]).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        // Legendre P2
        let p2 = gegenbauer_normalized(3, 2).unwrap();
        assert!((p2.evaluate(&[0.0]).unwrap() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn pkm_consistency() {
        let rep = pkm(3, 2, 6).unwrap();
        let sum: f64 = rep.lambdas.iter().map(|l| 1.0 - l).sum();
        assert!((sum - rep.opt).abs() < 1e-9, "{sum} vs {}", rep.opt);
        assert!(rep.opt > 0.0);
    }

    #[test]
    fn graphs() {
        assert_eq!(Graph::cycle(5).unwrap().alpha(), 2);
        assert_eq!(Graph::new(3, vec![]).unwrap().alpha(), 3);
        assert_eq!(Graph::parse_edge_list("1 2\n").unwrap().alpha(), 1);
        assert_eq!(Graph::parse_edge_list("# triangle\n1 2\n2 3\n3 1\n").unwrap().alpha(), 1);
        assert!(Graph::parse_edge_list("1 x\n").is_err());
        assert!(Graph::parse_edge_list("0 1\n").is_err());
        let k2 = Graph::parse_edge_list("1 2").unwrap().reduced_polynomial().unwrap();
        assert!(k2.max_coeff_diff(&Polynomial::constant(1, 1.0)).unwrap() < 1e-15);
    }

    #[test]
    fn constant_density() {
        let g = density_grid(&Polynomial::constant(2, 3.0), &MeasureSpec::box_lebesgue(2), 0, 1.0, 20).unwrap();
        assert!(g.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!((g.riemann_mass.unwrap() - 1.0).abs() < 1e-12);
    }
}
