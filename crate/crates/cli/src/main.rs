use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use soslab::lab::{self, fmt12, Graph, RateBound, RateSeries, ReferenceKind};
use soslab::lower::{self, LbKind, LbStatus, SosVerdict};
use soslab::measures::MeasureSpec;
use soslab::poly::{motzkin, robinson, Polynomial};
use soslab::{upper, Error};

#[derive(Parser, Debug)]
#[command(name = "soslab", version, about = "Sum-of-squares upper and lower bounds for polynomial minimization")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Upper bound ub_r from the smallest eigenvalue of the operator matrix
    Upper(BoundArgs),
    /// Lower bound from a Putinar or Schmüdgen certificate
    Lower(LowerArgs),
    /// Push-forward upper bound ub#_r
    Push(BoundArgs),
    /// Decide whether f is a sum of squares
    Certify(CertifyArgs),
    /// Sweep r, fit the log-log slope of the error
    Rates(RatesArgs),
    /// The univariate "opt" program with Gegenbauer kernel
    Pkm(PkmArgs),
    /// Bounds on 1/α(G) over the simplex
    Stability(StabilityArgs),
    /// Optimal upper-bound density on a 2D grid
    Density(DensityArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct PolyArgs {
    /// Polynomial in x1..xn, or `motzkin` / `robinson`
    #[arg(long = "f")]
    f: String,
    /// Number of variables (default: largest index in --f)
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct OutArgs {
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Serialize)]
struct BoundArgs {
    #[command(flatten)]
    poly: PolyArgs,
    /// Measure, e.g. box1-chebyshev, box2-lebesgue, box-jacobi:0.5, ball2, simplex3, sphere3
    #[arg(long, visible_alias = "set", default_value = "box-chebyshev")]
    measure: String,
    /// Order r or an inclusive range lo..hi
    #[arg(long, default_value = "4")]
    r: String,
    /// Minimize f(s·y) over the standard domain, i.e. f over the set scaled by s
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Putinar,
    Schmudgen,
}

impl From<Kind> for LbKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Putinar => LbKind::Putinar,
            Kind::Schmudgen => LbKind::Schmudgen,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct LowerArgs {
    #[command(flatten)]
    poly: PolyArgs,
    /// box, ball, simplex or sphere (dimension suffix optional)
    #[arg(long, default_value = "box")]
    set: String,
    #[arg(long, default_value = "2")]
    r: String,
    #[arg(long, value_enum, default_value_t = Kind::Putinar)]
    kind: Kind,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Export the certificate of the last order as JSON
    #[arg(long)]
    certificate: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CertifyArgs {
    #[command(flatten)]
    poly: PolyArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum BoundChoice {
    Upper,
    Push,
}

#[derive(Args, Debug, Clone, Serialize)]
struct RatesArgs {
    #[command(flatten)]
    poly: PolyArgs,
    #[arg(long, visible_alias = "set", default_value = "box-chebyshev")]
    measure: String,
    #[arg(long, default_value = "4..32")]
    r: String,
    #[arg(long, value_enum, default_value_t = BoundChoice::Upper)]
    bound: BoundChoice,
    /// Known minimum; otherwise a grid estimate is used
    #[arg(long, allow_negative_numbers = true)]
    fmin: Option<f64>,
    /// Smallest orders left out of the slope fit
    #[arg(long, default_value_t = 2)]
    skip: usize,
    /// Log-log plot of the errors
    #[arg(long)]
    plot: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct PkmArgs {
    /// Ambient dimension of the sphere (n ≥ 3)
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Number of Gegenbauer terms
    #[arg(long, default_value_t = 2)]
    d: u32,
    #[arg(long, default_value = "8..64")]
    r: String,
    #[arg(long, default_value_t = 2)]
    skip: usize,
    #[arg(long)]
    plot: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct StabilityArgs {
    /// Edge list, one `u v` pair per line, 1-based
    #[arg(long)]
    graph: PathBuf,
    /// Lower-bound order
    #[arg(long, default_value_t = 3)]
    r: u32,
    /// Upper-bound order
    #[arg(long, default_value_t = 10)]
    ub_r: u32,
    #[arg(long, value_enum, default_value_t = Kind::Schmudgen)]
    kind: Kind,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct DensityArgs {
    #[command(flatten)]
    poly: PolyArgs,
    /// 2D measure; defaults to the uniform box
    #[arg(long, visible_alias = "set", default_value = "box2-lebesgue")]
    measure: String,
    #[arg(long, default_value_t = 8)]
    r: u32,
    /// Domain scale (Motzkin defaults to 2, i.e. [−2,2]²)
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Heatmap (downsampled to at most 100×100 cells)
    #[arg(long)]
    plot: Option<PathBuf>,
    /// CSV of the grid; the JSON summary goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit code 1 for bad input, 2 for numerical trouble.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) | Error::NonFinite | Error::NotPositiveDefinite { .. } | Error::Indefinite { .. } => 2,
            _ => 1,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 1, msg: msg.into() }
}

fn numerical(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

type Res<T> = Result<T, Failure>;

fn infer_nvars(s: &str) -> usize {
    let b = s.as_bytes();
    let mut best = 1;
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'x' {
            let j = b[i + 1..].iter().take_while(|c| c.is_ascii_digit()).count();
            if let Ok(k) = s[i + 1..i + 1 + j].parse::<usize>() {
                best = best.max(k);
            }
            i += j;
        }
        i += 1;
    }
    best
}

fn parse_poly(a: &PolyArgs) -> Res<Polynomial> {
    let named = match a.f.trim().to_ascii_lowercase().as_str() {
        "motzkin" => Some(motzkin()),
        "robinson" => Some(robinson()),
        _ => None,
    };
    if let Some(p) = named {
        if let Some(n) = a.n {
            if n != p.nvars() {
                return Err(usage(format!("{} has {} variables, --n is {n}", a.f, p.nvars())));
            }
        }
        return Ok(p);
    }
    let n = a.n.unwrap_or_else(|| infer_nvars(&a.f));
    Ok(Polynomial::parse(&a.f, n)?)
}

fn scaled(f: &Polynomial, s: f64) -> Res<Polynomial> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(usage("--scale must be positive"));
    }
    if s == 1.0 {
        return Ok(f.clone());
    }
    let n = f.nvars();
    Ok(f.affine_substitute(&vec![s; n], &vec![0.0; n])?)
}

fn orders(r: &str) -> Res<Vec<u32>> {
    let (lo, hi) = lab::parse_r_range(r)?;
    Ok((lo..=hi).collect())
}

fn config<T: Serialize>(cmd: &str, args: &T) -> Value {
    let mut v = serde_json::to_value(args).unwrap_or(Value::Null);
    if let Value::Object(o) = &mut v {
        o.insert("command".into(), json!(cmd));
    }
    v
}

fn emit(out: &OutArgs, mut report: Value, csv: Option<String>) -> Res<()> {
    lab::round_json(&mut report);
    let text = match (out.format, csv) {
        (Format::Csv, Some(c)) => c,
        (Format::Csv, None) => return Err(usage("this command has no CSV form")),
        (Format::Json, _) => serde_json::to_string_pretty(&report).expect("reports serialize") + "\n",
    };
    match &out.out {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(p: &PathBuf, text: &str) -> Res<()> {
    std::fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))
}

fn series_csv(rows: &[(u32, f64)]) -> String {
    let mut s = String::from("r,value\n");
    for (r, v) in rows {
        s.push_str(&format!("{r},{}\n", fmt12(*v)));
    }
    s
}

fn cmd_bound(a: &BoundArgs, push: bool) -> Res<()> {
    let f = parse_poly(&a.poly)?;
    let m = lab::parse_measure(&a.measure, Some(f.nvars()))?;
    let fs = scaled(&f, a.scale)?;
    let t = Instant::now();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for r in orders(&a.r)? {
        let t0 = Instant::now();
        if push {
            let v = upper::ub_pushforward(&fs, &m, r)?;
            rows.push((r, v));
            entries.push(json!({ "r": r, "value": v, "seconds": t0.elapsed().as_secs_f64() }));
        } else {
            let u = upper::ub(&fs, &m, r)?;
            rows.push((r, u.value));
            entries.push(json!({
                "r": r,
                "value": u.value,
                "seconds": t0.elapsed().as_secs_f64(),
                "certificate": {
                    "kind": "density",
                    "basis_size": u.basis.len(),
                    "density_mass": u.density_mass(),
                    "eigen_residual": u.residual,
                },
            }));
        }
    }
    let last = rows.last().map(|r| r.1);
    let report = json!({
        "config": config(if push { "push" } else { "upper" }, a),
        "measure": lab::measure_label(&m),
        "polynomial": f.to_string(),
        "value": last,
        "results": entries,
        "seconds": t.elapsed().as_secs_f64(),
    });
    emit(&a.out, report, Some(series_csv(&rows)))
}

fn cmd_lower(a: &LowerArgs) -> Res<()> {
    let f = parse_poly(&a.poly)?;
    let set = lab::parse_set(&a.set, Some(f.nvars()))?;
    let fs = scaled(&f, a.scale)?;
    let t = Instant::now();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut unverified = Vec::new();
    let mut last_cert = None;
    for r in orders(&a.r)? {
        let t0 = Instant::now();
        let res = lower::lb(&fs, &set, r, a.kind.into())?;
        let verify = lower::verify_certificate(&res, &fs, &set);
        if res.status != LbStatus::Verified {
            unverified.push(r);
        }
        rows.push((r, res.value));
        entries.push(json!({
            "r": r,
            "value": if res.value.is_finite() { json!(res.value) } else { Value::Null },
            "status": res.status,
            "sdp_status": res.sdp_status,
            "iterations": res.iterations,
            "seconds": t0.elapsed().as_secs_f64(),
            "certificate": {
                "verified": res.verified,
                "gram_blocks": res.certificate.as_ref().map(|c| c.grams.len()),
                "equality_multipliers": res.certificate.as_ref().map(|c| c.multipliers.len()),
                "coefficient_error": verify.coeff_error,
                "min_gram_eigenvalue": verify.min_gram_eig,
            },
            "diagnostics": res.diagnostics,
        }));
        last_cert = res.certificate;
    }
    if let (Some(p), Some(c)) = (&a.certificate, &last_cert) {
        write_file(p, &(c.to_json() + "\n"))?;
    }
    let report = json!({
        "config": config("lower", a),
        "set": set.name,
        "polynomial": f.to_string(),
        "value": rows.last().map(|r| r.1).filter(|v| v.is_finite()),
        "results": entries,
        "seconds": t.elapsed().as_secs_f64(),
    });
    emit(&a.out, report, Some(series_csv(&rows)))?;
    if unverified.is_empty() {
        Ok(())
    } else {
        Err(numerical(format!("no verified bound at r = {unverified:?}")))
    }
}

fn cmd_certify(a: &CertifyArgs) -> Res<()> {
    let f = parse_poly(&a.poly)?;
    let t = Instant::now();
    let res = lower::certify_sos(&f)?;
    let report = json!({
        "config": config("certify", a),
        "polynomial": f.to_string(),
        "is_sos": res.is_sos,
        "verdict": res.verdict,
        "t_star": res.t_star,
        "message": res.message,
        "gram": res.gram,
        "dual": res.dual,
        "seconds": t.elapsed().as_secs_f64(),
    });
    emit(&a.out, report, None)?;
    if res.verdict == SosVerdict::Unknown {
        return Err(numerical("SOS test was inconclusive"));
    }
    Ok(())
}

fn series_report(series: &RateSeries) -> Value {
    serde_json::to_value(series).expect("series serialize")
}

fn cmd_rates(a: &RatesArgs) -> Res<()> {
    let f = parse_poly(&a.poly)?;
    let m = lab::parse_measure(&a.measure, Some(f.nvars()))?;
    let range = lab::parse_r_range(&a.r)?;
    let bound = match a.bound {
        BoundChoice::Upper => RateBound::Upper,
        BoundChoice::Push => RateBound::Pushforward,
    };
    let t = Instant::now();
    let series = lab::rates(&f, &m, range, bound, a.fmin, a.skip)?;
    if let Some(p) = &a.plot {
        write_file(p, &series.to_svg())?;
    }
    let report = json!({
        "config": config("rates", a),
        "series": series_report(&series),
        "seconds": t.elapsed().as_secs_f64(),
    });
    emit(&a.out, report, Some(series.to_csv()))
}

fn cmd_pkm(a: &PkmArgs) -> Res<()> {
    let rs = orders(&a.r)?;
    let t = Instant::now();
    let reps = rs.iter().map(|&r| lab::pkm(a.n, a.d, r)).collect::<soslab::Result<Vec<_>>>()?;
    let pts: Vec<(u32, f64)> = reps.iter().map(|p| (p.r, p.opt)).collect();
    let series = RateSeries::new(
        &format!("opt program, n = {}, d = {}", a.n, a.d),
        &pts,
        0.0,
        ReferenceKind::ClosedForm,
        a.skip,
    );
    if let Some(p) = &a.plot {
        write_file(p, &series.to_svg())?;
    }
    let report = json!({
        "config": config("pkm", a),
        "g": reps.first().map(|p| p.g.clone()),
        "results": reps.iter().map(|p| json!({ "r": p.r, "opt": p.opt, "lambdas": p.lambdas })).collect::<Vec<_>>(),
        "value": reps.last().map(|p| p.opt),
        "fitted_slope": series.fitted_slope,
        "fit_range": series.fit_range,
        "seconds": t.elapsed().as_secs_f64(),
    });
    emit(&a.out, report, Some(series.to_csv()))
}

fn cmd_stability(a: &StabilityArgs) -> Res<()> {
    let text = std::fs::read_to_string(&a.graph).map_err(|e| usage(format!("cannot read {}: {e}", a.graph.display())))?;
    let g = Graph::parse_edge_list(&text)?;
    let t = Instant::now();
    let rep = lab::stability(&g, a.r, a.ub_r, a.kind.into())?;
    let ok = rep.brackets && rep.lb_status == LbStatus::Verified;
    let report = json!({
        "config": config("stability", a),
        "report": rep,
        "seconds": t.elapsed().as_secs_f64(),
    });
    emit(&a.out, report, None)?;
    if ok {
        Ok(())
    } else {
        Err(numerical("the bounds do not bracket 1/alpha or the lower bound is unverified"))
    }
}

fn heatmap_svg(grid: &lab::DensityGrid) -> String {
    let n = grid.xs.len();
    let step = n.div_ceil(100).max(1);
    let cells = n.div_ceil(step);
    let px = 4.0;
    let size = cells as f64 * px;
    let vmax = grid.max().max(1e-300);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    );
    for cj in 0..cells {
        for ci in 0..cells {
            let v = grid.values[(cj * step) * n + ci * step] / vmax;
            let c = (255.0 * (1.0 - v.clamp(0.0, 1.0))) as u8;
            // y grows upward in the plot
            let y = (cells - 1 - cj) as f64 * px;
            s.push_str(&format!(
                "<rect x=\"{}\" y=\"{y}\" width=\"{px}\" height=\"{px}\" fill=\"rgb(255,{c},{c})\"/>\n",
                ci as f64 * px
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn cmd_density(a: &DensityArgs) -> Res<()> {
    let f = parse_poly(&a.poly)?;
    let is_motzkin = f == motzkin();
    let m = lab::parse_measure(&a.measure, Some(f.nvars()))?;
    if m.nvars() != 2 || matches!(m, MeasureSpec::SphereUniform { .. }) {
        return Err(usage("density needs a full-dimensional 2D measure"));
    }
    let scale = a.scale.unwrap_or(if is_motzkin { 2.0 } else { 1.0 });
    let t = Instant::now();
    let grid = lab::density_grid(&f, &m, a.r, scale, a.grid)?;
    if let Some(p) = &a.out {
        write_file(p, &grid.to_csv())?;
    }
    if let Some(p) = &a.plot {
        write_file(p, &heatmap_svg(&grid))?;
    }
    let (imax, vmax) = grid
        .values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let nx = grid.xs.len();
    let mut peaks = Value::Null;
    let mut failure = None;
    if is_motzkin {
        let center = grid.density_at(&[0.0, 0.0])?;
        let corners = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]
            .iter()
            .map(|x| grid.density_at(x))
            .collect::<soslab::Result<Vec<_>>>()?;
        let ok = corners.iter().all(|&c| c > center);
        if !ok {
            failure = Some(numerical("density does not peak at the Motzkin minimizers"));
        }
        peaks = json!({ "sigma_origin": center, "sigma_minimizers": corners, "peaks_at_minimizers": ok });
    }
    if let Some(mass) = grid.riemann_mass {
        if (mass - 1.0).abs() > 1e-2 && failure.is_none() {
            failure = Some(numerical(format!("Riemann mass {mass} differs from 1 by more than 1e-2")));
        }
    }
    let mut report = json!({
        "config": config("density", a),
        "resolved_scale": scale,
        "measure": lab::measure_label(&m),
        "polynomial": f.to_string(),
        "ub": grid.ub.value,
        "order": grid.ub.order,
        "grid": a.grid,
        "max": { "x1": grid.xs[imax % nx], "x2": grid.ys[imax / nx], "sigma": vmax },
        "riemann_mass": grid.riemann_mass,
        "density_mass": grid.ub.density_mass(),
        "motzkin_check": peaks,
        "seconds": t.elapsed().as_secs_f64(),
    });
    lab::round_json(&mut report);
    println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match &cli.cmd {
        Cmd::Upper(a) => cmd_bound(a, false),
        Cmd::Push(a) => cmd_bound(a, true),
        Cmd::Lower(a) => cmd_lower(a),
        Cmd::Certify(a) => cmd_certify(a),
        Cmd::Rates(a) => cmd_rates(a),
        Cmd::Pkm(a) => cmd_pkm(a),
        Cmd::Stability(a) => cmd_stability(a),
        Cmd::Density(a) => cmd_density(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("soslab: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
