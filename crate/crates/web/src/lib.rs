//! Browser demo: the optimal upper-bound density of a bivariate polynomial,
//! the error curve of a rate sweep, and roots of Jacobi polynomials.
//!
//! The plain functions are what the wrappers call; they also run natively
//! so the crate can be tested without a browser.

use soslab::lab::{self, RateBound};
use soslab::orthopoly::{self, JacobiWeight};
use soslab::poly::Polynomial;
use wasm_bindgen::prelude::*;

fn parse_f(f: &str, n: usize) -> Result<Polynomial, String> {
    match f.trim().to_ascii_lowercase().as_str() {
        "motzkin" => Ok(soslab::poly::motzkin()),
        _ => Polynomial::parse(f, n).map_err(|e| e.to_string()),
    }
}

/// Density samples on a `grid × grid` square, row-major from the bottom left.
#[wasm_bindgen]
pub struct Density {
    ub: f64,
    grid: usize,
    half_width: f64,
    values: Vec<f64>,
}

#[wasm_bindgen]
impl Density {
    #[wasm_bindgen(getter)]
    pub fn ub(&self) -> f64 {
        self.ub
    }

    #[wasm_bindgen(getter)]
    pub fn grid(&self) -> usize {
        self.grid
    }

    #[wasm_bindgen(getter, js_name = halfWidth)]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// `f` on `[−s, s]²` with the uniform measure.
pub fn density(f: &str, r: u32, scale: f64, grid: usize) -> Result<Density, String> {
    if r > 16 || grid > 400 {
        return Err("keep r <= 16 and grid <= 400 in the browser".into());
    }
    let p = parse_f(f, 2)?;
    let m = soslab::measures::MeasureSpec::box_lebesgue(2);
    let g = lab::density_grid(&p, &m, r, scale, grid).map_err(|e| e.to_string())?;
    Ok(Density {
        ub: g.ub.value,
        grid,
        half_width: scale,
        values: g.values,
    })
}

/// SVG log-log plot of `|ub_r − fmin|` for `x1 ↦ f` on a measure such as
/// `box1-chebyshev` or `sphere3`. A NaN `fmin` selects the grid estimate.
pub fn rate_svg(f: &str, measure: &str, lo: u32, hi: u32, fmin: f64) -> Result<String, String> {
    if hi > 64 || lo > hi {
        return Err("use 0 <= lo <= hi <= 64".into());
    }
    let m = lab::parse_measure(measure, None).map_err(|e| e.to_string())?;
    let p = parse_f(f, m.nvars())?;
    let reference = fmin.is_finite().then_some(fmin);
    let s = lab::rates(&p, &m, (lo, hi), RateBound::Upper, reference, 2).map_err(|e| e.to_string())?;
    Ok(s.to_svg())
}

/// Roots of the degree-`k` orthogonal polynomial for `(1−x)^λ (1+x)^λ'`.
pub fn jacobi_roots(lambda: f64, lambda_prime: f64, k: usize) -> Result<Vec<f64>, String> {
    if k == 0 || k > 500 {
        return Err("use 1 <= k <= 500".into());
    }
    let w = JacobiWeight::new(lambda, lambda_prime).map_err(|e| e.to_string())?;
    orthopoly::roots(w, k).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = density)]
pub fn density_js(f: &str, r: u32, scale: f64, grid: usize) -> Result<Density, JsError> {
    density(f, r, scale, grid).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = rateSvg)]
pub fn rate_svg_js(f: &str, measure: &str, lo: u32, hi: u32, fmin: f64) -> Result<String, JsError> {
    rate_svg(f, measure, lo, hi, fmin).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = jacobiRoots)]
pub fn jacobi_roots_js(lambda: f64, lambda_prime: f64, k: usize) -> Result<Vec<f64>, JsError> {
    jacobi_roots(lambda, lambda_prime, k).map_err(|e| JsError::new(&e))
}
