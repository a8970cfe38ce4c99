//! Sparse multivariate polynomials with real coefficients.
//!
//! Terms live in a [`BTreeMap`] keyed by [`Exponent`], whose ordering is
//! graded lexicographic: total degree first, then `x1 > x2 > ... > xn`.
//! Every iteration over a polynomial (printing, matrix assembly) follows
//! that order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A multi-index `α ∈ ℕⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(powers: Vec<u32>) -> Self {
        Exponent(powers)
    }

    pub fn zero(nvars: usize) -> Self {
        Exponent(vec![0; nvars])
    }

    /// The exponent of the single variable `x_{var+1}`.
    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut p = vec![0; nvars];
        p[var] = 1;
        Exponent(p)
    }

    pub fn powers(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    /// `|α| = Σ α_i`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// True when every entry is even.
    pub fn is_even(&self) -> bool {
        self.0.iter().all(|p| p % 2 == 0)
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponents in `ℕⁿ_d` (total degree at most `d`) in graded-lex order.
pub fn exponents_up_to(nvars: usize, d: u32) -> Vec<Exponent> {
    let mut out = Vec::new();
    for deg in 0..=d {
        exponents_of_degree(nvars, deg, &mut out);
    }
    out
}

/// Appends all exponents of total degree exactly `d`, in graded-lex order.
pub fn exponents_of_degree(nvars: usize, d: u32, out: &mut Vec<Exponent>) {
    fn rec(prefix: &mut Vec<u32>, nvars: usize, remaining: u32, out: &mut Vec<Exponent>) {
        if prefix.len() + 1 == nvars {
            prefix.push(remaining);
            out.push(Exponent(prefix.clone()));
            prefix.pop();
            return;
        }
        for p in (0..=remaining).rev() {
            prefix.push(p);
            rec(prefix, nvars, remaining - p, out);
            prefix.pop();
        }
    }
    if nvars == 0 {
        if d == 0 {
            out.push(Exponent(Vec::new()));
        }
        return;
    }
    rec(&mut Vec::with_capacity(nvars), nvars, d, out);
}

/// A sparse polynomial `Σ_α f_α x^α` in `nvars` variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Exponent, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Exponent::zero(nvars), c);
        p
    }

    /// The coordinate polynomial `x_{var+1}` (0-based `var`).
    pub fn variable(nvars: usize, var: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Exponent::unit(nvars, var), 1.0);
        p
    }

    pub fn monomial(exp: Exponent, coeff: f64) -> Self {
        let mut p = Self::zero(exp.nvars());
        p.add_term(exp, coeff);
        p
    }

    /// Builds a polynomial from `(powers, coefficient)` pairs; repeated
    /// exponents accumulate.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Self::zero(nvars);
        for (powers, c) in terms {
            if powers.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: powers.len(),
                });
            }
            p.add_term(Exponent(powers), c);
        }
        Ok(p)
    }

    /// Adds `c·x^exp`, dropping the term if it cancels to zero.
    pub fn add_term(&mut self, exp: Exponent, c: f64) {
        debug_assert_eq!(exp.nvars(), self.nvars);
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exp);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = *o.get() + c;
                if v == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> {
        self.terms.iter().map(|(e, c)| (e, *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exp: &Exponent) -> f64 {
        self.terms.get(exp).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Exponent::degree).max().unwrap_or(0)
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn check_same(&self, other: &Polynomial) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    /// Evaluation without the length check; `point` must have `nvars` entries.
    pub fn eval_unchecked(&self, point: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (exp, c) in &self.terms {
            let mut t = *c;
            for (x, &p) in point.iter().zip(exp.powers()) {
                if p > 0 {
                    t *= x.powi(p as i32);
                }
            }
            sum += t;
        }
        sum
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        let mut out = Self::zero(self.nvars);
        if c == 0.0 {
            return out;
        }
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    /// `self + c` for a scalar `c`.
    pub fn add_constant(&self, c: f64) -> Polynomial {
        let mut out = self.clone();
        out.add_term(Exponent::zero(self.nvars), c);
        out
    }

    pub fn multiply(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_same(other)?;
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.nvars, 1.0);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.multiply(&base).expect("same nvars");
            }
            e >>= 1;
            if e > 0 {
                base = base.multiply(&base).expect("same nvars");
            }
        }
        acc
    }

    /// Substitutes `x_i ↦ images[i]` (all images share one variable count).
    pub fn substitute(&self, images: &[Polynomial]) -> Result<Polynomial> {
        if images.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: images.len(),
            });
        }
        let target = images.first().map_or(0, Polynomial::nvars);
        if let Some(bad) = images.iter().find(|p| p.nvars != target) {
            return Err(Error::DimensionMismatch {
                expected: target,
                found: bad.nvars,
            });
        }
        let max_pow: Vec<u32> = (0..self.nvars)
            .map(|i| self.terms.keys().map(|e| e.0[i]).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<Polynomial>> = images
            .iter()
            .zip(&max_pow)
            .map(|(img, &m)| {
                let mut v = vec![Polynomial::constant(target, 1.0)];
                for k in 1..=m as usize {
                    let next = v[k - 1].multiply(img).expect("same nvars");
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Polynomial::zero(target);
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(target, *c);
            for (i, &p) in e.0.iter().enumerate() {
                if p > 0 {
                    t = t.multiply(&powers[i][p as usize])?;
                }
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    /// Coordinatewise affine substitution `x_i ↦ scale_i·x_i + shift_i`.
    pub fn affine_substitute(&self, scale: &[f64], shift: &[f64]) -> Result<Polynomial> {
        if scale.len() != self.nvars || shift.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: scale.len().min(shift.len()),
            });
        }
        let images: Vec<Polynomial> = (0..self.nvars)
            .map(|i| {
                Polynomial::variable(self.nvars, i)
                    .scale(scale[i])
                    .add_constant(shift[i])
            })
            .collect();
        self.substitute(&images)
    }

    /// Composition `s ∘ f` for a univariate `s`, expanded by Horner's rule.
    pub fn compose_univariate(s: &Polynomial, f: &Polynomial) -> Result<Polynomial> {
        if s.nvars != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: s.nvars,
            });
        }
        let deg = s.degree();
        let mut acc = Polynomial::zero(f.nvars);
        for k in (0..=deg).rev() {
            acc = acc.multiply(f)?;
            acc = acc.add_constant(s.coeff(&Exponent(vec![k])));
        }
        Ok(acc)
    }

    /// Largest coefficient difference against `other`.
    pub fn max_coeff_diff(&self, other: &Polynomial) -> Result<f64> {
        Ok(self.sub(other)?.max_abs_coeff())
    }

    /// Parses the text grammar: terms joined by `+`/`-`, each term `c`, `c*m`
    /// or `m`, where `m` is `x<i>[^<k>]` factors joined by `*` (1-based `i`).
    pub fn parse(text: &str, nvars: usize) -> Result<Polynomial> {
        Parser::new(text, nvars).parse()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (exp, &c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
            if k == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mono: Vec<String> = exp
                .powers()
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(i, &p)| {
                    if p == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, p)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{mag:?}")?;
            } else if mag == 1.0 {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{mag:?}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, nvars: usize) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            nvars,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Polynomial> {
        let mut poly = Polynomial::zero(self.nvars);
        let mut first = true;
        loop {
            let mut sign = 1.0;
            match self.peek() {
                None if first => return self.err("empty polynomial"),
                None => return self.err("expected a term after operator"),
                Some(b'+') => {
                    self.pos += 1;
                }
                Some(b'-') => {
                    sign = -1.0;
                    self.pos += 1;
                }
                Some(_) if first => {}
                Some(c) => return self.err(format!("expected '+' or '-', found '{}'", c as char)),
            }
            first = false;
            let (exp, c) = self.term()?;
            poly.add_term(exp, sign * c);
            if self.peek().is_none() {
                return Ok(poly);
            }
        }
    }

    fn term(&mut self) -> Result<(Exponent, f64)> {
        let mut coeff = 1.0;
        let mut powers = vec![0u32; self.nvars];
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                coeff = self.number()?;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                } else {
                    return Ok((Exponent(powers), coeff));
                }
                self.factor(&mut powers)?;
            }
            Some(b'x') => self.factor(&mut powers)?,
            Some(c) => return self.err(format!("unexpected character '{}'", c as char)),
            None => return self.err("unexpected end of input"),
        }
        while self.peek() == Some(b'*') {
            self.pos += 1;
            self.factor(&mut powers)?;
        }
        Ok((Exponent(powers), coeff))
    }

    fn factor(&mut self, powers: &mut [u32]) -> Result<()> {
        if self.peek() != Some(b'x') {
            return self.err("expected variable 'x<i>'");
        }
        self.pos += 1;
        let start = self.pos;
        let idx = self.integer()?;
        if idx == 0 || idx as usize > self.nvars {
            self.pos = start;
            return Err(Error::VariableOutOfRange {
                index: idx as usize,
                nvars: self.nvars,
            });
        }
        let mut k = 1;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            k = self.integer()?;
        }
        powers[idx as usize - 1] += k;
        Ok(())
    }

    fn integer(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        s.parse().or_else(|_| {
            self.pos = start;
            self.err("integer too large")
        })
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src;
        let mut i = self.pos;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let s = std::str::from_utf8(&bytes[start..i]).expect("ascii number");
        match s.parse::<f64>() {
            Ok(v) => {
                self.pos = i;
                Ok(v)
            }
            Err(_) => self.err(format!("invalid number '{s}'")),
        }
    }
}

/// The Motzkin polynomial `x⁴y² + x²y⁴ − 3x²y² + 1`.
pub fn motzkin() -> Polynomial {
    Polynomial::parse("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1", 2).expect("valid literal")
}

/// The Robinson polynomial, nonnegative on ℝ³ but not a sum of squares.
pub fn robinson() -> Polynomial {
    Polynomial::parse(
        "x1^6 + x2^6 + x3^6 - x1^4*x2^2 - x1^2*x2^4 - x1^4*x3^2 - x1^2*x3^4 \
         - x2^4*x3^2 - x2^2*x3^4 + 3*x1^2*x2^2*x3^2",
        3,
    )
    .expect("valid literal")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, n: usize) -> Polynomial {
        Polynomial::parse(s, n).unwrap()
    }

    #[test]
    fn parses_simple_terms() {
        let q = p("x1^2 + 2*x1*x2", 2);
        assert_eq!(q.coeff(&Exponent::new(vec![2, 0])), 1.0);
        assert_eq!(q.coeff(&Exponent::new(vec![1, 1])), 2.0);
        assert_eq!(q.num_terms(), 2);
    }

    #[test]
    fn zero_polynomial_has_degree_zero() {
        let z = p("0", 3);
        assert!(z.is_zero());
        assert_eq!(z.degree(), 0);
    }

    #[test]
    fn motzkin_shape_and_values() {
        let m = motzkin();
        assert_eq!(m.num_terms(), 4);
        assert_eq!(m.degree(), 6);
        assert_eq!(m.evaluate(&[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(m.evaluate(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(m.evaluate(&[-1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_checks_dimension() {
        let q = p("x1^2 + x2^2", 2);
        assert_eq!(q.evaluate(&[3.0, 4.0]).unwrap(), 25.0);
        assert!(matches!(
            q.evaluate(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn arithmetic_examples() {
        let a = p("x1 + 1", 1);
        let b = p("x1 - 1", 1);
        assert_eq!(a.multiply(&b).unwrap(), p("x1^2 - 1", 1));
        assert!(a.add(&a.scale(-1.0)).unwrap().is_zero());
        let m = p("x1^2", 2).multiply(&p("x2^3", 2)).unwrap();
        assert_eq!(m, p("x1^2*x2^3", 2));
        assert!(p("x1", 1).add(&p("x1", 2)).is_err());
    }

    #[test]
    fn compose_examples() {
        let s = p("x1^2", 1);
        let f = p("x1 + 1", 1);
        assert_eq!(
            Polynomial::compose_univariate(&s, &f).unwrap(),
            p("x1^2 + 2*x1 + 1", 1)
        );
        let one = p("1", 1);
        let g = p("x1*x2 + 3", 2);
        assert_eq!(
            Polynomial::compose_univariate(&one, &g).unwrap(),
            Polynomial::constant(2, 1.0)
        );
        assert!(Polynomial::compose_univariate(&g, &s).is_err());
    }

    #[test]
    fn compose_cube_matches_pointwise_expansion() {
        let s = p("x1^3", 1);
        let f = p("x1*x2", 2);
        let c = Polynomial::compose_univariate(&s, &f).unwrap();
        assert_eq!(c, p("x1^3*x2^3", 2));
        let mut v: f64 = 0.37;
        for _ in 0..20 {
            v = (v * 7.13 + 0.29) % 2.0 - 1.0;
            let pt = [v, 0.5 - v * 0.3];
            let direct = (pt[0] * pt[1]).powi(3);
            assert!((c.evaluate(&pt).unwrap() - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn parse_errors_report_position() {
        match Polynomial::parse("x1 + * x2", 2) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Polynomial::parse("x3", 2),
            Err(Error::VariableOutOfRange { index: 3, nvars: 2 })
        ));
        assert!(Polynomial::parse("", 1).is_err());
        assert!(Polynomial::parse("x1 x2", 2).is_err());
    }

    #[test]
    fn parse_handles_whitespace_signs_and_exponents() {
        let q = p(" -3 * x1 ^ 2 * x2^2 + 1.5e-1 - x2 ", 2);
        assert_eq!(q.coeff(&Exponent::new(vec![2, 2])), -3.0);
        assert_eq!(q.coeff(&Exponent::new(vec![0, 0])), 0.15);
        assert_eq!(q.coeff(&Exponent::new(vec![0, 1])), -1.0);
    }

    #[test]
    fn graded_lex_order() {
        let e = exponents_up_to(2, 2);
        let got: Vec<Vec<u32>> = e.iter().map(|x| x.powers().to_vec()).collect();
        assert_eq!(
            got,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
        let mut sorted = e.clone();
        sorted.sort();
        assert_eq!(sorted, e);
    }

    #[test]
    fn display_round_trips() {
        let q = p("-3*x1^2*x2^2 + 1 + 0.25*x2", 2);
        let text = q.to_string();
        assert_eq!(Polynomial::parse(&text, 2).unwrap(), q);
    }

    #[test]
    fn affine_substitution() {
        let q = p("x1^2 + x2", 2);
        let s = q.affine_substitute(&[2.0, 1.0], &[0.0, -1.0]).unwrap();
        assert_eq!(s, p("4*x1^2 + x2 - 1", 2));
    }
}
