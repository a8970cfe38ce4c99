#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soslab::linalg::SymMatrix;
use soslab::poly::{exponents_up_to, Polynomial};
use soslab::sdp::{Constraint, SdpProblem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_orthogonal(n: usize, r: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
    a.qr().q()
}

/// A random SDP with a planted complementary optimal pair. Returns the
/// problem and its optimal value `bᵀy*`.
pub fn planted_problem(seed: u64) -> (SdpProblem, f64) {
    let mut r = rng(seed);
    let nblocks = r.gen_range(1..=3);
    let blocks: Vec<usize> = (0..nblocks).map(|_| r.gen_range(2..=30)).collect();
    let free_vars = r.gen_range(0..=2);
    let total: usize = blocks.iter().map(|n| n * (n + 1) / 2).sum();
    let m = r.gen_range(free_vars.max(1) + 1..=total.min(40).max(free_vars + 2));

    let mut xs = Vec::new();
    let mut ss = Vec::new();
    for &n in &blocks {
        let q = random_orthogonal(n, &mut r);
        let k = r.gen_range(1..n);
        let dx = DMatrix::from_fn(n, n, |i, j| if i == j && i < k { r.gen_range(0.5..2.0) } else { 0.0 });
        let ds = DMatrix::from_fn(n, n, |i, j| if i == j && i >= k { r.gen_range(0.5..2.0) } else { 0.0 });
        xs.push(&q * dx * q.transpose());
        ss.push(&q * ds * q.transpose());
    }
    let ystar: Vec<f64> = (0..m).map(|_| r.gen_range(-1.0..1.0)).collect();
    let ustar: Vec<f64> = (0..free_vars).map(|_| r.gen_range(-1.0..1.0)).collect();

    let mut p = SdpProblem::new(blocks.clone(), free_vars);
    for j in 0..m {
        let mut c = Constraint::default();
        for (b, &n) in blocks.iter().enumerate() {
            for i in 0..n {
                for l in i..n {
                    if r.gen_bool(0.3) {
                        c.push(b, i, l, r.gen_range(-1.0..1.0));
                    }
                }
            }
        }
        if free_vars > 0 && j < 2 * free_vars {
            c.free.push((j % free_vars, r.gen_range(0.5..1.5)));
        }
        p.constraints.push(c);
    }
    let xd: Vec<DMatrix<f64>> = xs.clone();
    let ax = p.apply(&xd, &ustar);
    for (c, v) in p.constraints.iter_mut().zip(ax) {
        c.rhs = v;
    }
    let aty = p.adjoint(&ystar);
    p.c = aty
        .iter()
        .zip(&ss)
        .map(|(a, s)| SymMatrix::symmetrized(&(a - s)))
        .collect();
    p.free_obj = p.free_adjoint(&ystar);
    let opt = p.dual_objective(&ystar);
    (p, opt)
}

pub fn random_poly(r: &mut ChaCha8Rng, nvars: usize, deg: u32) -> Polynomial {
    let mut p = Polynomial::zero(nvars);
    for e in exponents_up_to(nvars, deg) {
        p.add_term(e, r.gen_range(-1.0..1.0));
    }
    p
}
