//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use extentlab::dictionary::canonical_phase;
use extentlab::{Complex64, Dictionary};
use nalgebra::{DMatrix, DVector};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// Stabilizer states as the Clifford orbit of |0...0>.

fn ray_key(v: &[Complex64]) -> Vec<i64> {
    canonical_phase(v)
        .iter()
        .flat_map(|a| [(a.re * 1e8).round() as i64, (a.im * 1e8).round() as i64])
        .collect()
}

fn hadamard(v: &[Complex64], q: usize, n: usize) -> Vec<Complex64> {
    let bit = 1 << (n - 1 - q);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = v.to_vec();
    for x in 0..v.len() {
        if x & bit == 0 {
            let (a, b) = (v[x], v[x | bit]);
            out[x] = (a + b) * h;
            out[x | bit] = (a - b) * h;
        }
    }
    out
}

fn phase_gate(v: &[Complex64], q: usize, n: usize) -> Vec<Complex64> {
    let bit = 1 << (n - 1 - q);
    v.iter().enumerate().map(|(x, &a)| if x & bit != 0 { a * c(0.0, 1.0) } else { a }).collect()
}

fn cnot(v: &[Complex64], control: usize, target: usize, n: usize) -> Vec<Complex64> {
    let cb = 1 << (n - 1 - control);
    let tb = 1 << (n - 1 - target);
    let mut out = v.to_vec();
    for x in 0..v.len() {
        if x & cb != 0 {
            out[x ^ tb] = v[x];
        }
    }
    out
}

/// Breadth-first closure of `|0...0>` under H, S and CNOT, up to global phase.
pub fn clifford_orbit(n: usize) -> Vec<Vec<Complex64>> {
    let d = 1 << n;
    let mut start = vec![c(0.0, 0.0); d];
    start[0] = c(1.0, 0.0);
    let mut seen = HashSet::new();
    seen.insert(ray_key(&start));
    let mut frontier = vec![start.clone()];
    let mut all = vec![start];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for v in &frontier {
            let mut images = Vec::new();
            for q in 0..n {
                images.push(hadamard(v, q, n));
                images.push(phase_gate(v, q, n));
                for t in 0..n {
                    if t != q {
                        images.push(cnot(v, q, t, n));
                    }
                }
            }
            for w in images {
                if seen.insert(ray_key(&w)) {
                    next.push(w.clone());
                    all.push(w);
                }
            }
        }
        frontier = next;
    }
    all
}

// ---------------------------------------------------------------------------
// First-order l1 minimization: min sum |c_s| subject to sum c_s s = psi.

struct AffineProjector {
    a: DMatrix<Complex64>,
    /// `A^H (A A^H)^{-1}`.
    pinv: DMatrix<Complex64>,
    psi: DVector<Complex64>,
}

impl AffineProjector {
    fn new(dict: &Dictionary, psi: &[Complex64]) -> Self {
        let a = DMatrix::from_fn(dict.dim(), dict.len(), |r, col| dict.word(col)[r]);
        let gram = &a * a.adjoint();
        let inv = gram.try_inverse().expect("dictionary must span");
        let pinv = a.adjoint() * inv;
        AffineProjector { a, pinv, psi: DVector::from_column_slice(psi) }
    }

    fn project(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let r = &self.a * v - &self.psi;
        v - &self.pinv * r
    }
}

fn l1(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

fn soft_threshold(v: Complex64, t: f64) -> Complex64 {
    let m = v.norm();
    if m <= t {
        c(0.0, 0.0)
    } else {
        v * ((m - t) / m)
    }
}

/// Minimal l1 norm: projected subgradient warm start, then ADMM on
/// `min |z|_1 s.t. x = z, A x = psi`. Returns the l1 norm of a feasible point.
pub fn l1_oracle(dict: &Dictionary, psi: &[Complex64]) -> f64 {
    let proj = AffineProjector::new(dict, psi);
    let m = dict.len();
    let mut x = proj.project(&DVector::zeros(m));
    let mut best = l1(&x);
    for k in 0..2000 {
        let g = x.map(|z| if z.norm() > 0.0 { z / z.norm() } else { c(0.0, 0.0) });
        let step = 0.5 / ((k + 1) as f64).sqrt() / (m as f64).sqrt();
        x = proj.project(&(&x - g * c(step, 0.0)));
        best = best.min(l1(&x));
    }
    let rho = 1.0;
    let mut z = x.clone();
    let mut u = DVector::zeros(m);
    for _ in 0..40_000 {
        let x_new = proj.project(&(&z - &u));
        let z_new = (&x_new + &u).map(|v| soft_threshold(v, 1.0 / rho));
        u += &x_new - &z_new;
        z = z_new;
        x = x_new;
        best = best.min(l1(&x));
    }
    best.min(l1(&proj.project(&z)))
}
