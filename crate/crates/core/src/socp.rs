//! Second-order cone program for the extent.
//!
//! Primal, one Lorentz cone `L^{2+1} = {(x1, x2, t) : |(x1, x2)| <= t}` per word:
//!
//! ```text
//! min  sum_s t_s
//! s.t. sum_s [s^R -s^I 0; s^I s^R 0] (c_s^R, c_s^I, t_s) = (psi^R, psi^I)
//!      (c_s^R, c_s^I, t_s) in L^{2+1}
//! ```
//!
//! Dual: `max (psi^R).y^R + (psi^I).y^I` with slacks
//! `z_s = (0, 0, 1) - A_s^T y in L^{2+1}`, i.e. `|<s, y>| <= 1`.
//!
//! The solver is a primal-dual interior-point method with Nesterov-Todd
//! scaling and Mehrotra predictor-corrector steps. Each iteration solves a
//! `2d x 2d` normal-equation system, so the cost is linear in the number of
//! words.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::vector;

/// Singular value ratio below which a dictionary is treated as non-spanning.
pub const RANK_RATIO: f64 = 1e-12;
/// Singular value ratio below which a conditioning warning is attached.
pub const CONDITION_WARN_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative duality gap target.
    pub gap_tol: f64,
    /// Primal (relative to |b|) and dual residual target.
    pub feas_tol: f64,
    pub max_iters: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Keep a per-iteration trace in the diagnostics.
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { gap_tol: 1e-7, feas_tol: 1e-8, max_iters: 200, step_fraction: 0.99, trace: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Optimal,
    MaxIters,
    InfeasibleDetected,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub relative_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub step: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub status: SolverStatus,
    /// Smallest over largest singular value of the dictionary matrix.
    pub conditioning_ratio: f64,
    pub warnings: Vec<String>,
    pub trace: Vec<IterationRecord>,
}

/// Real standard-form cone program for `extent(D, psi)`.
#[derive(Debug, Clone)]
pub struct SocpProblem {
    dim: usize,
    num_words: usize,
    /// Word amplitudes, real and imaginary parts, word-major (`m x d`).
    re: Vec<f64>,
    im: Vec<f64>,
    /// `(psi^R, psi^I)`.
    rhs: Vec<f64>,
    conditioning_ratio: f64,
}

impl SocpProblem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_cones(&self) -> usize {
        self.num_words
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn conditioning_ratio(&self) -> f64 {
        self.conditioning_ratio
    }

    /// Dense equality matrix, `2d x 3m`, columns `(c_s^R, c_s^I, t_s)` per word.
    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.dim;
        let mut a = DMatrix::zeros(2 * d, 3 * self.num_words);
        for k in 0..self.num_words {
            for i in 0..d {
                let (sr, si) = (self.re[k * d + i], self.im[k * d + i]);
                a[(i, 3 * k)] = sr;
                a[(d + i, 3 * k)] = si;
                a[(i, 3 * k + 1)] = -si;
                a[(d + i, 3 * k + 1)] = sr;
            }
        }
        a
    }

    /// Objective vector: ones on every `t_s` slot.
    pub fn objective(&self) -> Vec<f64> {
        (0..3 * self.num_words).map(|j| if j % 3 == 2 { 1.0 } else { 0.0 }).collect()
    }

    fn word(&self, k: usize) -> (&[f64], &[f64]) {
        let d = self.dim;
        (&self.re[k * d..(k + 1) * d], &self.im[k * d..(k + 1) * d])
    }

    /// `(a1.y, a2.y) = (Re <s,y>, Im <s,y>)`.
    fn overlap(&self, k: usize, y: &[f64]) -> (f64, f64) {
        let d = self.dim;
        let (sr, si) = self.word(k);
        let (yr, yi) = y.split_at(d);
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..d {
            re += sr[i] * yr[i] + si[i] * yi[i];
            im += sr[i] * yi[i] - si[i] * yr[i];
        }
        (re, im)
    }

    /// `out += realify((v1 + i v2) s_k)`.
    fn add_column(&self, k: usize, v1: f64, v2: f64, out: &mut [f64]) {
        let d = self.dim;
        let (sr, si) = self.word(k);
        for i in 0..d {
            out[i] += sr[i] * v1 - si[i] * v2;
            out[d + i] += si[i] * v1 + sr[i] * v2;
        }
    }

    /// `sum_s A_s H_s A_s^T` for symmetric 2x2 weights `h = [h11, h12, h22]`.
    fn weighted_gram(&self, weights: &[[f64; 3]]) -> DMatrix<f64> {
        let d = self.dim;
        let n2 = 2 * d;
        let mut m = DMatrix::<f64>::zeros(n2, n2);
        let data = m.as_mut_slice();
        let mut a1 = vec![0.0; n2];
        let mut a2 = vec![0.0; n2];
        for (k, h) in weights.iter().enumerate() {
            let (sr, si) = self.word(k);
            for i in 0..d {
                a1[i] = sr[i];
                a1[d + i] = si[i];
                a2[i] = -si[i];
                a2[d + i] = sr[i];
            }
            for c in 0..n2 {
                let p = h[0] * a1[c] + h[1] * a2[c];
                let q = h[1] * a1[c] + h[2] * a2[c];
                if p == 0.0 && q == 0.0 {
                    continue;
                }
                let col = &mut data[c * n2..(c + 1) * n2];
                for r in c..n2 {
                    col[r] += a1[r] * p + a2[r] * q;
                }
            }
        }
        m.fill_upper_triangle_with_lower_triangle();
        m
    }
}

/// Assembles the cone program; rejects dimension mismatches and
/// dictionaries that do not span `C^d`.
pub fn build_extent_socp(dict: &Dictionary, psi: &[Complex64]) -> Result<SocpProblem> {
    let d = dict.dim();
    if psi.len() != d {
        return Err(Error::Dimension { expected: d, found: psi.len() });
    }
    if psi.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::Validation("state has non-finite amplitudes".into()));
    }
    let m = dict.len();
    let mut re = Vec::with_capacity(m * d);
    let mut im = Vec::with_capacity(m * d);
    for s in dict.iter() {
        re.extend(s.iter().map(|a| a.re));
        im.extend(s.iter().map(|a| a.im));
    }
    let mut rhs: Vec<f64> = psi.iter().map(|a| a.re).collect();
    rhs.extend(psi.iter().map(|a| a.im));
    let mut problem = SocpProblem { dim: d, num_words: m, re, im, rhs, conditioning_ratio: 0.0 };

    let frame = problem.weighted_gram(&vec![[1.0, 0.0, 1.0]; m]);
    let eig = frame.symmetric_eigenvalues();
    let max = eig.max();
    let min = eig.min().max(0.0);
    let ratio = if max > 0.0 { (min / max).sqrt() } else { 0.0 };
    if ratio.is_nan() || ratio <= RANK_RATIO {
        return Err(Error::Rank { dim: d, ratio });
    }
    problem.conditioning_ratio = ratio;
    Ok(problem)
}

/// Certified solution of the extent cone program.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SocpSolution {
    /// Primal variables `(c_s^R, c_s^I, t_s)` per word.
    pub primal: Vec<[f64; 3]>,
    /// `(y^R, y^I)`.
    pub dual: Vec<f64>,
    /// Dual slacks `z_s` in the same layout as `primal`.
    pub slack: Vec<[f64; 3]>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `primal_objective - dual_objective`.
    pub gap: f64,
    pub relative_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub status: SolverStatus,
    pub diagnostics: SolverDiagnostics,
}

impl SocpSolution {
    pub fn coefficients(&self) -> Vec<Complex64> {
        self.primal.iter().map(|x| Complex64::new(x[0], x[1])).collect()
    }

    pub fn witness(&self) -> Vec<Complex64> {
        let d = self.dual.len() / 2;
        (0..d).map(|i| Complex64::new(self.dual[i], self.dual[d + i])).collect()
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolverStatus::Optimal
    }
}

/// Max `|<s, y>|` over the dictionary and whether it is `<= 1 + tol`.
pub fn check_dual_feasibility(dict: &Dictionary, y: &[Complex64], tol: f64) -> Result<(bool, f64)> {
    if y.len() != dict.dim() {
        return Err(Error::Dimension { expected: dict.dim(), found: y.len() });
    }
    let max = dict
        .iter()
        .map(|s| vector::inner(s, y).norm())
        .fold(0.0, f64::max);
    Ok((max <= 1.0 + tol, max))
}

// Cone algebra on head-first triples (t, x1, x2).

type Cone = [f64; 3];

fn from_head_first(v: &Cone) -> [f64; 3] {
    [v[1], v[2], v[0]]
}

fn dot(a: &Cone, b: &Cone) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `t^2 - |x|^2`, factored for accuracy near the boundary.
fn det(a: &Cone) -> f64 {
    let r = a[1].hypot(a[2]);
    (a[0] - r) * (a[0] + r)
}

fn jordan(a: &Cone, b: &Cone) -> Cone {
    [dot(a, b), a[0] * b[1] + b[0] * a[1], a[0] * b[2] + b[0] * a[2]]
}

/// Solves `lambda o u = r` for `u`.
fn jordan_div(lambda: &Cone, r: &Cone) -> Cone {
    let u0 = (lambda[0] * r[0] - lambda[1] * r[1] - lambda[2] * r[2]) / det(lambda);
    [u0, (r[1] - u0 * lambda[1]) / lambda[0], (r[2] - u0 * lambda[2]) / lambda[0]]
}

type Mat3 = [[f64; 3]; 3];

fn mat_vec(m: &Mat3, v: &Cone) -> Cone {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Nesterov-Todd scaling `W` (and `W^{-1}`) with `W z = W^{-1} x`.
#[derive(Debug, Clone, Copy)]
struct NtScaling {
    w: Mat3,
    w_inv: Mat3,
}

fn nt_scaling(x: &Cone, z: &Cone) -> NtScaling {
    let sx = det(x).sqrt();
    let sz = det(z).sqrt();
    let xb = [x[0] / sx, x[1] / sx, x[2] / sx];
    let zb = [z[0] / sz, z[1] / sz, z[2] / sz];
    let gamma = ((1.0 + dot(&xb, &zb)) / 2.0).sqrt();
    let wb = [
        (xb[0] + zb[0]) / (2.0 * gamma),
        (xb[1] - zb[1]) / (2.0 * gamma),
        (xb[2] - zb[2]) / (2.0 * gamma),
    ];
    let eta = (sx / sz).sqrt();
    let f = 1.0 / (1.0 + wb[0]);
    let tail = [
        [1.0 + f * wb[1] * wb[1], f * wb[1] * wb[2]],
        [f * wb[2] * wb[1], 1.0 + f * wb[2] * wb[2]],
    ];
    let build = |s: f64, sign: f64| -> Mat3 {
        [
            [s * wb[0], s * sign * wb[1], s * sign * wb[2]],
            [s * sign * wb[1], s * tail[0][0], s * tail[0][1]],
            [s * sign * wb[2], s * tail[1][0], s * tail[1][1]],
        ]
    };
    NtScaling { w: build(eta, 1.0), w_inv: build(1.0 / eta, -1.0) }
}

/// Largest `alpha` with `u + alpha du` in the cone (`f64::INFINITY` if unbounded).
fn max_step(u: &Cone, du: &Cone) -> f64 {
    // det(u + a du) = A a^2 + 2 B a + C
    let a = du[0] * du[0] - du[1] * du[1] - du[2] * du[2];
    let b = u[0] * du[0] - u[1] * du[1] - u[2] * du[2];
    let c = det(u).max(0.0);
    let scale = dot(du, du).max(f64::MIN_POSITIVE);
    let mut alpha = f64::INFINITY;
    if a.abs() <= 1e-14 * scale {
        if b < 0.0 {
            alpha = -c / (2.0 * b);
        }
    } else {
        let disc = b * b - a * c;
        if disc >= 0.0 {
            let q = -(b + b.signum() * disc.sqrt());
            for root in [q / a, if q != 0.0 { c / q } else { f64::INFINITY }] {
                if root >= 0.0 && root < alpha {
                    alpha = root;
                }
            }
        }
    }
    // The head must stay nonnegative as well.
    if du[0] < 0.0 {
        alpha = alpha.min(-u[0] / du[0]);
    }
    alpha
}

struct Direction {
    dx: Vec<Cone>,
    dy: Vec<f64>,
    dz: Vec<Cone>,
}

struct Factor {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    matrix: DMatrix<f64>,
}

impl Factor {
    fn new(matrix: DMatrix<f64>) -> Result<Factor> {
        let n = matrix.nrows();
        let diag_scale = (0..n).map(|i| matrix[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut reg = 1e-12;
        while reg <= 1e-2 {
            let mut shifted = matrix.clone();
            for i in 0..n {
                shifted[(i, i)] += reg * diag_scale;
            }
            if let Some(chol) = shifted.cholesky() {
                return Ok(Factor { chol, matrix });
            }
            reg *= 100.0;
        }
        Err(Error::Solver("normal equations are not positive definite".into()))
    }

    /// Solve with one step of iterative refinement against the unshifted matrix.
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = self.chol.solve(rhs);
        let r = rhs - &self.matrix * &x;
        x += self.chol.solve(&r);
        x
    }
}

struct Iterate {
    x: Vec<Cone>,
    y: Vec<f64>,
    z: Vec<Cone>,
}

struct Measures {
    pobj: f64,
    dobj: f64,
    rel_gap: f64,
    pres: f64,
    dres: f64,
    rp: Vec<f64>,
    rd: Vec<Cone>,
}

impl Measures {
    fn converged(&self, opts: &SolverOptions) -> bool {
        self.rel_gap <= opts.gap_tol && self.pres <= opts.feas_tol && self.dres <= opts.feas_tol
    }

    /// Worst criterion relative to its tolerance.
    fn badness(&self, opts: &SolverOptions) -> f64 {
        (self.rel_gap / opts.gap_tol)
            .max(self.pres / opts.feas_tol)
            .max(self.dres / opts.feas_tol)
    }
}

fn measure(p: &SocpProblem, it: &Iterate, bnorm: f64) -> Measures {
    let n2 = 2 * p.dim;
    let mut ax = vec![0.0; n2];
    let mut rd = Vec::with_capacity(p.num_words);
    let mut pobj = 0.0;
    let mut comp = 0.0;
    for k in 0..p.num_words {
        let x = &it.x[k];
        p.add_column(k, x[1], x[2], &mut ax);
        pobj += x[0];
        comp += dot(x, &it.z[k]);
        let (o1, o2) = p.overlap(k, &it.y);
        let z = &it.z[k];
        rd.push([1.0 - z[0], -o1 - z[1], -o2 - z[2]]);
    }
    let rp: Vec<f64> = p.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let dobj: f64 = p.rhs.iter().zip(&it.y).map(|(b, y)| b * y).sum();
    let scale = pobj.abs().max(dobj.abs()).max(f64::MIN_POSITIVE);
    let rel_gap = ((pobj - dobj).abs().max(comp.abs())) / scale;
    let pres = rp.iter().map(|r| r * r).sum::<f64>().sqrt() / bnorm;
    let dres = rd.iter().map(|r| dot(r, r)).sum::<f64>().sqrt();
    Measures { pobj, dobj, rel_gap, pres, dres, rp, rd }
}

fn newton(
    p: &SocpProblem,
    scalings: &[NtScaling],
    w2: &[Mat3],
    factor: &Factor,
    meas: &Measures,
    rhat: &[Cone],
) -> Direction {
    let n2 = 2 * p.dim;
    let mut u = meas.rp.clone();
    let mut partial = Vec::with_capacity(p.num_words);
    for k in 0..p.num_words {
        let a = mat_vec(&scalings[k].w, &rhat[k]);
        let b = mat_vec(&w2[k], &meas.rd[k]);
        let v = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        p.add_column(k, -v[1], -v[2], &mut u);
        partial.push(a);
    }
    let dy = factor.solve(&DVector::from_vec(u));
    let dy: Vec<f64> = dy.iter().copied().collect();
    debug_assert_eq!(dy.len(), n2);
    let mut dx = Vec::with_capacity(p.num_words);
    let mut dz = Vec::with_capacity(p.num_words);
    for k in 0..p.num_words {
        let (o1, o2) = p.overlap(k, &dy);
        let r = &meas.rd[k];
        let dzk = [r[0], r[1] - o1, r[2] - o2];
        let w2dz = mat_vec(&w2[k], &dzk);
        let a = &partial[k];
        dx.push([a[0] - w2dz[0], a[1] - w2dz[1], a[2] - w2dz[2]]);
        dz.push(dzk);
    }
    Direction { dx, dy, dz }
}

fn step_length(it: &Iterate, dir: &Direction) -> f64 {
    let mut alpha = f64::INFINITY;
    for k in 0..it.x.len() {
        alpha = alpha.min(max_step(&it.x[k], &dir.dx[k]));
        alpha = alpha.min(max_step(&it.z[k], &dir.dz[k]));
    }
    alpha
}

fn axpy(a: &Cone, alpha: f64, b: &Cone) -> Cone {
    [a[0] + alpha * b[0], a[1] + alpha * b[1], a[2] + alpha * b[2]]
}

/// Runs the interior-point method on `problem`.
pub fn solve(problem: &SocpProblem, opts: &SolverOptions) -> Result<SocpSolution> {
    let m = problem.num_words;
    let n2 = 2 * problem.dim;
    let bnorm = problem.rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
    let mut warnings = Vec::new();
    if problem.conditioning_ratio < CONDITION_WARN_RATIO {
        warnings.push(format!(
            "dictionary is nearly rank deficient (singular value ratio {:e})",
            problem.conditioning_ratio
        ));
    }

    if bnorm == 0.0 {
        return Ok(SocpSolution {
            primal: vec![[0.0; 3]; m],
            dual: vec![0.0; n2],
            slack: vec![[0.0, 0.0, 1.0]; m],
            primal_objective: 0.0,
            dual_objective: 0.0,
            gap: 0.0,
            relative_gap: 0.0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            status: SolverStatus::Optimal,
            diagnostics: SolverDiagnostics {
                iterations: 0,
                status: SolverStatus::Optimal,
                conditioning_ratio: problem.conditioning_ratio,
                warnings,
                trace: vec![],
            },
        });
    }

    // Least-squares start: c = A_c^T (A_c A_c^T)^{-1} b, t_s = |c_s| + 1.
    let frame = Factor::new(problem.weighted_gram(&vec![[1.0, 0.0, 1.0]; m]))?;
    let v: Vec<f64> = frame.solve(&DVector::from_column_slice(&problem.rhs)).iter().copied().collect();
    let x: Vec<Cone> = (0..m)
        .map(|k| {
            let (c1, c2) = problem.overlap(k, &v);
            [c1.hypot(c2) + 1.0, c1, c2]
        })
        .collect();
    let mut it = Iterate { x, y: vec![0.0; n2], z: vec![[1.0, 0.0, 0.0]; m] };

    let mut trace = Vec::new();
    let mut best: Option<(f64, Iterate, usize)> = None;
    let mut status = SolverStatus::MaxIters;
    let mut iterations = 0;
    let mut last = (0.0, 0.0);

    loop {
        let meas = measure(problem, &it, bnorm);
        if opts.trace {
            trace.push(IterationRecord {
                iteration: iterations,
                primal_objective: meas.pobj,
                dual_objective: meas.dobj,
                relative_gap: meas.rel_gap,
                primal_residual: meas.pres,
                dual_residual: meas.dres,
                step: last.0,
                sigma: last.1,
            });
        }
        if meas.converged(opts) {
            status = SolverStatus::Optimal;
            break;
        }
        let bad = meas.badness(opts);
        if best.as_ref().is_none_or(|(b, _, _)| bad < *b) {
            best = Some((bad, Iterate { x: it.x.clone(), y: it.y.clone(), z: it.z.clone() }, iterations));
        }
        if iterations >= opts.max_iters {
            break;
        }

        let scalings: Vec<NtScaling> = it.x.iter().zip(&it.z).map(|(x, z)| nt_scaling(x, z)).collect();
        let w2: Vec<Mat3> = scalings.iter().map(|s| mat_mul(&s.w, &s.w)).collect();
        let lambda: Vec<Cone> = scalings.iter().zip(&it.z).map(|(s, z)| mat_vec(&s.w, z)).collect();
        let weights: Vec<[f64; 3]> = w2.iter().map(|w| [w[1][1], w[1][2], w[2][2]]).collect();
        let factor = match Factor::new(problem.weighted_gram(&weights)) {
            Ok(f) => f,
            Err(e) if best.is_some() => {
                warnings.push(format!("stopped early: {e}"));
                break;
            }
            Err(e) => return Err(e),
        };

        let mu = it.x.iter().zip(&it.z).map(|(x, z)| dot(x, z)).sum::<f64>() / m as f64;

        // Predictor.
        let rhat: Vec<Cone> = lambda.iter().map(|l| [-l[0], -l[1], -l[2]]).collect();
        let aff = newton(problem, &scalings, &w2, &factor, &meas, &rhat);
        let alpha_aff = step_length(&it, &aff).min(1.0);
        let mu_aff = it
            .x
            .iter()
            .zip(&it.z)
            .enumerate()
            .map(|(k, (x, z))| dot(&axpy(x, alpha_aff, &aff.dx[k]), &axpy(z, alpha_aff, &aff.dz[k])))
            .sum::<f64>()
            / m as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let rhat: Vec<Cone> = (0..m)
            .map(|k| {
                let s = &scalings[k];
                let dxs = mat_vec(&s.w_inv, &aff.dx[k]);
                let dzs = mat_vec(&s.w, &aff.dz[k]);
                let ll = jordan(&lambda[k], &lambda[k]);
                let cc = jordan(&dxs, &dzs);
                let rc = [sigma * mu - ll[0] - cc[0], -ll[1] - cc[1], -ll[2] - cc[2]];
                jordan_div(&lambda[k], &rc)
            })
            .collect();
        let dir = newton(problem, &scalings, &w2, &factor, &meas, &rhat);
        let alpha = (opts.step_fraction * step_length(&it, &dir)).min(1.0);
        if !alpha.is_finite() || alpha < 1e-12 || dir.dy.iter().any(|v| !v.is_finite()) {
            if best.is_some() {
                warnings.push(format!("stopped early: step length {alpha:e}"));
                break;
            }
            return Err(Error::Solver(format!("step length collapsed to {alpha:e} at iteration {iterations}")));
        }
        for k in 0..m {
            it.x[k] = axpy(&it.x[k], alpha, &dir.dx[k]);
            it.z[k] = axpy(&it.z[k], alpha, &dir.dz[k]);
        }
        for (y, d) in it.y.iter_mut().zip(&dir.dy) {
            *y += alpha * d;
        }
        iterations += 1;
        last = (alpha, sigma);
    }

    if status != SolverStatus::Optimal {
        if let Some((_, b, _)) = best.take() {
            it = b;
        }
    }
    let meas = measure(problem, &it, bnorm);
    Ok(SocpSolution {
        primal: it.x.iter().map(from_head_first).collect(),
        dual: it.y,
        slack: it.z.iter().map(from_head_first).collect(),
        primal_objective: meas.pobj,
        dual_objective: meas.dobj,
        gap: meas.pobj - meas.dobj,
        relative_gap: meas.rel_gap,
        primal_residual: meas.pres,
        dual_residual: meas.dres,
        status,
        diagnostics: SolverDiagnostics {
            iterations,
            status,
            conditioning_ratio: problem.conditioning_ratio,
            warnings,
            trace,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::basis_vector;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn computational() -> Dictionary {
        Dictionary::new(vec![basis_vector(2, 0), basis_vector(2, 1)]).unwrap()
    }

    #[test]
    fn nt_scaling_identities() {
        let x = [2.0, 0.3, -1.1];
        let z = [1.5, -0.7, 0.2];
        let s = nt_scaling(&x, &z);
        let wz = mat_vec(&s.w, &z);
        let wix = mat_vec(&s.w_inv, &x);
        for i in 0..3 {
            assert!((wz[i] - wix[i]).abs() < 1e-12, "{wz:?} vs {wix:?}");
        }
        let id = mat_mul(&s.w, &s.w_inv);
        for (i, row) in id.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jordan_division_inverts_product() {
        let l = [1.3, 0.4, -0.2];
        let u = [0.5, -2.0, 0.7];
        let r = jordan(&l, &u);
        let back = jordan_div(&l, &r);
        for i in 0..3 {
            assert!((back[i] - u[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn max_step_hits_boundary() {
        let u = [1.0, 0.0, 0.0];
        let a = max_step(&u, &[0.0, 1.0, 0.0]);
        assert!((a - 1.0).abs() < 1e-12);
        assert_eq!(max_step(&u, &[1.0, 0.5, 0.0]), f64::INFINITY);
        let a = max_step(&u, &[-1.0, 0.0, 0.0]);
        assert!((a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn problem_structure() {
        let h = FRAC_1_SQRT_2;
        let dict = Dictionary::new(vec![
            basis_vector(2, 0),
            basis_vector(2, 1),
            vec![c(h, 0.0), c(0.0, h)],
            vec![c(h, 0.0), c(h, 0.0)],
        ])
        .unwrap();
        let p = build_extent_socp(&dict, &[c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let a = p.matrix();
        assert_eq!((a.nrows(), a.ncols()), (4, 12));
        let obj = p.objective();
        assert_eq!(obj.iter().filter(|&&v| v == 1.0).count(), 4);
        assert!(obj.iter().enumerate().all(|(j, &v)| (v == 1.0) == (j % 3 == 2)));
        // Word (1, i)/sqrt2 sits at columns 6..9: [s^R -s^I 0; s^I s^R 0].
        let col = |j: usize| a.column(j).iter().copied().collect::<Vec<_>>();
        assert_eq!(col(6), vec![h, 0.0, 0.0, h]);
        assert_eq!(col(7), vec![0.0, -h, h, 0.0]);
        assert_eq!(col(8), vec![0.0; 4]);
        assert_eq!(p.rhs(), &[0.6, 0.8, 0.0, 0.0]);
    }

    #[test]
    fn build_errors() {
        let dict = computational();
        assert!(matches!(
            build_extent_socp(&dict, &[c(1.0, 0.0)]),
            Err(Error::Dimension { expected: 2, found: 1 })
        ));
        let thin = Dictionary::new(vec![basis_vector(2, 0)]).unwrap();
        assert!(matches!(build_extent_socp(&thin, &[c(1.0, 0.0), c(0.0, 0.0)]), Err(Error::Rank { .. })));
    }

    #[test]
    fn unique_decomposition_value() {
        let dict = computational();
        let p = build_extent_socp(&dict, &[c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.primal_objective - 1.4).abs() < 1e-7);
        let y = sol.witness();
        assert!((y[0] - c(1.0, 0.0)).norm() < 1e-6);
        assert!((y[1] - c(1.0, 0.0)).norm() < 1e-6);
        assert!(sol.relative_gap <= 1e-7);
    }

    #[test]
    fn dictionary_word_has_unit_value() {
        let h = FRAC_1_SQRT_2;
        let dict = Dictionary::new(vec![basis_vector(2, 0), basis_vector(2, 1), vec![c(h, 0.0), c(h, 0.0)]]).unwrap();
        let p = build_extent_socp(&dict, &[c(h, 0.0), c(h, 0.0)]).unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.primal_objective - 1.0).abs() < 1e-7);
    }

    #[test]
    fn zero_state_skips_solver() {
        let p = build_extent_socp(&computational(), &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.primal_objective, 0.0);
        assert_eq!(sol.diagnostics.iterations, 0);
        assert!(sol.witness().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn dual_feasibility_examples() {
        let dict = computational();
        assert_eq!(check_dual_feasibility(&dict, &[c(0.0, 0.0); 2], 1e-9).unwrap(), (true, 0.0));
        let (ok, max) = check_dual_feasibility(&dict, &[c(2.0, 0.0), c(0.0, 0.0)], 1e-9).unwrap();
        assert!(!ok);
        assert!((max - 2.0).abs() < 1e-15);
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let f = 0.8f64 * 0.8;
        let y = crate::vector::scale(&psi, c(1.0 / f.sqrt(), 0.0));
        let (ok, max) = check_dual_feasibility(&dict, &y, 1e-12).unwrap();
        assert!(ok);
        assert!((max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_is_recorded_on_request() {
        let p = build_extent_socp(&computational(), &[c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let opts = SolverOptions { trace: true, ..Default::default() };
        let sol = solve(&p, &opts).unwrap();
        assert_eq!(sol.diagnostics.trace.len(), sol.diagnostics.iterations + 1);
        for r in &sol.diagnostics.trace {
            assert!(r.dual_objective <= r.primal_objective + 1e-9);
        }
    }
}
