//! Extent and dictionary fidelity.
//!
//! `extent(D, psi)` solves the cone program, then snaps the primal point onto
//! the active set of the returned witness (words with `|<s,y>|` within
//! `activity_tol` of 1): the least-squares correction of the interior-point
//! coefficients restricted to those words that reconstructs `psi` exactly.
//! When that succeeds the coefficients vanish exactly off the active set,
//! which keeps support sets stable.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::socp::{self, IterationRecord, SolverOptions, SolverStatus};
use crate::vector;

pub const SUPPORT_TOL: f64 = 1e-7;
pub const ACTIVITY_TOL: f64 = 1e-6;
/// Reconstruction and dual feasibility certificates.
pub const CERT_FEAS_TOL: f64 = 1e-8;
pub const CERT_GAP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExtentOptions {
    pub solver: SolverOptions,
    /// Absolute threshold on `|c_s|` for the support.
    pub support_tol: f64,
    /// Words with `|<s,y>| >= 1 - activity_tol` are treated as active.
    pub activity_tol: f64,
    pub polish: bool,
}

impl Default for ExtentOptions {
    fn default() -> Self {
        ExtentOptions {
            solver: SolverOptions::default(),
            support_tol: SUPPORT_TOL,
            activity_tol: ACTIVITY_TOL,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtentSolution {
    /// Squared l1-norm of the returned decomposition.
    pub xi: f64,
    pub coefficients: Vec<Complex64>,
    /// Optimal dual witness `y`.
    pub witness: Vec<Complex64>,
    /// `sum |c_s| - Re <psi, y>`.
    pub gap: f64,
    pub support: Vec<usize>,
    pub l1: f64,
    pub dual_value: f64,
    /// `| sum c_s s - psi |`.
    pub reconstruction_error: f64,
    /// `max_s |<s, y>|`.
    pub max_overlap: f64,
    pub status: SolverStatus,
    pub iterations: usize,
    pub polished: bool,
    pub warnings: Vec<String>,
    /// Interior-point iterations, when requested in the solver options.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<IterationRecord>,
}

impl ExtentSolution {
    pub fn relative_gap(&self) -> f64 {
        if self.l1 == 0.0 {
            0.0
        } else {
            self.gap.abs() / self.l1
        }
    }

    /// All optimality certificates hold at the default tolerances.
    pub fn is_certified(&self) -> bool {
        let scale = self.l1.max(1.0);
        self.status == SolverStatus::Optimal
            && self.reconstruction_error <= CERT_FEAS_TOL * scale
            && self.max_overlap <= 1.0 + CERT_FEAS_TOL
            && self.relative_gap() <= CERT_GAP_TOL
    }

    /// `|<psi, y>|^2`, which equals `xi` up to the gap.
    pub fn witness_value(&self, psi: &[Complex64]) -> f64 {
        vector::inner(psi, &self.witness).norm_sqr()
    }
}

/// `xi_D(psi)` with default options.
pub fn extent(dict: &Dictionary, psi: &[Complex64]) -> Result<ExtentSolution> {
    extent_with(dict, psi, &ExtentOptions::default())
}

pub fn extent_with(dict: &Dictionary, psi: &[Complex64], opts: &ExtentOptions) -> Result<ExtentSolution> {
    let problem = socp::build_extent_socp(dict, psi)?;
    let sol = socp::solve(&problem, &opts.solver)?;
    let witness = sol.witness();
    let mut coefficients = sol.coefficients();
    let mut polished = false;
    let mut warnings = sol.diagnostics.warnings.clone();
    let mut witness = witness;
    if opts.polish && sol.primal_objective > 0.0 {
        match polish(dict, psi, &coefficients, &witness, opts.activity_tol) {
            Some(c) => {
                coefficients = c;
                polished = true;
            }
            None => warnings.push("active-set polish rejected; keeping interior-point coefficients".into()),
        }
        if let Some((c, y)) = refine_on_support(dict, psi, &coefficients, &witness, opts.support_tol) {
            coefficients = c;
            witness = y;
            polished = true;
        }
    }
    let mut out =
        assemble(dict, psi, coefficients, witness, sol.status, sol.diagnostics.iterations, polished, warnings, opts);
    out.trace = sol.diagnostics.trace;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    dict: &Dictionary,
    psi: &[Complex64],
    coefficients: Vec<Complex64>,
    witness: Vec<Complex64>,
    status: SolverStatus,
    iterations: usize,
    polished: bool,
    warnings: Vec<String>,
    opts: &ExtentOptions,
) -> ExtentSolution {
    let l1: f64 = coefficients.iter().map(|c| c.norm()).sum();
    let dual_value = vector::real_inner(psi, &witness);
    let recon = reconstruct(dict, &coefficients);
    let reconstruction_error = vector::norm(
        &recon.iter().zip(psi).map(|(a, b)| a - b).collect::<Vec<_>>(),
    );
    let max_overlap = dict
        .iter()
        .map(|s| vector::inner(s, &witness).norm())
        .fold(0.0, f64::max);
    let support = coefficients
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > opts.support_tol)
        .map(|(i, _)| i)
        .collect();
    ExtentSolution {
        xi: l1 * l1,
        coefficients,
        witness,
        gap: l1 - dual_value,
        support,
        l1,
        dual_value,
        reconstruction_error,
        max_overlap,
        status,
        iterations,
        polished,
        warnings,
        trace: Vec::new(),
    }
}

/// `sum_s c_s s`.
pub fn reconstruct(dict: &Dictionary, coefficients: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dict.dim()];
    for (s, c) in dict.iter().zip(coefficients) {
        if *c == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (o, a) in out.iter_mut().zip(s) {
            *o += c * a;
        }
    }
    out
}

/// Exact decomposition supported on the active words, nearest to the
/// interior-point coefficients. `None` if it is not at least as good.
fn polish(
    dict: &Dictionary,
    psi: &[Complex64],
    coefficients: &[Complex64],
    witness: &[Complex64],
    activity_tol: f64,
) -> Option<Vec<Complex64>> {
    let d = dict.dim();
    let scale = vector::norm(psi);
    let ipm_l1: f64 = coefficients.iter().map(|c| c.norm()).sum();
    let active: Vec<usize> = (0..dict.len())
        .filter(|&i| vector::inner(dict.word(i), witness).norm() >= 1.0 - activity_tol)
        .collect();
    if active.is_empty() {
        return None;
    }
    let b = DMatrix::from_fn(d, active.len(), |r, c| dict.word(active[c])[r]);
    let c0 = DVector::from_iterator(active.len(), active.iter().map(|&i| coefficients[i]));
    let target = DVector::from_column_slice(psi);
    let residual = &target - &b * &c0;
    let correction = b.clone().svd(true, true).solve(&residual, 1e-12).ok()?;
    let c = c0 + correction;
    let err = (&target - &b * &c).norm();
    let l1: f64 = c.iter().map(|v| v.norm()).sum();
    if err > 1e-10 * scale || l1 > ipm_l1 * (1.0 + CERT_GAP_TOL) + 1e-12 {
        return None;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); dict.len()];
    for (k, &i) in active.iter().enumerate() {
        out[i] = c[k];
    }
    Some(out)
}

/// Newton iteration on the optimality conditions restricted to a support
/// `S`: `sum_S r_s <s,y> s = psi` and `|<s,y>| = 1` on `S`. Starts from the
/// coefficients above `support_tol`; a word whose overlap ends above 1 joins
/// `S`, a word whose weight turns negative leaves it. Returns
/// `c_s = r_s <s,y>/|<s,y>|` and `y` when the result is exact and feasible.
fn refine_on_support(
    dict: &Dictionary,
    psi: &[Complex64],
    coefficients: &[Complex64],
    witness: &[Complex64],
    support_tol: f64,
) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
    let mut support: Vec<(usize, f64)> = (0..dict.len())
        .filter(|&i| coefficients[i].norm() > support_tol)
        .map(|i| (i, coefficients[i].norm()))
        .collect();
    for _ in 0..8 {
        if support.is_empty() {
            return None;
        }
        let (y, r) = newton_on_support(dict, psi, &support, witness)?;
        if vector::max_abs_diff(&y, witness) > 1e-3 {
            return None;
        }
        let (worst, min_r) = r
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (j, &v)| if v < acc.1 { (j, v) } else { acc });
        if min_r <= 0.0 {
            support.remove(worst);
            continue;
        }
        let (violator, max_overlap) = dict
            .iter()
            .map(|s| vector::inner(s, &y).norm())
            .enumerate()
            .fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        if max_overlap > 1.0 + 1e-12 {
            if support.iter().any(|&(i, _)| i == violator) {
                return None;
            }
            support = support.iter().zip(&r).map(|(&(i, _), &v)| (i, v)).collect();
            support.push((violator, 0.0));
            continue;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); dict.len()];
        for (&(i, _), &rj) in support.iter().zip(&r) {
            let o = vector::inner(dict.word(i), &y);
            out[i] = o / o.norm() * rj;
        }
        return Some((out, y));
    }
    None
}

fn newton_on_support(
    dict: &Dictionary,
    psi: &[Complex64],
    support: &[(usize, f64)],
    witness: &[Complex64],
) -> Option<(Vec<Complex64>, Vec<f64>)> {
    let d = dict.dim();
    let k = support.len();
    let scale = vector::norm(psi).max(1.0);
    let mut y = witness.to_vec();
    let mut r: Vec<f64> = support.iter().map(|&(_, v)| v).collect();
    let i_unit = Complex64::new(0.0, 1.0);
    let residual = |y: &[Complex64], r: &[f64]| -> (DVector<f64>, Vec<Complex64>) {
        let overlaps: Vec<Complex64> = support.iter().map(|&(i, _)| vector::inner(dict.word(i), y)).collect();
        let mut f = DVector::zeros(2 * d + k);
        for row in 0..d {
            let mut acc = -psi[row];
            for (j, &(i, _)) in support.iter().enumerate() {
                acc += overlaps[j] * dict.word(i)[row] * r[j];
            }
            f[row] = acc.re;
            f[d + row] = acc.im;
        }
        for (j, o) in overlaps.iter().enumerate() {
            f[2 * d + j] = o.norm_sqr() - 1.0;
        }
        (f, overlaps)
    };
    for _ in 0..30 {
        let (f, overlaps) = residual(&y, &r);
        if f.amax() <= 1e-15 * scale {
            break;
        }
        let mut jac = DMatrix::zeros(2 * d + k, 2 * d + k);
        for (j, &(w, _)) in support.iter().enumerate() {
            let s = dict.word(w);
            for row in 0..d {
                let v = overlaps[j] * s[row];
                jac[(row, 2 * d + j)] = v.re;
                jac[(d + row, 2 * d + j)] = v.im;
                for col in 0..d {
                    let g = s[col].conj() * s[row] * r[j];
                    let gi = g * i_unit;
                    jac[(row, col)] += g.re;
                    jac[(d + row, col)] += g.im;
                    jac[(row, d + col)] += gi.re;
                    jac[(d + row, d + col)] += gi.im;
                }
            }
            for col in 0..d {
                let base = overlaps[j].conj() * s[col].conj();
                jac[(2 * d + j, col)] = 2.0 * base.re;
                jac[(2 * d + j, d + col)] = 2.0 * (base * i_unit).re;
            }
        }
        let step = jac.svd(true, true).solve(&(-f), 1e-13).ok()?;
        for i in 0..d {
            y[i] += Complex64::new(step[i], step[d + i]);
        }
        for j in 0..k {
            r[j] += step[2 * d + j];
        }
    }
    let (f, _) = residual(&y, &r);
    (f.amax() <= 1e-12 * scale).then_some((y, r))
}

/// `F_D(psi) = max_s |<s, psi>|^2` with the lowest index winning ties.
pub fn fidelity(dict: &Dictionary, psi: &[Complex64]) -> Result<(f64, usize)> {
    dict.max_overlap(psi)
}

/// `psi / sqrt(F_D(psi))`, the dual-feasible point behind `xi >= 1/F`.
pub fn self_witness(dict: &Dictionary, psi: &[Complex64]) -> Result<Vec<Complex64>> {
    let (f, _) = fidelity(dict, psi)?;
    if f <= 0.0 {
        return Err(Error::Validation("state is orthogonal to every word".into()));
    }
    Ok(vector::scale(psi, Complex64::new(1.0 / f.sqrt(), 0.0)))
}

/// `(cos b, e^{i pi/4} sin b)` with `b = arccos(1/sqrt 3) / 2`.
pub fn magic_t_state() -> Vec<Complex64> {
    let beta = 0.5 * (1.0 / 3f64.sqrt()).acos();
    vec![
        Complex64::new(beta.cos(), 0.0),
        Complex64::from_polar(beta.sin(), std::f64::consts::FRAC_PI_4),
    ]
}
