//! Geometry of dual witnesses.
//!
//! `M_D = {y : |<s,y>| <= 1 for all s}` is the dual feasible set. A point
//! `y` is extreme iff its active words `{s : |<s,y>| = 1}` span `C^d`. The
//! normal cone `C_y` holds the states for which `y` is an optimal witness,
//! and its interior the states for which `y` is the unique one.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::extent::{self, ExtentOptions, ExtentSolution};
use crate::vector;

pub const ACTIVITY_TOL: f64 = extent::ACTIVITY_TOL;
/// Singular values above `RANK_TOL * sigma_max` count toward the rank.
pub const RANK_TOL: f64 = 1e-7;
/// Margin required on `|<w,y>| > 1` before a word is said to cut off `y`.
pub const SLACK_TOL: f64 = 1e-6;
/// Agreement of `Re <x,y>` with `sqrt(xi)` for normal-cone membership.
pub const CONE_TOL: f64 = 1e-6;
/// Sup-distance between a recomputed witness and `y` for interior membership.
pub const WITNESS_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSet {
    pub indices: Vec<usize>,
    /// `phi_s` in `(-pi, pi]` with `e^{i phi_s} <s,y> = |<s,y>|`.
    pub phases: Vec<f64>,
}

impl ActiveSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Generators `e^{i phi_s} s` of the normal cone.
    pub fn aligned_words(&self, dict: &Dictionary) -> Vec<Vec<Complex64>> {
        self.indices
            .iter()
            .zip(&self.phases)
            .map(|(&i, &phi)| vector::scale(dict.word(i), Complex64::from_polar(1.0, -phi)))
            .collect()
    }
}

fn feasible_overlaps(dict: &Dictionary, y: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    if y.len() != dict.dim() {
        return Err(Error::Dimension { expected: dict.dim(), found: y.len() });
    }
    let overlaps: Vec<Complex64> = dict.iter().map(|s| vector::inner(s, y)).collect();
    let max = overlaps.iter().map(|o| o.norm()).fold(0.0, f64::max);
    if max > 1.0 + tol {
        return Err(Error::Feasibility { overlap: max });
    }
    Ok(overlaps)
}

pub fn active_set(dict: &Dictionary, y: &[Complex64], activity_tol: f64) -> Result<ActiveSet> {
    let overlaps = feasible_overlaps(dict, y, activity_tol)?;
    let mut indices = Vec::new();
    let mut phases = Vec::new();
    for (i, o) in overlaps.iter().enumerate() {
        if o.norm() >= 1.0 - activity_tol {
            let mut phi = -o.arg();
            if phi <= -std::f64::consts::PI {
                phi += 2.0 * std::f64::consts::PI;
            }
            indices.push(i);
            phases.push(phi);
        }
    }
    Ok(ActiveSet { indices, phases })
}

/// Singular values of the `d x |idx|` matrix of the selected words, descending.
fn singular_values(dict: &Dictionary, indices: &[usize]) -> Vec<f64> {
    if indices.is_empty() {
        return vec![];
    }
    let d = dict.dim();
    let m = DMatrix::from_fn(d, indices.len(), |r, c| dict.word(indices[c])[r]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank of the selected words at `RANK_TOL`.
pub fn span_rank(dict: &Dictionary, indices: &[usize]) -> usize {
    let sv = singular_values(dict, indices);
    let Some(&top) = sv.first() else { return 0 };
    sv.iter().filter(|&&s| s > RANK_TOL * top).count()
}

pub fn spans(dict: &Dictionary, indices: &[usize]) -> bool {
    span_rank(dict, indices) == dict.dim()
}

/// Extreme point test: the active words span `C^d`.
pub fn is_extreme_point(dict: &Dictionary, y: &[Complex64]) -> Result<bool> {
    let active = active_set(dict, y, ACTIVITY_TOL)?;
    Ok(spans(dict, &active.indices))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlacknessReport {
    /// `|<s,y> - c_s/|c_s||` on the support, zero elsewhere.
    pub condition_one: Vec<f64>,
    /// `|c_s|` on words with `|<s,y>| < 1 - activity_tol`, zero elsewhere.
    pub condition_two: Vec<f64>,
    pub max_condition_one: f64,
    pub max_condition_two: f64,
}

impl SlacknessReport {
    pub fn max_violation(&self) -> f64 {
        self.max_condition_one.max(self.max_condition_two)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

/// Per-word check of: (I) `c_s != 0 => <s,y> = c_s/|c_s|`,
/// (II) `|<s,y>| < 1 => c_s = 0`.
pub fn check_complementary_slackness(
    dict: &Dictionary,
    coefficients: &[Complex64],
    y: &[Complex64],
) -> Result<SlacknessReport> {
    if coefficients.len() != dict.len() {
        return Err(Error::Dimension { expected: dict.len(), found: coefficients.len() });
    }
    let overlaps = feasible_overlaps(dict, y, ACTIVITY_TOL)?;
    let mut one = vec![0.0; dict.len()];
    let mut two = vec![0.0; dict.len()];
    for (i, (c, o)) in coefficients.iter().zip(&overlaps).enumerate() {
        let mass = c.norm();
        if mass > extent::SUPPORT_TOL {
            one[i] = (o - c / mass).norm();
        }
        if o.norm() < 1.0 - ACTIVITY_TOL {
            two[i] = mass;
        }
    }
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(SlacknessReport {
        max_condition_one: max(&one),
        max_condition_two: max(&two),
        condition_one: one,
        condition_two: two,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Uniqueness {
    Unique,
    /// The support does not span; another optimum may or may not exist.
    Unknown,
}

/// `Unique` when the support of the decomposition spans `C^d`.
pub fn witness_is_unique(dict: &Dictionary, solution: &ExtentSolution) -> Uniqueness {
    if spans(dict, &solution.support) {
        Uniqueness::Unique
    } else {
        Uniqueness::Unknown
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeMembership {
    pub in_cone: bool,
    pub in_interior: bool,
    /// Set when a tolerance decision was marginal; verdicts are then `false`.
    pub boundary_suspect: bool,
    /// `sqrt(xi_D(x))`.
    pub value: f64,
    /// `Re <x, y>`.
    pub alignment: f64,
}

/// Decides `x in C_y` and `x in int(C_y)` by solving `extent(D, x)`.
pub fn normal_cone_membership(dict: &Dictionary, y: &[Complex64], x: &[Complex64]) -> Result<ConeMembership> {
    feasible_overlaps(dict, y, ACTIVITY_TOL)?;
    let sol = extent::extent_with(dict, x, &ExtentOptions::default())?;
    Ok(membership_from_solution(dict, y, x, &sol))
}

/// As [`normal_cone_membership`], reusing an existing solve of `extent(D, x)`.
pub fn membership_from_solution(
    dict: &Dictionary,
    y: &[Complex64],
    x: &[Complex64],
    sol: &ExtentSolution,
) -> ConeMembership {
    let alignment = vector::real_inner(x, y);
    let value = sol.l1;
    let scale = value.max(1.0);
    let dev = (alignment - value).abs();
    let in_cone = dev <= CONE_TOL * scale;
    let near_cone = dev <= 10.0 * CONE_TOL * scale;

    let sv = singular_values(dict, &sol.support);
    let ratio = if sv.len() >= dict.dim() && sv[0] > 0.0 { sv[dict.dim() - 1] / sv[0] } else { 0.0 };
    let unique = ratio > RANK_TOL;
    let rank_marginal = ratio > RANK_TOL / 10.0 && ratio < RANK_TOL * 10.0;
    let distance = vector::max_abs_diff(&sol.witness, y);
    let witness_matches = distance <= WITNESS_TOL;
    let distance_marginal = distance > WITNESS_TOL / 10.0 && distance < WITNESS_TOL * 10.0;

    let in_interior = in_cone && unique && witness_matches;
    let boundary_suspect = (near_cone && !in_cone) || (in_cone && !in_interior && (rank_marginal || distance_marginal));
    ConeMembership { in_cone, in_interior, boundary_suspect, value, alignment }
}

pub fn in_normal_cone(dict: &Dictionary, y: &[Complex64], x: &[Complex64]) -> Result<bool> {
    Ok(normal_cone_membership(dict, y, x)?.in_cone)
}

pub fn in_interior(dict: &Dictionary, y: &[Complex64], x: &[Complex64]) -> Result<bool> {
    Ok(normal_cone_membership(dict, y, x)?.in_interior)
}

/// Predicts `xi_{D ∪ {w}}(psi) < xi_D(psi)` for the state behind `solution`:
/// true iff its witness is unique and `|<w,y>| > 1 + SLACK_TOL`.
pub fn word_addition_strictly_decreases(
    dict: &Dictionary,
    solution: &ExtentSolution,
    w: &[Complex64],
) -> Result<bool> {
    if w.len() != dict.dim() {
        return Err(Error::Dimension { expected: dict.dim(), found: w.len() });
    }
    let norm = vector::norm(w);
    if (norm * norm - 1.0).abs() > crate::dictionary::NORM_TOL {
        return Err(Error::Normalization { index: dict.len(), norm });
    }
    let cuts = vector::inner(w, &solution.witness).norm() > 1.0 + SLACK_TOL;
    Ok(cuts && witness_is_unique(dict, solution) == Uniqueness::Unique)
}
