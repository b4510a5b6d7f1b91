//! Seeded experiment harness.
//!
//! Each experiment maps a trial index to a [`TrialRecord`] using its own
//! random stream (see [`crate::rng`]), runs trials on the rayon pool and
//! collects them in trial order, so output is identical for any thread count.
//! Summaries are plain functions of the records.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::{maximally_entangled, Dictionary};
use crate::error::{Error, Result};
use crate::extent::{self, ExtentOptions, ExtentSolution};
use crate::rng::{haar_sample, trial_rng};
use crate::stab::{self, group_into_bases};
use crate::vector;
use crate::witness;

pub const SCHEMA_VERSION: u32 = 1;

pub const CONCENTRATION: &str = "concentration";
pub const PRODUCT: &str = "product";
pub const ADD_PHI: &str = "add-phi";
pub const OPTIMALITY: &str = "optimality";

/// States per batch in the streamed fidelity sweep.
const FIDELITY_BATCH: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonParameter(f64);

impl EpsilonParameter {
    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 {
            Ok(EpsilonParameter(eps))
        } else {
            Err(Error::Validation(format!("epsilon must be positive and finite, got {eps}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone)]
pub struct RunSettings {
    pub trials: usize,
    pub seed: u64,
    /// Adds `wall_time_ms` to every record, which makes output nondeterministic.
    pub record_wall_time: bool,
    pub extent: ExtentOptions,
}

impl RunSettings {
    pub fn new(trials: usize, seed: u64) -> Self {
        RunSettings { trials, seed, record_wall_time: false, extent: ExtentOptions::default() }
    }
}

/// One trial. Fields that an experiment does not produce are omitted from JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment: String,
    pub seed: u64,
    pub trial: u64,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_norm_sqr: Option<f64>,
    /// `|<Phi, y (x) y*>|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_overlap: Option<f64>,
    /// `||y||^2 >= xi >= 1/F` held.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_chain: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigger: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_suspect: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_product: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_augmented: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decreased: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_first: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_second: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_per_basis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slackness_violation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl TrialRecord {
    fn new(experiment: &str, seed: u64, trial: u64, n: usize) -> Self {
        TrialRecord { experiment: experiment.into(), seed, trial, n, ..Default::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report<S> {
    pub records: Vec<TrialRecord>,
    pub summary: S,
}

fn run_trials(
    experiment: &str,
    n: usize,
    settings: &RunSettings,
    trial: impl Fn(&mut TrialRecord, &mut ChaCha8Rng) -> Result<()> + Sync,
) -> Result<Vec<TrialRecord>> {
    (0..settings.trials as u64)
        .into_par_iter()
        .map(|t| {
            let start = Instant::now();
            let mut rng = trial_rng(experiment, settings.seed, t);
            let mut record = TrialRecord::new(experiment, settings.seed, t, n);
            trial(&mut record, &mut rng)?;
            if settings.record_wall_time {
                record.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            Ok(record)
        })
        .collect()
}

pub fn write_json_lines<W: Write>(records: &[TrialRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_json_lines(text: &str) -> Result<Vec<TrialRecord>> {
    let mut offset = 0;
    let mut out = Vec::new();
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if !trimmed.is_empty() {
            out.push(serde_json::from_str(trimmed).map_err(|e| Error::Parse {
                offset: offset + e.column().saturating_sub(1),
                message: e.to_string(),
            })?);
        }
        offset += line.len();
    }
    Ok(out)
}

/// Column order of [`write_csv`], matching the field order of [`TrialRecord`].
pub const CSV_COLUMNS: &[&str] = &[
    "experiment",
    "seed",
    "trial",
    "n",
    "fidelity",
    "event",
    "xi",
    "relative_gap",
    "certified",
    "witness_norm_sqr",
    "phi_overlap",
    "bound_chain",
    "trigger",
    "interior",
    "boundary_suspect",
    "xi_product",
    "xi_augmented",
    "decreased",
    "monotone",
    "xi_first",
    "xi_second",
    "deviation",
    "support_size",
    "max_per_basis",
    "slackness_violation",
    "wall_time_ms",
];

/// One row per record; fields the experiment does not produce are empty.
pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(to_io)?;
    for r in records {
        let value = serde_json::to_value(r).map_err(std::io::Error::from)?;
        let row = CSV_COLUMNS.iter().map(|k| match value.get(*k) {
            None => String::new(),
            Some(serde_json::Value::String(s)) => s.clone(),
            Some(v) => v.to_string(),
        });
        w.write_record(row).map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}

fn sample_mean_sigma(hits: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 0.0);
    }
    let p = hits as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

// ---------------------------------------------------------------------------
// Concentration of the dictionary fidelity.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationSummary {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub n: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub dictionary_size: u64,
    /// `1/(sqrt(d) + eps)`.
    pub threshold: f64,
    pub event_count: usize,
    /// Fraction of trials with `F <= threshold`.
    pub frequency: f64,
    pub sigma: f64,
    /// `|D| exp(-(d-1)/(sqrt(d)+eps))`, a bound on `Pr[F > threshold]`.
    pub union_bound: f64,
    pub mean_fidelity: f64,
    /// `frequency >= 1 - union_bound - 3 sigma`.
    pub consistent_with_bound: bool,
}

pub fn concentration_threshold(n: usize, eps: EpsilonParameter) -> f64 {
    1.0 / (((1u64 << n) as f64).sqrt() + eps.value())
}

pub fn union_bound(n: usize, eps: EpsilonParameter) -> f64 {
    let d = (1u64 << n) as f64;
    stab::stabilizer_count(n) as f64 * (-(d - 1.0) / (d.sqrt() + eps.value())).exp()
}

/// Stabilizer fidelity of Haar states against `1/(sqrt(2^n) + eps)`, for
/// `n <= 5`. The five-qubit case streams the dictionary instead of storing it.
pub fn concentration_experiment(
    n: usize,
    eps: EpsilonParameter,
    settings: &RunSettings,
) -> Result<Report<ConcentrationSummary>> {
    if n == 0 || n > stab::MAX_QUBITS {
        return Err(Error::Capacity(format!("concentration supports 1 <= n <= {}, got {n}", stab::MAX_QUBITS)));
    }
    let d = 1usize << n;
    let threshold = concentration_threshold(n, eps);
    let states: Vec<Vec<Complex64>> = (0..settings.trials as u64)
        .map(|t| haar_sample(d, &mut trial_rng(CONCENTRATION, settings.seed, t)))
        .collect();
    let fidelities: Vec<f64> = if n <= stab::MAX_MATERIALIZED_QUBITS {
        let dict = stab::enumerate_stabilizer_states(n)?;
        states.par_iter().map(|psi| dict.max_overlap(psi).map(|(f, _)| f)).collect::<Result<_>>()?
    } else {
        let batches: Vec<Vec<(f64, usize)>> = states
            .par_chunks(FIDELITY_BATCH)
            .map(|chunk| stab::stabilizer_fidelities_streamed(n, chunk))
            .collect::<Result<_>>()?;
        batches.into_iter().flatten().map(|(f, _)| f).collect()
    };
    let records: Vec<TrialRecord> = fidelities
        .iter()
        .enumerate()
        .map(|(t, &f)| TrialRecord {
            fidelity: Some(f),
            event: Some(f <= threshold),
            ..TrialRecord::new(CONCENTRATION, settings.seed, t as u64, n)
        })
        .collect();
    let summary = summarize_concentration(&records, n, eps, settings.seed);
    Ok(Report { records, summary })
}

pub fn summarize_concentration(
    records: &[TrialRecord],
    n: usize,
    eps: EpsilonParameter,
    seed: u64,
) -> ConcentrationSummary {
    let trials = records.len();
    let event_count = records.iter().filter(|r| r.event == Some(true)).count();
    let (frequency, sigma) = sample_mean_sigma(event_count, trials);
    let bound = union_bound(n, eps);
    let mean_fidelity = records.iter().filter_map(|r| r.fidelity).sum::<f64>() / trials.max(1) as f64;
    ConcentrationSummary {
        schema_version: SCHEMA_VERSION,
        experiment: CONCENTRATION.into(),
        seed,
        n,
        epsilon: eps.value(),
        trials,
        dictionary_size: stab::stabilizer_count(n),
        threshold: concentration_threshold(n, eps),
        event_count,
        frequency,
        sigma,
        union_bound: bound,
        mean_fidelity,
        consistent_with_bound: frequency >= 1.0 - bound - 3.0 * sigma,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CdfPoint {
    pub x: f64,
    /// Monte-Carlo estimate of `Pr[|<e_0, psi>|^2 >= x]`.
    pub empirical: f64,
    /// `(1 - x)^(d-1)`.
    pub exact: f64,
    pub sigma: f64,
    pub within_three_sigma: bool,
}

/// Tail of the overlap of a Haar state in `C^d` with a fixed unit vector.
pub fn overlap_tail_check(d: usize, xs: &[f64], trials: usize, seed: u64) -> Vec<CdfPoint> {
    let overlaps: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| haar_sample(d, &mut trial_rng("overlap-tail", seed, t))[0].norm_sqr())
        .collect();
    xs.iter()
        .map(|&x| {
            let hits = overlaps.iter().filter(|&&o| o >= x).count();
            let (empirical, _) = sample_mean_sigma(hits, trials);
            let exact = (1.0 - x).powi(d as i32 - 1);
            let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
            CdfPoint { x, empirical, exact, sigma, within_three_sigma: (empirical - exact).abs() <= 3.0 * sigma }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Multiplicativity on product dictionaries.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductSummary {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub trials: usize,
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub all_certified: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductExtent {
    pub xi_first: f64,
    pub xi_second: f64,
    pub xi_product: f64,
    pub deviation: f64,
    pub certified: bool,
}

/// `xi(psi1)`, `xi(psi2)` and `xi(psi1 (x) psi2)` on `D1 (x) D2`.
pub fn product_extent(
    d1: &Dictionary,
    d2: &Dictionary,
    product: &Dictionary,
    psi1: &[Complex64],
    psi2: &[Complex64],
    opts: &ExtentOptions,
) -> Result<ProductExtent> {
    let a = extent::extent_with(d1, psi1, opts)?;
    let b = extent::extent_with(d2, psi2, opts)?;
    let p = extent::extent_with(product, &vector::kron(psi1, psi2), opts)?;
    Ok(ProductExtent {
        xi_first: a.xi,
        xi_second: b.xi,
        xi_product: p.xi,
        deviation: (p.xi - a.xi * b.xi).abs(),
        certified: a.is_certified() && b.is_certified() && p.is_certified(),
    })
}

pub fn product_multiplicativity_experiment(
    d1: &Dictionary,
    d2: &Dictionary,
    settings: &RunSettings,
) -> Result<Report<ProductSummary>> {
    let product = d1.tensor(d2);
    let n = (product.dim() as f64).log2().round() as usize;
    let records = run_trials(PRODUCT, n, settings, |r, rng| {
        let psi1 = haar_sample(d1.dim(), rng);
        let psi2 = haar_sample(d2.dim(), rng);
        let p = product_extent(d1, d2, &product, &psi1, &psi2, &settings.extent)?;
        r.xi_first = Some(p.xi_first);
        r.xi_second = Some(p.xi_second);
        r.xi_product = Some(p.xi_product);
        r.deviation = Some(p.deviation);
        r.certified = Some(p.certified);
        Ok(())
    })?;
    let summary = summarize_product(&records, settings.seed);
    Ok(Report { records, summary })
}

pub fn summarize_product(records: &[TrialRecord], seed: u64) -> ProductSummary {
    let devs: Vec<f64> = records.iter().filter_map(|r| r.deviation).collect();
    ProductSummary {
        schema_version: SCHEMA_VERSION,
        experiment: PRODUCT.into(),
        seed,
        trials: records.len(),
        max_deviation: devs.iter().copied().fold(0.0, f64::max),
        mean_deviation: devs.iter().sum::<f64>() / devs.len().max(1) as f64,
        all_certified: records.iter().all(|r| r.certified == Some(true)),
    }
}

// ---------------------------------------------------------------------------
// Adding the maximally entangled word to a product dictionary.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AddPhiMode {
    /// `D = STAB_n` on each factor.
    Stabilizer,
    /// `D` = computational basis on each factor.
    Synthetic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AddPhiSummary {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub n: usize,
    pub mode: AddPhiMode,
    pub trials: usize,
    pub trigger_count: usize,
    pub interior_count: usize,
    pub decrease_count: usize,
    pub boundary_suspect_count: usize,
    pub bound_chain_holds: bool,
    pub monotone: bool,
    /// Every triggered interior trial decreased beyond the summed gaps.
    pub decrease_confirmed: bool,
}

/// Outcome of one state in the add-phi experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AddPhiOutcome {
    pub fidelity: f64,
    pub xi: f64,
    pub witness_norm_sqr: f64,
    pub phi_overlap: f64,
    pub bound_chain: bool,
    pub trigger: bool,
    pub interior: Option<bool>,
    pub boundary_suspect: Option<bool>,
    pub xi_product: Option<f64>,
    pub xi_augmented: Option<f64>,
    pub decreased: Option<bool>,
    pub monotone: Option<bool>,
    pub certified: bool,
}

struct AddPhiSetup {
    base: Dictionary,
    product: Dictionary,
    augmented: Dictionary,
    phi: Vec<Complex64>,
}

impl AddPhiSetup {
    fn new(n: usize, mode: AddPhiMode, big: bool) -> Result<Self> {
        let limit = if big { 3 } else { 2 };
        if n == 0 || n > limit {
            return Err(Error::Capacity(format!(
                "add-phi supports 1 <= n <= {limit}{}, got {n}",
                if big { "" } else { " (n = 3 needs the big flag)" }
            )));
        }
        let base = match mode {
            AddPhiMode::Stabilizer => stab::enumerate_stabilizer_states(n)?,
            AddPhiMode::Synthetic => Dictionary::new((0..1 << n).map(|k| vector::basis_vector(1 << n, k)).collect())?,
        };
        let product = base.tensor(&base);
        let phi = maximally_entangled(2, n)?;
        let augmented = product.add_labeled_word(&phi, Some("phi".into()))?;
        Ok(AddPhiSetup { base, product, augmented, phi })
    }
}

fn add_phi_outcome(setup: &AddPhiSetup, psi: &[Complex64], opts: &ExtentOptions) -> Result<AddPhiOutcome> {
    let sol = extent::extent_with(&setup.base, psi, opts)?;
    let (fidelity, _) = extent::fidelity(&setup.base, psi)?;
    let y = &sol.witness;
    let witness_norm_sqr = vector::norm_sqr(y);
    let tol = 1e-6 * sol.xi.max(1.0);
    let bound_chain = witness_norm_sqr >= sol.xi - tol && sol.xi >= 1.0 / fidelity - tol;
    let y_pair = vector::kron(y, &vector::conj(y));
    let phi_overlap = vector::inner(&setup.phi, &y_pair).norm();
    let trigger = phi_overlap > 1.0 + witness::SLACK_TOL;
    let mut out = AddPhiOutcome {
        fidelity,
        xi: sol.xi,
        witness_norm_sqr,
        phi_overlap,
        bound_chain,
        trigger,
        interior: None,
        boundary_suspect: None,
        xi_product: None,
        xi_augmented: None,
        decreased: None,
        monotone: None,
        certified: sol.is_certified(),
    };
    if !trigger {
        return Ok(out);
    }
    let pair = vector::kron(psi, &vector::conj(psi));
    let prod = extent::extent_with(&setup.product, &pair, opts)?;
    let membership = witness::membership_from_solution(&setup.product, &y_pair, &pair, &prod);
    out.interior = Some(membership.in_interior);
    out.boundary_suspect = Some(membership.boundary_suspect);
    out.xi_product = Some(prod.xi);
    out.certified &= prod.is_certified();
    if membership.in_interior {
        let aug = extent::extent_with(&setup.augmented, &pair, opts)?;
        out.xi_augmented = Some(aug.xi);
        out.decreased = Some(prod.l1 - aug.l1 > prod.gap.abs() + aug.gap.abs());
        out.monotone = Some(aug.l1 <= prod.l1 + prod.gap.abs() + aug.gap.abs());
        out.certified &= aug.is_certified();
    }
    Ok(out)
}

/// Per-state analysis of the add-phi mechanism at a fixed state.
pub fn add_phi_single(n: usize, mode: AddPhiMode, psi: &[Complex64], opts: &ExtentOptions) -> Result<AddPhiOutcome> {
    add_phi_outcome(&AddPhiSetup::new(n, mode, n == 3)?, psi, opts)
}

/// For Haar `psi`, tests whether `Phi` cuts off `y (x) y*` and, when it does
/// and `psi (x) psi*` lies in the interior of the normal cone, re-solves with
/// `Phi` added. `big` admits `n = 3`.
pub fn add_phi_experiment(
    n: usize,
    mode: AddPhiMode,
    big: bool,
    settings: &RunSettings,
) -> Result<Report<AddPhiSummary>> {
    let setup = AddPhiSetup::new(n, mode, big)?;
    let records = run_trials(ADD_PHI, n, settings, |r, rng| {
        let psi = haar_sample(setup.base.dim(), rng);
        let o = add_phi_outcome(&setup, &psi, &settings.extent)?;
        r.fidelity = Some(o.fidelity);
        r.xi = Some(o.xi);
        r.witness_norm_sqr = Some(o.witness_norm_sqr);
        r.phi_overlap = Some(o.phi_overlap);
        r.bound_chain = Some(o.bound_chain);
        r.trigger = Some(o.trigger);
        r.interior = o.interior;
        r.boundary_suspect = o.boundary_suspect;
        r.xi_product = o.xi_product;
        r.xi_augmented = o.xi_augmented;
        r.decreased = o.decreased;
        r.monotone = o.monotone;
        r.certified = Some(o.certified);
        Ok(())
    })?;
    let summary = summarize_add_phi(&records, n, mode, settings.seed);
    Ok(Report { records, summary })
}

pub fn summarize_add_phi(records: &[TrialRecord], n: usize, mode: AddPhiMode, seed: u64) -> AddPhiSummary {
    let count = |f: &dyn Fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count();
    AddPhiSummary {
        schema_version: SCHEMA_VERSION,
        experiment: ADD_PHI.into(),
        seed,
        n,
        mode,
        trials: records.len(),
        trigger_count: count(&|r| r.trigger == Some(true)),
        interior_count: count(&|r| r.interior == Some(true)),
        decrease_count: count(&|r| r.decreased == Some(true)),
        boundary_suspect_count: count(&|r| r.boundary_suspect == Some(true)),
        bound_chain_holds: records.iter().all(|r| r.bound_chain != Some(false)),
        monotone: records.iter().all(|r| r.monotone != Some(false)),
        decrease_confirmed: records.iter().all(|r| r.interior != Some(true) || r.decreased == Some(true)),
    }
}

// ---------------------------------------------------------------------------
// One support word per stabilizer basis.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimalitySummary {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub n: usize,
    pub trials: usize,
    pub max_per_basis: usize,
    pub certified_count: usize,
    pub max_slackness_violation: f64,
}

/// Largest number of support words of `sol` inside one basis.
pub fn max_support_per_basis(labels: &[usize], sol: &ExtentSolution) -> usize {
    let mut counts = std::collections::HashMap::new();
    for &i in &sol.support {
        *counts.entry(labels[i]).or_insert(0usize) += 1;
    }
    counts.into_values().max().unwrap_or(0)
}

pub fn optimality_condition_check(n: usize, settings: &RunSettings) -> Result<Report<OptimalitySummary>> {
    if n == 0 || n > 2 {
        return Err(Error::Capacity(format!("optimality check supports 1 <= n <= 2, got {n}")));
    }
    let dict = stab::enumerate_stabilizer_states(n)?;
    let labels = group_into_bases(&dict)?.labels(dict.len());
    let records = run_trials(OPTIMALITY, n, settings, |r, rng| {
        let psi = haar_sample(dict.dim(), rng);
        let sol = extent::extent_with(&dict, &psi, &settings.extent)?;
        let slack = witness::check_complementary_slackness(&dict, &sol.coefficients, &sol.witness)?;
        r.xi = Some(sol.xi);
        r.relative_gap = Some(sol.relative_gap());
        r.certified = Some(sol.is_certified());
        r.support_size = Some(sol.support.len());
        r.max_per_basis = Some(max_support_per_basis(&labels, &sol));
        r.slackness_violation = Some(slack.max_violation());
        Ok(())
    })?;
    let summary = summarize_optimality(&records, n, settings.seed);
    Ok(Report { records, summary })
}

pub fn summarize_optimality(records: &[TrialRecord], n: usize, seed: u64) -> OptimalitySummary {
    OptimalitySummary {
        schema_version: SCHEMA_VERSION,
        experiment: OPTIMALITY.into(),
        seed,
        n,
        trials: records.len(),
        max_per_basis: records.iter().filter_map(|r| r.max_per_basis).max().unwrap_or(0),
        certified_count: records.iter().filter(|r| r.certified == Some(true)).count(),
        max_slackness_violation: records.iter().filter_map(|r| r.slackness_violation).fold(0.0, f64::max),
    }
}

// ---------------------------------------------------------------------------
// Rewriting two words of one basis with three words of two others.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleBasisImprovement {
    pub coefficients: [Complex64; 3],
    /// `(1, sgn x)/sqrt 2`, `(1, i sgn y)/sqrt 2` and `e_0`.
    pub words: [[Complex64; 2]; 3],
    pub l1_before: f64,
    pub l1_after: f64,
}

impl SingleBasisImprovement {
    pub fn reconstruct(&self) -> [Complex64; 2] {
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for (c, w) in self.coefficients.iter().zip(&self.words) {
            out[0] += c * w[0];
            out[1] += c * w[1];
        }
        out
    }
}

/// Replaces `a e_0 + z e_1` (l1 cost `|a| + |z|`) by a cheaper combination of
/// the X- and Y-basis words and `e_0`. With `z/a = x + iy` the new cost is
/// `|a| (1 + (sqrt 2 - 1)(|x| + |y|))`; requires `a != 0` and `|x| + |y| <= 1`.
pub fn improve_single_basis_pair(a: Complex64, z: Complex64) -> Result<SingleBasisImprovement> {
    if a == Complex64::new(0.0, 0.0) || !a.is_finite() || !z.is_finite() {
        return Err(Error::Precondition("the e_0 coefficient must be nonzero and finite".into()));
    }
    let r = z / a;
    let (x, y) = (r.re, r.im);
    let mass = x.abs() + y.abs();
    if mass > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!(
            "|Re(z/a)| + |Im(z/a)| = {mass} exceeds 1; swap the roles of e_0 and e_1"
        )));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sx = if x < 0.0 { -1.0 } else { 1.0 };
    let sy = if y < 0.0 { -1.0 } else { 1.0 };
    let words = [
        [Complex64::new(h, 0.0), Complex64::new(sx * h, 0.0)],
        [Complex64::new(h, 0.0), Complex64::new(0.0, sy * h)],
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    ];
    let s2 = std::f64::consts::SQRT_2;
    let coefficients = [a * (s2 * x.abs()), a * (s2 * y.abs()), a * (1.0 - mass).max(0.0)];
    Ok(SingleBasisImprovement {
        coefficients,
        words,
        l1_before: a.norm() + z.norm(),
        l1_after: coefficients.iter().map(|c| c.norm()).sum(),
    })
}
