//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::c;
use extentlab::experiments::{self, AddPhiMode, EpsilonParameter, RunSettings, TrialRecord};
use extentlab::extent::{extent_with, self_witness};
use extentlab::rng::{haar_sample, trial_rng};
use extentlab::socp::{self, SolverOptions, SolverStatus};
use extentlab::stab::{enumerate_stabilizer_states, stabilizer_count};
use extentlab::witness::{self, Uniqueness};
use extentlab::{extent, fidelity, magic_t_state, vector, Dictionary, ExtentOptions};
use rand::Rng;

struct Check {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, Duration, fn() -> Check);

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check { pass, detail: detail.into() }
}

fn random_dictionary<R: Rng>(rng: &mut R, d: usize, m: usize) -> Dictionary {
    Dictionary::new((0..m).map(|_| haar_sample(d, rng)).collect()).unwrap()
}

/// `2^n prod_{k=1..n} (2^k + 1)`.
fn count_formula(n: usize) -> u64 {
    (1..=n as u32).fold(1u64 << n, |acc, k| acc * ((1u64 << k) + 1))
}

fn dictionary_counts() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in 1..=4 {
        let dict = enumerate_stabilizer_states(n).unwrap();
        let expected = count_formula(n);
        ok &= dict.len() as u64 == expected && stabilizer_count(n) == expected;
        if n <= 3 {
            let orbit = common::clifford_orbit(n);
            ok &= orbit.len() == dict.len() && orbit.iter().all(|v| dict.contains(v));
        }
        parts.push(format!("n={n}: {}", dict.len()));
    }
    check(ok, parts.join(", "))
}

fn magic_state_extent() -> Check {
    let d = enumerate_stabilizer_states(1).unwrap();
    let t = magic_t_state();
    let f_exact = (1.0 + 1.0 / 3f64.sqrt()) / 2.0;
    let xi_exact = 2.0 / (1.0 + 1.0 / 3f64.sqrt());
    let sol = extent(&d, &t).unwrap();
    let (f, _) = fidelity(&d, &t).unwrap();
    check(
        (sol.xi - xi_exact).abs() <= 1e-6 && (f - f_exact).abs() <= 1e-10 && sol.is_certified(),
        format!("xi = {:.9} (|err| {:.1e}), F = {:.12} (|err| {:.1e})", sol.xi, (sol.xi - xi_exact).abs(), f, (f - f_exact).abs()),
    )
}

fn solver_certification() -> Check {
    let opts = SolverOptions::default();
    let (mut worst_gap, mut worst_res, mut worst_oracle) = (0.0f64, 0.0f64, 0.0f64);
    let mut ok = true;
    for t in 0..50 {
        let mut rng = trial_rng("acceptance-solver", 0, t);
        let d = rng.gen_range(2..=8);
        let m = rng.gen_range(d + 1..=200);
        let dict = random_dictionary(&mut rng, d, m);
        let psi = haar_sample(d, &mut rng);
        let problem = socp::build_extent_socp(&dict, &psi).unwrap();
        let sol = socp::solve(&problem, &opts).unwrap();
        worst_gap = worst_gap.max(sol.relative_gap);
        worst_res = worst_res.max(sol.primal_residual).max(sol.dual_residual);
        let xi = sol.primal_objective * sol.primal_objective;
        let oracle = common::l1_oracle(&dict, &psi);
        worst_oracle = worst_oracle.max((oracle * oracle - xi).abs());
        ok &= sol.status == SolverStatus::Optimal;
    }
    ok &= worst_gap <= 1e-7 && worst_res <= 1e-8 && worst_oracle <= 1e-4;
    check(
        ok,
        format!("max rel gap {worst_gap:.1e}, max residual {worst_res:.1e}, max |xi - oracle| {worst_oracle:.1e}"),
    )
}

fn fidelity_lower_bound() -> Check {
    let mut worst = f64::INFINITY;
    for t in 0..500 {
        let mut rng = trial_rng("acceptance-lower-bound", 0, t);
        let d = rng.gen_range(2..=8);
        let m = rng.gen_range(d + 1..=40);
        let dict = random_dictionary(&mut rng, d, m);
        let psi = haar_sample(d, &mut rng);
        let sol = extent(&dict, &psi).unwrap();
        let (f, _) = fidelity(&dict, &psi).unwrap();
        worst = worst.min(sol.xi - 1.0 / f);
    }
    check(worst >= -1e-6, format!("min xi - 1/F = {worst:.3e} over 500 pairs"))
}

fn multiplicativity() -> Check {
    let d = enumerate_stabilizer_states(1).unwrap();
    let r = experiments::product_multiplicativity_experiment(&d, &d, &RunSettings::new(100, 0)).unwrap();
    let max = r.summary.max_deviation;
    check(max <= 1e-5 && r.summary.all_certified, format!("max deviation {max:.2e} over 100 pairs"))
}

fn word_addition() -> Check {
    let opts = ExtentOptions::default();
    let d = Dictionary::new(vec![vector::basis_vector(2, 0), vector::basis_vector(2, 1)]).unwrap();
    let psi = [c(0.6, 0.0), c(0.8, 0.0)];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let w = [c(h, 0.0), c(h, 0.0)];
    let sol = extent(&d, &psi).unwrap();
    let predicted = witness::word_addition_strictly_decreases(&d, &sol, &w).unwrap();
    let resolved = extent(&d.add_word(&w).unwrap(), &psi).unwrap();
    let constructed = predicted && resolved.xi < 1.96 - 1e-4;

    let (mut agree, mut decided, mut false_pos) = (0, 0, 0);
    for t in 0..50 {
        let mut rng = trial_rng("acceptance-word-addition", 0, t);
        let dim = rng.gen_range(2..=4);
        let m = rng.gen_range(dim + 1..=12);
        let dict = random_dictionary(&mut rng, dim, m);
        let psi = haar_sample(dim, &mut rng);
        let sol = extent_with(&dict, &psi, &opts).unwrap();
        let w = if t % 2 == 0 {
            let y = &sol.witness;
            vector::scale(y, c(1.0 / vector::norm(y), 0.0))
        } else {
            haar_sample(dim, &mut rng)
        };
        let predicted = witness::word_addition_strictly_decreases(&dict, &sol, &w).unwrap();
        let after = extent_with(&dict.add_word(&w).unwrap(), &psi, &opts).unwrap();
        let margin = sol.gap.abs() + after.gap.abs();
        let decreased = sol.l1 - after.l1 > margin;
        let unique = witness::witness_is_unique(&dict, &sol) == Uniqueness::Unique;
        if predicted && !decreased {
            false_pos += 1;
        }
        if unique {
            decided += 1;
            if predicted == decreased {
                agree += 1;
            }
        }
    }
    check(
        constructed && false_pos == 0 && agree == decided,
        format!(
            "constructed: predicted {predicted}, xi {:.6} -> {:.6}; random: {agree}/{decided} decided verdicts match, {false_pos} false positives",
            sol.xi, resolved.xi
        ),
    )
}

fn single_basis_optimality() -> Check {
    let one = experiments::optimality_condition_check(1, &RunSettings::new(200, 0)).unwrap().summary;
    let two = experiments::optimality_condition_check(2, &RunSettings::new(50, 0)).unwrap().summary;
    check(
        one.max_per_basis == 1 && two.max_per_basis == 1 && one.certified_count == 200 && two.certified_count == 50,
        format!(
            "max per basis: n=1 {} ({} certified), n=2 {} ({} certified)",
            one.max_per_basis, one.certified_count, two.max_per_basis, two.certified_count
        ),
    )
}

fn improvement_step() -> Check {
    let mut rng = trial_rng("acceptance-improvement", 0, 0);
    let s2 = std::f64::consts::SQRT_2;
    let (mut worst_rec, mut worst_formula, mut min_saving) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut ok = true;
    let mut count = 0;
    while count < 10_000 {
        let x: f64 = rng.gen_range(-1.0..=1.0);
        let y: f64 = rng.gen_range(-1.0..=1.0);
        if x.abs() + y.abs() > 1.0 || (x == 0.0 && y == 0.0) {
            continue;
        }
        count += 1;
        let z = c(x, y);
        let imp = experiments::improve_single_basis_pair(c(1.0, 0.0), z).unwrap();
        let w = imp.reconstruct();
        worst_rec = worst_rec.max((w[0] - c(1.0, 0.0)).norm()).max((w[1] - z).norm());
        let formula = 1.0 + (s2 - 1.0) * (x.abs() + y.abs());
        worst_formula = worst_formula.max((imp.l1_after - formula).abs());
        min_saving = min_saving.min(1.0 + z.norm() - imp.l1_after);
        ok &= imp.l1_after < 1.0 + z.norm();
    }
    ok &= worst_rec <= 1e-14 && worst_formula <= 1e-12;
    check(
        ok,
        format!("max reconstruction error {worst_rec:.1e}, max |l1 - formula| {worst_formula:.1e}, min saving {min_saving:.2e}"),
    )
}

fn concentration() -> Check {
    let points = experiments::overlap_tail_check(2, &[0.25, 0.5, 0.75], 100_000, 42);
    let cdf_ok = points.iter().all(|p| p.within_three_sigma);
    let eps = EpsilonParameter::new(0.1).unwrap();
    let mut freqs = Vec::new();
    let mut bound_ok = true;
    for n in 3..=5 {
        let s = experiments::concentration_experiment(n, eps, &RunSettings::new(500, 42)).unwrap().summary;
        bound_ok &= s.consistent_with_bound;
        freqs.push((n, s.frequency, s.union_bound, s.mean_fidelity));
    }
    let monotone = freqs.windows(2).all(|w| w[1].1 >= w[0].1);
    let cdf: Vec<String> =
        points.iter().map(|p| format!("x={} {:.4} vs {:.4}", p.x, p.empirical, p.exact)).collect();
    let conc: Vec<String> = freqs
        .iter()
        .map(|(n, f, u, m)| format!("n={n} freq {f:.3} bound {u:.3e} mean F {m:.3}"))
        .collect();
    check(cdf_ok && monotone && bound_ok, format!("{}; {}", cdf.join(", "), conc.join(", ")))
}

fn witness_geometry() -> Check {
    let d = enumerate_stabilizer_states(1).unwrap();
    let y = self_witness(&d, &magic_t_state()).unwrap();
    let extremal = witness::is_extreme_point(&d, &y).unwrap();
    let e0 = vector::basis_vector(2, 0);
    let not_extremal = !witness::is_extreme_point(&d, &e0).unwrap();
    // e_0 is the midpoint of e_0 +- eps e_1, both feasible.
    let midpoint_ok = [0.1, -0.1].iter().all(|&eps| {
        let p = vec![c(1.0, 0.0), c(eps, 0.0)];
        socp::check_dual_feasibility(&d, &p, 0.0).unwrap().0
    });

    let (mut unique, mut worst_slack, mut certified) = (0, 0.0f64, 0);
    for t in 0..200 {
        let psi = haar_sample(2, &mut trial_rng("acceptance-witness", 0, t));
        let sol = extent(&d, &psi).unwrap();
        if witness::witness_is_unique(&d, &sol) == Uniqueness::Unique {
            unique += 1;
        }
        if sol.is_certified() {
            certified += 1;
            let r = witness::check_complementary_slackness(&d, &sol.coefficients, &sol.witness).unwrap();
            worst_slack = worst_slack.max(r.max_violation());
        }
    }
    check(
        extremal && not_extremal && midpoint_ok && unique >= 190 && worst_slack <= 1e-6,
        format!(
            "psi_T witness extremal {extremal}, e_0 non-extremal {not_extremal}; unique {unique}/200; max slackness violation {worst_slack:.1e} over {certified} certified solves"
        ),
    )
}

fn json_lines(records: &[TrialRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    experiments::write_json_lines(records, &mut buf).unwrap();
    buf
}

fn run_all_experiments() -> Vec<Vec<u8>> {
    let eps = EpsilonParameter::new(0.1).unwrap();
    let d = enumerate_stabilizer_states(1).unwrap();
    vec![
        json_lines(&experiments::concentration_experiment(3, eps, &RunSettings::new(60, 7)).unwrap().records),
        json_lines(&experiments::product_multiplicativity_experiment(&d, &d, &RunSettings::new(12, 7)).unwrap().records),
        json_lines(&experiments::add_phi_experiment(1, AddPhiMode::Stabilizer, false, &RunSettings::new(12, 7)).unwrap().records),
        json_lines(&experiments::add_phi_experiment(1, AddPhiMode::Synthetic, false, &RunSettings::new(12, 7)).unwrap().records),
        json_lines(&experiments::optimality_condition_check(2, &RunSettings::new(12, 7)).unwrap().records),
    ]
}

fn reproducibility() -> Check {
    let pool = |k| rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
    let one = pool(1).install(run_all_experiments);
    let again = pool(1).install(run_all_experiments);
    let four = pool(4).install(run_all_experiments);
    let identical = one == again && one == four;
    let bytes: usize = one.iter().map(|b| b.len()).sum();
    check(identical, format!("5 experiments, {bytes} bytes of JSON-lines, identical across reruns and 1/4 threads"))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("stabilizer dictionary counts", Duration::from_secs(60), dictionary_counts),
        ("magic state extent and fidelity", Duration::from_secs(1), magic_state_extent),
        ("solver certification", Duration::from_secs(120), solver_certification),
        ("fidelity lower bound", Duration::from_secs(120), fidelity_lower_bound),
        ("product multiplicativity", Duration::from_secs(120), multiplicativity),
        ("word addition", Duration::from_secs(60), word_addition),
        ("one support word per basis", Duration::from_secs(600), single_basis_optimality),
        ("single-basis improvement step", Duration::from_secs(5), improvement_step),
        ("concentration", Duration::from_secs(900), concentration),
        ("witness geometry", Duration::from_secs(300), witness_geometry),
        ("reproducibility", Duration::from_secs(60), reproducibility),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run);
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(r) => (r.pass && elapsed <= budget, r.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {:2} {name}: {detail} [{:.2}s, budget {}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
