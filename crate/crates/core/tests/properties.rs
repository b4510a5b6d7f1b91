mod common;

use common::c;
use extentlab::dictionary::{canonical_phase, maximally_entangled};
use extentlab::experiments::{self, improve_single_basis_pair, RunSettings};
use extentlab::extent::self_witness;
use extentlab::rng::{haar_sample, trial_rng};
use extentlab::stab::enumerate_stabilizer_states;
use extentlab::witness::{self, Uniqueness};
use extentlab::{extent, fidelity, vector, Complex64, Dictionary};
use proptest::prelude::*;

fn random_dictionary(seed: u64, d: usize, m: usize) -> Dictionary {
    let mut rng = trial_rng("properties", seed, 0);
    Dictionary::new((0..m).map(|_| haar_sample(d, &mut rng)).collect()).unwrap()
}

fn random_state(seed: u64, d: usize) -> Vec<Complex64> {
    haar_sample(d, &mut trial_rng("properties", seed, 1))
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn canonical_phase_is_idempotent_and_ray_invariant(seed in any::<u64>(), d in 1usize..6, phi in -10.0f64..10.0) {
        let v = random_state(seed, d);
        let canon = canonical_phase(&v);
        prop_assert!(vector::max_abs_diff(&canonical_phase(&canon), &canon) < 1e-15);
        let rotated = vector::scale(&v, Complex64::from_polar(1.0, phi));
        prop_assert!(vector::max_abs_diff(&canonical_phase(&rotated), &canon) < 1e-12);
    }

    #[test]
    fn dictionary_survives_save_and_load(seed in any::<u64>(), d in 1usize..5, m in 1usize..12) {
        let dict = random_dictionary(seed, d, m);
        let back = Dictionary::from_json(&dict.to_json()).unwrap();
        prop_assert_eq!(back.len(), dict.len());
        for (a, b) in dict.iter().zip(back.iter()) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn phi_overlap_with_product_of_conjugates(seed in any::<u64>(), n in 1usize..4, scale in 0.1f64..3.0) {
        let y = vector::scale(&random_state(seed, 1 << n), c(scale, 0.0));
        let phi = maximally_entangled(2, n).unwrap();
        let lhs = vector::inner(&phi, &vector::kron(&y, &vector::conj(&y)));
        let rhs = vector::norm_sqr(&y) / ((1u64 << n) as f64).sqrt();
        prop_assert!((lhs - c(rhs, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn improvement_step_never_loses(x in -1.0f64..1.0, y in -1.0f64..1.0, a_re in -2.0f64..2.0, a_im in -2.0f64..2.0) {
        prop_assume!(x.abs() + y.abs() <= 1.0 && (x, y) != (0.0, 0.0));
        let a = c(a_re, a_im);
        prop_assume!(a.norm() > 1e-3);
        let z = a * c(x, y);
        let imp = improve_single_basis_pair(a, z).unwrap();
        let w = imp.reconstruct();
        prop_assert!((w[0] - a).norm() < 1e-12 && (w[1] - z).norm() < 1e-12);
        let s2 = std::f64::consts::SQRT_2;
        prop_assert!((imp.l1_after - a.norm() * (1.0 + (s2 - 1.0) * (x.abs() + y.abs()))).abs() < 1e-12);
        prop_assert!(imp.l1_after < imp.l1_before);
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn extent_is_phase_invariant_and_scales_quadratically(seed in any::<u64>(), d in 2usize..5, phi in -3.0f64..3.0, s in 0.2f64..4.0) {
        let dict = random_dictionary(seed, d, 3 * d);
        let psi = random_state(seed, d);
        let base = extent(&dict, &psi).unwrap().xi;
        let rotated = extent(&dict, &vector::scale(&psi, Complex64::from_polar(s, phi))).unwrap().xi;
        prop_assert!((rotated - s * s * base).abs() < 1e-6 * rotated.max(1.0));
    }

    #[test]
    fn extent_is_bounded_below_by_inverse_fidelity(seed in any::<u64>(), d in 2usize..6, extra in 0usize..20) {
        let dict = random_dictionary(seed, d, d + extra);
        let psi = random_state(seed, d);
        let sol = extent(&dict, &psi).unwrap();
        let (f, _) = fidelity(&dict, &psi).unwrap();
        prop_assert!(sol.xi >= 1.0 / f - 1e-6);
        prop_assert!(sol.xi >= 1.0 - 1e-9);
    }

    #[test]
    fn adding_a_word_never_increases_extent(seed in any::<u64>(), d in 2usize..5) {
        let dict = random_dictionary(seed, d, 2 * d);
        let psi = random_state(seed, d);
        let w = haar_sample(d, &mut trial_rng("properties", seed, 2));
        let before = extent(&dict, &psi).unwrap();
        let after = extent(&dict.add_word(&w).unwrap(), &psi).unwrap();
        prop_assert!(after.l1 <= before.l1 + before.gap.abs() + after.gap.abs() + 1e-9);
    }

    #[test]
    fn optimal_pairs_satisfy_slackness(seed in any::<u64>(), d in 2usize..5) {
        let dict = random_dictionary(seed, d, 3 * d);
        let psi = random_state(seed, d);
        let sol = extent(&dict, &psi).unwrap();
        prop_assert!(sol.is_certified());
        // sum |c_s| = Re sum conj(c_s) <s,y>.
        let paired: f64 = sol
            .coefficients
            .iter()
            .zip(dict.iter())
            .map(|(cs, s)| (cs.conj() * vector::inner(s, &sol.witness)).re)
            .sum();
        prop_assert!((sol.l1 - paired).abs() < 1e-7);
        let report = witness::check_complementary_slackness(&dict, &sol.coefficients, &sol.witness).unwrap();
        prop_assert!(report.holds(1e-6), "{:?}", report);
    }

    #[test]
    fn unique_witnesses_are_extreme_points(seed in any::<u64>()) {
        let dict = enumerate_stabilizer_states(1).unwrap();
        let sol = extent(&dict, &random_state(seed, 2)).unwrap();
        if witness::witness_is_unique(&dict, &sol) == Uniqueness::Unique {
            prop_assert!(witness::is_extreme_point(&dict, &sol.witness).unwrap());
        }
    }

    #[test]
    fn predicted_decrease_is_confirmed_by_resolving(seed in any::<u64>(), d in 2usize..4, toward_witness in any::<bool>()) {
        let dict = random_dictionary(seed, d, 2 * d + 1);
        let psi = random_state(seed, d);
        let sol = extent(&dict, &psi).unwrap();
        let w = if toward_witness {
            vector::scale(&sol.witness, c(1.0 / vector::norm(&sol.witness), 0.0))
        } else {
            haar_sample(d, &mut trial_rng("properties", seed, 3))
        };
        if witness::word_addition_strictly_decreases(&dict, &sol, &w).unwrap() {
            let after = extent(&dict.add_word(&w).unwrap(), &psi).unwrap();
            prop_assert!(sol.l1 - after.l1 > sol.gap.abs() + after.gap.abs());
        }
    }
}

#[test]
fn non_spanning_active_set_is_a_midpoint() {
    // y = e_0 over STAB_1 has the single active word e_0; moving along e_1,
    // which is orthogonal to it, stays feasible in both directions.
    let dict = enumerate_stabilizer_states(1).unwrap();
    let y = vector::basis_vector(2, 0);
    let active = witness::active_set(&dict, &y, witness::ACTIVITY_TOL).unwrap();
    assert!(!witness::spans(&dict, &active.indices));
    for eps in [0.05, -0.05, 0.05 * std::f64::consts::FRAC_1_SQRT_2] {
        let p = vec![c(1.0, 0.0), c(eps, eps)];
        let max = dict.iter().map(|s| vector::inner(s, &p).norm()).fold(0.0, f64::max);
        assert!(max <= 1.0 + 1e-12, "{max}");
    }
}

#[test]
fn tensor_of_extreme_witnesses_is_extreme() {
    let d = enumerate_stabilizer_states(1).unwrap();
    let prod = d.tensor(&d);
    for seed in 0..10 {
        let y1 = extent(&d, &random_state(seed, 2)).unwrap().witness;
        let y2 = extent(&d, &random_state(seed + 100, 2)).unwrap().witness;
        assert!(witness::is_extreme_point(&d, &y1).unwrap());
        assert!(witness::is_extreme_point(&d, &y2).unwrap());
        assert!(witness::is_extreme_point(&prod, &vector::kron(&y1, &y2)).unwrap());
    }
    let t = extentlab::magic_t_state();
    let y = self_witness(&d, &t).unwrap();
    assert!(witness::is_extreme_point(&prod, &vector::kron(&y, &vector::conj(&y))).unwrap());
}

#[test]
fn trial_records_do_not_depend_on_trial_count() {
    let d = enumerate_stabilizer_states(1).unwrap();
    let short = experiments::product_multiplicativity_experiment(&d, &d, &RunSettings::new(3, 11)).unwrap();
    let long = experiments::product_multiplicativity_experiment(&d, &d, &RunSettings::new(6, 11)).unwrap();
    assert_eq!(short.records[..], long.records[..3]);
}

#[test]
fn add_phi_bound_chain_holds_at_two_qubits() {
    let report = experiments::add_phi_experiment(
        2,
        experiments::AddPhiMode::Stabilizer,
        false,
        &RunSettings::new(4, 0),
    )
    .unwrap();
    assert!(report.summary.bound_chain_holds);
    assert!(report.summary.monotone);
    assert!(report.summary.decrease_confirmed);
}
