//! Active set, extremality and uniqueness of the optimal dual witness.
//!
//!     cargo run --release --example witness_geometry

use extentlab::rng::{haar_sample, trial_rng};
use extentlab::stab::enumerate_stabilizer_states;
use extentlab::witness::{self, Uniqueness};
use extentlab::{extent, magic_t_state, vector};

fn main() -> extentlab::Result<()> {
    let dict = enumerate_stabilizer_states(1)?;
    let sol = extent(&dict, &magic_t_state())?;
    let active = witness::active_set(&dict, &sol.witness, witness::ACTIVITY_TOL)?;
    println!("magic state witness y = {:?}", sol.witness);
    println!("  |y|^2 = {:.6}, active words {:?}", vector::norm_sqr(&sol.witness), active.indices);
    println!("  extreme point: {}", witness::is_extreme_point(&dict, &sol.witness)?);
    println!("  uniqueness: {:?}", witness::witness_is_unique(&dict, &sol));
    let report = witness::check_complementary_slackness(&dict, &sol.coefficients, &sol.witness)?;
    println!("  slackness violation: {:.1e}", report.max_violation());

    let e0 = vector::basis_vector(2, 0);
    println!("y = e_0 extreme point: {}", witness::is_extreme_point(&dict, &e0)?);

    let unique = (0..200)
        .filter(|&t| {
            let psi = haar_sample(2, &mut trial_rng("witness-example", 0, t));
            let sol = extent(&dict, &psi).unwrap();
            witness::witness_is_unique(&dict, &sol) == Uniqueness::Unique
        })
        .count();
    println!("unique witnesses among 200 Haar states: {unique}");
    Ok(())
}
