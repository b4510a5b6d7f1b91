//! Adding the maximally entangled state to a product dictionary: the witness
//! y (x) conj(y) of psi (x) conj(psi) is cut off once |y|^2 exceeds sqrt(d).
//!
//!     cargo run --release --example add_phi

use extentlab::experiments::{add_phi_experiment, add_phi_single, AddPhiMode, RunSettings};
use extentlab::{magic_t_state, ExtentOptions};

fn main() -> extentlab::Result<()> {
    let o = add_phi_single(1, AddPhiMode::Stabilizer, &magic_t_state(), &ExtentOptions::default())?;
    println!("magic state: |y|^2 = {:.4}, |<Phi, y (x) y*>| = {:.4}, fires {}", o.witness_norm_sqr, o.phi_overlap, o.trigger);

    for (n, mode) in [(1, AddPhiMode::Stabilizer), (2, AddPhiMode::Stabilizer), (1, AddPhiMode::Synthetic)] {
        let s = add_phi_experiment(n, mode, false, &RunSettings::new(20, 0))?.summary;
        println!(
            "n={n} {mode:?}: fired {}/{}, interior {}, decreased {}",
            s.trigger_count, s.trials, s.interior_count, s.decrease_count
        );
    }
    Ok(())
}
