//! Stabilizer fidelity of Haar-random states. Five qubits stream the
//! dictionary instead of storing its 2.4 million words.
//!
//!     cargo run --release --example concentration

use extentlab::experiments::{concentration_experiment, overlap_tail_check, EpsilonParameter, RunSettings};

fn main() -> extentlab::Result<()> {
    for p in overlap_tail_check(2, &[0.25, 0.5, 0.75], 100_000, 42) {
        println!("Pr[|<e0,psi>|^2 >= {}] = {:.4} (exact {:.4} +- {:.4})", p.x, p.empirical, p.exact, p.sigma);
    }
    let eps = EpsilonParameter::new(0.1)?;
    for n in 1..=5 {
        let s = concentration_experiment(n, eps, &RunSettings::new(500, 42))?.summary;
        println!(
            "n={n}: mean F {:.4}, threshold {:.4}, event frequency {:.3}, union bound {:.3e}",
            s.mean_fidelity, s.threshold, s.frequency, s.union_bound
        );
    }
    Ok(())
}
