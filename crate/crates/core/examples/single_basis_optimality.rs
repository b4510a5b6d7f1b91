//! Optimal stabilizer decompositions use at most one word per orthonormal
//! basis; two words of one basis can always be traded for a cheaper triple.
//!
//!     cargo run --release --example single_basis_optimality

use extentlab::experiments::{improve_single_basis_pair, optimality_condition_check, RunSettings};
use extentlab::Complex64;

fn main() -> extentlab::Result<()> {
    let imp = improve_single_basis_pair(Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.4))?;
    println!("e_0 + (0.3+0.4i) e_1: l1 {:.6} -> {:.6}", imp.l1_before, imp.l1_after);
    for (c, w) in imp.coefficients.iter().zip(&imp.words) {
        println!("  {c:.6} * {w:?}");
    }

    for (n, trials) in [(1, 200), (2, 50)] {
        let s = optimality_condition_check(n, &RunSettings::new(trials, 0))?.summary;
        println!(
            "n={n}: {trials} Haar states, max support words per basis {}, {} certified",
            s.max_per_basis, s.certified_count
        );
    }
    Ok(())
}
