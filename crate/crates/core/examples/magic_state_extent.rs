//! Extent of the single-qubit magic state and of its tensor powers.
//!
//!     cargo run --release --example magic_state_extent

use extentlab::stab::enumerate_stabilizer_states;
use extentlab::{extent, fidelity, magic_t_state, vector};

fn main() -> extentlab::Result<()> {
    let t = magic_t_state();
    let mut psi = t.clone();
    for n in 1..=3 {
        let dict = enumerate_stabilizer_states(n)?;
        let sol = extent(&dict, &psi)?;
        let (f, _) = fidelity(&dict, &psi)?;
        println!(
            "n={n}: xi = {:.9}  1/F = {:.9}  support {:2} words  rel. gap {:.1e}  certified {}",
            sol.xi,
            1.0 / f,
            sol.support.len(),
            sol.relative_gap(),
            sol.is_certified()
        );
        psi = vector::kron(&psi, &t);
    }
    Ok(())
}
