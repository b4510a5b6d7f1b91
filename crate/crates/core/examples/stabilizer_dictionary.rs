//! Enumerates STAB_n, checks the closed-form count and groups the words into
//! orthonormal bases.
//!
//!     cargo run --release --example stabilizer_dictionary

use extentlab::stab::{enumerate_stabilizer_states, group_into_bases, stabilizer_count, PauliOperator};

fn main() -> extentlab::Result<()> {
    for n in 1..=4 {
        let dict = enumerate_stabilizer_states(n)?;
        let bases = group_into_bases(&dict)?;
        println!(
            "n={n}: {:6} states in C^{:<2} (formula {:6}), {:5} bases of {} words",
            dict.len(),
            dict.dim(),
            stabilizer_count(n),
            bases.groups.len(),
            1 << n
        );
    }

    let xx = PauliOperator::from_label("XX")?;
    let zz = PauliOperator::from_label("ZZ")?;
    let zi = PauliOperator::from_label("ZI")?;
    println!("XX commutes with ZZ: {}", xx.commutes(&zz)?);
    println!("XX commutes with ZI: {}", xx.commutes(&zi)?);
    Ok(())
}
