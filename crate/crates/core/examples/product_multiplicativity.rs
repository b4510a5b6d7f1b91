//! Extent is multiplicative on STAB_1 (x) STAB_1 for product states.
//!
//!     cargo run --release --example product_multiplicativity

use extentlab::experiments::{product_extent, product_multiplicativity_experiment, RunSettings};
use extentlab::stab::enumerate_stabilizer_states;
use extentlab::{magic_t_state, vector, ExtentOptions};

fn main() -> extentlab::Result<()> {
    let d = enumerate_stabilizer_states(1)?;
    let t = magic_t_state();
    let p = product_extent(&d, &d, &d.tensor(&d), &t, &vector::conj(&t), &ExtentOptions::default())?;
    println!("magic (x) conj(magic): {:.9} = {:.9} * {:.9}", p.xi_product, p.xi_first, p.xi_second);

    let report = product_multiplicativity_experiment(&d, &d, &RunSettings::new(100, 0))?;
    println!("{}", serde_json::to_string_pretty(&report.summary).unwrap());
    Ok(())
}
