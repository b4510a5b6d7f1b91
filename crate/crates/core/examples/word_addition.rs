//! A word that cuts off the current witness lowers the extent; one that does
//! not leaves it unchanged.
//!
//!     cargo run --release --example word_addition

use extentlab::witness::word_addition_strictly_decreases;
use extentlab::{extent, vector, Complex64, Dictionary};

fn main() -> extentlab::Result<()> {
    let dict = Dictionary::new(vec![vector::basis_vector(2, 0), vector::basis_vector(2, 1)])?;
    let psi = [Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)];
    let sol = extent(&dict, &psi)?;
    println!("xi over the computational basis: {:.6}, witness {:?}", sol.xi, sol.witness);

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let candidates = [
        ("|+>", vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)]),
        ("|->", vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)]),
        ("|0>", vector::basis_vector(2, 0)),
    ];
    for (name, w) in candidates {
        let predicted = word_addition_strictly_decreases(&dict, &sol, &w)?;
        let after = extent(&dict.add_word(&w)?, &psi)?;
        println!(
            "add {name}: |<w,y>| = {:.4}, predicted decrease {predicted:5}, xi -> {:.6}",
            vector::inner(&w, &sol.witness).norm(),
            after.xi
        );
    }
    Ok(())
}
