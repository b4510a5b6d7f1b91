//! Seed derivation and per-trial random streams.
//!
//! Every trial owns a ChaCha stream keyed by `(experiment id, master seed)`
//! and selected by the trial index, so results do not depend on scheduling.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::vector;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// 256-bit key for an experiment, from its id and the master seed.
pub fn derive_key(experiment: &str, master_seed: u64) -> [u8; 32] {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in experiment.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut state = h ^ splitmix64(master_seed);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// Independent stream for one trial.
pub fn trial_rng(experiment: &str, master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(derive_key(experiment, master_seed));
    rng.set_stream(trial);
    rng
}

/// Haar-random unit vector in `C^d`: normalized i.i.d. complex Gaussians.
pub fn haar_sample<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    assert!(d >= 1, "dimension must be positive");
    loop {
        let v: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        let n = vector::norm(&v);
        if n > 1e-150 {
            return vector::scale(&v, Complex64::new(1.0 / n, 0.0));
        }
    }
}
