//! Extent of complex vectors over finite dictionaries.
//!
//! The extent of `psi` with respect to a dictionary `D` of unit vectors is the
//! squared minimal l1-norm over all decompositions `psi = sum_s c_s s`. This
//! crate computes it with a second-order cone interior-point solver, extracts
//! the optimal dual witness `y`, and analyses the witness geometry (active
//! sets, extreme points, normal cones, complementary slackness). The
//! stabilizer dictionary `STAB_n` is built in, together with a seeded
//! experiment harness.
//!
//! Start with [`extent::extent`] and [`stab::enumerate_stabilizer_states`];
//! the `examples/` directory has one runnable program per capability.

pub mod cli;
pub mod dictionary;
pub mod error;
pub mod experiments;
pub mod extent;
pub mod rng;
pub mod socp;
pub mod stab;
pub mod vector;
pub mod witness;

pub use dictionary::{Dictionary, Word};
pub use error::{Error, Result};
pub use extent::{extent, fidelity, magic_t_state, ExtentOptions, ExtentSolution};
pub use num_complex::Complex64;
