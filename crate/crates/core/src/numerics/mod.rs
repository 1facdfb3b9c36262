//! Dense linear algebra and seeded randomness used throughout the crate.
//!
//! Everything here is deterministic: the matrix product accumulates each entry
//! over the inner index in ascending order regardless of blocking or thread
//! count, and [`SeededRng`] reproduces its stream from the seed alone.

mod eig;
mod matrix;
mod rng;

pub use eig::{sym_eig, SymEig};
pub use matrix::Matrix;
pub use rng::{derive_seed, SeededRng};
