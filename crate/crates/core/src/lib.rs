//! Centroid-encoder: a supervised autoencoder for visualising labelled data.
//!
//! A centroid-encoder is trained like an autoencoder, except that the target
//! for every sample is the mean of its class rather than the sample itself.
//! Passing the data through a narrow linear bottleneck (2 or 3 units) yields
//! an embedding in which classes stay compact and well separated.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: row-major [`Matrix`], symmetric eigen-solver, seeded RNG.
//! - [`dataset`]: IDX and CSV loaders, standardisation, stratified splits,
//!   class centroids and training targets.
//! - [`network`]: multilayer perceptron with an exposed bottleneck, forward
//!   and backward passes, and a binary model container.
//! - [`training`]: distortion loss, Adam with weight decay, mini-batch
//!   epochs, early stopping on validation k-NN error, and layer-freeze
//!   pre-training.
//! - [`analysis`]: PCA variance curves, k-NN prediction error, Voronoi
//!   sites, and the hidden-layer variance experiment.
//! - [`cli`]: the `train`, `eval`, `embed` and `variance` commands behind
//!   the `centroid-encoder` binary, usable directly as library calls.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod analysis;
pub mod cli;
pub mod dataset;
mod error;
pub mod network;
pub mod numerics;
pub mod training;

pub use error::{Error, Result};
pub use numerics::{Matrix, SeededRng};
