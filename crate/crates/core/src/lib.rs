//! Null spaces of fully connected networks and what can be done with them.
//!
//! For a network `f(x) = g(W_1 x)`, every `v` with `W_1 v = 0` leaves the
//! output untouched: `f(x + a v) = f(x)`. The crate extracts that subspace,
//! splits images into the part the network sees and the part it ignores,
//! builds stego images that look like one picture and classify as another,
//! and analyzes convolution layers through their lowered matrices.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below are what the CLI and tests use.

pub mod convnull;
pub mod dataio;
pub mod error;
pub mod linalg;
pub mod network;
pub mod nullspace;
pub mod scalar;
pub mod stego;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Vector64 = linalg::Vector<f64>;
pub type OrthonormalBasis64 = linalg::OrthonormalBasis<f64>;
pub type Network64 = network::Network<f64>;
pub type Prediction64 = network::Prediction<f64>;
pub type NetworkNullSpace64 = nullspace::NetworkNullSpace<f64>;
pub type LabeledDataset64 = dataio::LabeledDataset<f64>;
pub type StegoArtifact64 = stego::StegoArtifact<f64>;
pub type Kernel64 = convnull::Kernel<f64>;

pub type Matrix32 = linalg::Matrix<f32>;
pub type Vector32 = linalg::Vector<f32>;
pub type Network32 = network::Network<f32>;
pub type LabeledDataset32 = dataio::LabeledDataset<f32>;
