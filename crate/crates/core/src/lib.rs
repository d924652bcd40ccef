//! Simulation core for micro-ring perceptron (MiRP) RF sensing.
//!
//! The crate is split along the signal chain:
//!
//! * [`physics`] closed-form link budgets, the damped-convolution readout
//!   kernel of the micro-ring and the measurement-noise models,
//! * [`nn`] a small reverse-mode backend (conv / pool / dense) with the
//!   physical layer as a trainable first layer,
//! * [`datasets`] loaders and generators for the three classification tasks,
//! * [`rng`] counter-based random streams.
//!
//! Numerical kernels are generic over [`Scalar`] (`f32` or `f64`). The
//! aliases below fix the scalar to `f64`, which is what the experiment
//! pipeline uses.

pub mod constants;
pub mod datasets;
pub mod error;
pub mod nn;
pub mod physics;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Tensor = nn::Tensor<f64>;
pub type Tensor32 = nn::Tensor<f32>;
pub type Model = nn::Model<f64>;
pub type Model32 = nn::Model<f32>;
pub type WeightBank = physics::WeightBank<f64>;
pub type WeightBank32 = physics::WeightBank<f32>;
pub type FeatureMap = physics::FeatureMap<f64>;
pub type FeatureMap32 = physics::FeatureMap<f32>;
