//! Jamming mitigation with a movable linear antenna array.
//!
//! The receiver picks element positions and combining weights to maximize the
//! SINR of a legitimate source in the presence of `K` jammers. Beamforming is
//! solved in closed form (`w* ∝ B⁻¹a₀`); positions come from a small network
//! that emits spacing ratios, trained without labels on the reciprocal of the
//! achieved SINR.
//!
//! - [`array`]: steering vectors, SINR, covariances, optimal beamformer and its position gradient
//! - [`positioning`]: spacing ratios → feasible layout, and its Jacobian
//! - [`neural`]: the MLP, backpropagation, SGD and the model file
//! - [`training`]: datasets, the end-to-end loss/gradient chain, training and inference
//! - [`baselines`]: AO, FPV and RPB reference schemes
//! - [`experiments`]: sweeps and runtime benchmarks producing CSV
//! - [`cli`]: the `antijam` command-line front end

pub mod array;
pub mod baselines;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod neural;
pub mod positioning;
pub mod training;

pub use array::{ArrayLayout, Beamformer, Scene, Strategy};
pub use config::SystemConfig;
pub use error::{Error, Result};
