//! Particle PHD filter for multi-target tracking with separate and direct
//! roughening, and a Monte Carlo harness that compares filter variants on
//! simulated cluttered scenarios.
//!
//! The filter state is a [`ParticleSet`] whose weights sum to the expected
//! number of targets. One scan is [`predict`] → [`update`] → cardinality
//! rounding and k-means state extraction → [`resample`] → optional
//! [`separate_roughen`]. Direct roughening instead inflates the propagation
//! noise inside [`predict`].

// `!(x > 0.0)` is used on purpose so NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod cluster;
pub mod error;
pub mod filter;
pub mod harness;
pub mod metrics;
pub mod models;
pub mod particle;
pub mod resampling;
pub mod rng;
pub mod roughening;
pub mod scenario;
pub mod selftest;

pub use error::{Error, Result};
pub use filter::{estimate_cardinality, extract_states, predict, update, Estimate, FilterConfig, PhdFilter, StepOutput};
pub use metrics::{gain_ratio, ospa, ospa_bruteforce, OspaParams};
pub use models::{
    Measurement, MeasurementModel, Models, MotionModel, StateVector,
};
pub use particle::{Particle, ParticleSet};
pub use resampling::{resample, target_count, ResampleConfig, Scheme};
pub use roughening::{direct_roughen_scale, gordon_std, separate_roughen, Mode, RougheningConfig};
