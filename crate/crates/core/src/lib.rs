//! Secure beamforming with artificial noise for simultaneous wireless
//! information and power transfer: channel generation, the relaxed
//! semidefinite program, an interior-point solver, rank-one recovery,
//! suboptimal baselines and Monte Carlo sweeps.

// `!(a < b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod baselines;
pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod harness;
pub mod hermitian;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod restore;

#[cfg(test)]
pub(crate) mod fixtures;

pub use error::{Error, Result};
