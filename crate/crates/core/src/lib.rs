//! Coverage and rate of open-loop spatial multiplexing in Poisson cellular
//! downlinks with partial zero-forcing and linear MMSE receivers.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod geometry;
pub mod mmse;
pub mod montecarlo;
pub mod pzf;
pub mod quadrature;
pub mod rate;
pub mod specfun;

pub use error::{Error, Result};
pub use geometry::{NetworkConfig, PzfSplit};
