//! Simulation of free-space optical links that send the same OOK data on
//! two co-propagating, mutually orthogonal spatial modes (one Hermite-Gauss,
//! one Laguerre-Gauss) through a Kolmogorov phase screen, and combine them
//! at a single receiver.

pub mod error;
pub mod field;
pub mod modes;
pub mod turbulence;
pub mod channel;
pub mod link;
pub mod experiments;

pub use error::{Error, Result};
