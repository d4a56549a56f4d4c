//! Uncertainty-weighted supply-chain cost model for small and medium
//! enterprises: AHP weighting, the weighted cost functional and its
//! derivatives, reduced Euler-Lagrange perturbation systems, a two-point
//! boundary-value solver and the case-study scenarios built on them.

pub mod ahp;
pub mod bvp;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod scenario;

pub use error::{Error, Result};
