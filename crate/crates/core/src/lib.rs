//! Iterated tails, iterated failure rates and the ageing classes and
//! stochastic orders built on them.

pub mod ageing;
pub mod casebook;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod exppoly;
pub mod iteration;
pub mod ordering;
pub mod quad;
pub mod report;
pub mod signscan;

pub use error::{Error, Result};
