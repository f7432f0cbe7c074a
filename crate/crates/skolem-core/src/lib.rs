//! Symbolic asymptotics for Skolem functions.
//!
//! Skolem functions are the functions built from `1` and `x` with `+`, `·` and `f^g`.
//! This crate expands them into truncated exp-log series, compares them, classifies
//! their components and regular functions, and ships a Cantor-normal-form ordinal
//! calculator for the order-type bounds of their fragments. Every symbolic verdict
//! can be cross-checked by a rigorous log-space numeric oracle.

pub mod asymptotics;
pub mod constants;
pub mod error;
pub mod interval;
pub mod oracle;
pub mod ordinal;
pub mod skolem;
pub mod transseries;

pub use error::{Error, Result};
