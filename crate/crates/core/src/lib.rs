//! Ring blow-up for the radial nonlinear heat equation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod frame;
pub mod grid;
pub mod hermite;
pub mod model;
pub mod scalar;
pub mod shooting;
pub mod shrink;
pub mod solver;
pub mod verify;

pub use scalar::Scalar;

pub type Model = model::ModelParams<f64>;
pub type Profile = model::Profile<f64>;
pub type Constants = model::ProfileConstants<f64>;
