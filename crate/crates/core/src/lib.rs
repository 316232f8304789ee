//! Benchmark-score regression toolkit.
//!
//! Covers the full path from a raw SPEC-CPU-style results table to ranked
//! experiment tables: cleaning and encoding ([`data`]), from-scratch layers
//! ([`nn`], [`optim`], [`model`]), parametric network generators ([`arch`]),
//! classical baselines ([`baselines`]) and the grid-search harness ([`harness`]).

pub mod arch;
pub mod baselines;
pub mod data;
pub mod error;
pub mod harness;
pub mod model;
pub mod nn;
pub mod optim;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
