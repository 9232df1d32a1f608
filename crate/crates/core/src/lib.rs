//! Schmidt-number certification for bipartite qudit states.
//!
//! Criteria from correlation-matrix norms on known states, and finite-sample
//! certification from simulated randomized measurements through the second
//! and fourth Bloch-sphere moments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod cli;
pub mod correlation;
pub mod criteria;
pub mod error;
pub mod moments;
pub mod qmat;
pub mod randsim;
pub mod rng;

pub use error::{Error, Result};
