// Guards are written as `!(x <= tol)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod energy;
pub mod error;
pub mod frames;
pub mod gauss_tension;
pub mod grid;
pub mod immersion;
pub mod invariants;
pub mod linalg5;
pub mod loop_family;
pub mod numfmt;
pub mod pipeline;

pub use error::{Error, Result};
