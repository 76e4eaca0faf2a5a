#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN-rejecting guards
pub mod classical;
pub mod coherent;
pub mod error;
pub mod harness;
pub mod special;
pub mod spectrum;

pub use error::{Error, Result};
