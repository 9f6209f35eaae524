//! Exponent hierarchies of SDP feasibility systems in regular form: exact
//! symmetric matrices, instance validation, facial reduction, the hierarchy
//! recursion and numerical verification of the predicted growth.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod error;
pub mod generators;
pub mod hierarchy;
pub mod instance;
pub mod linalg;
pub mod reduce;
pub mod scalar;
pub mod symmat;
pub mod verify;

pub use error::{Error, Result};
