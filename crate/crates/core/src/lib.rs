#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod config;
pub mod error;
pub mod harmonic;
pub mod interp;
pub mod optimize;
pub mod quad;
pub mod report;
pub mod sim;
pub mod speed;
pub mod symbol;

pub use error::{Error, Result};
