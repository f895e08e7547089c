#![allow(clippy::result_large_err, clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod driver;
pub mod verify;
