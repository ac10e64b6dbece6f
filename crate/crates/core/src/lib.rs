// Negated comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod game;
pub mod geometry;
pub mod grid;
pub mod normal_op;
pub mod poly;
pub mod preferences;
pub mod problem;
pub mod report;
pub mod simplex;
pub mod solvers;
pub mod vecops;

pub use error::{Error, Result};
