//! Synthetic benchmarks for tabular preprocessing choices ahead of
//! gradient-boosted trees.

pub mod bench;
pub mod catenc;
pub mod dataset;
pub mod error;
pub mod featsel;
pub mod gbtree;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod nullimp;
pub mod rng;
pub mod standardize;
pub mod synthdata;
pub mod tune;

pub use error::{Error, Result};
