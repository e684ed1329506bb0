//! File formats and the benchmark harness.

pub mod bench;
pub mod json;
pub mod mps;

pub use mps::{parse_mps, write_mps};
