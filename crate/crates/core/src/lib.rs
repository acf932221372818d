//! Toffoli-based one-shot z-rotations: planning, construction, rewriting,
//! noisy simulation and tomography.

pub mod builder;
pub mod circuit;
pub mod error;
pub mod harness;
pub mod planner;
pub mod qasm;
pub mod qcore;
pub mod sim;
pub mod simplify;
pub mod tomography;

pub use error::{Error, Result};
