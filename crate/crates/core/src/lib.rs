//! PAC-learning tasks over GF(2) feature maps.

pub mod error;
pub mod linalg;
pub mod oracles;
pub mod rng;

pub use error::{Error, LearnFailure, Result};
pub mod dataprep;
pub mod learner;
pub mod reduction;
pub mod harness;
