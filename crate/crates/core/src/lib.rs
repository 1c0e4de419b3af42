//! Zero-delay secret-key encryption and causal rate-distortion secrecy.

pub mod adversary;
pub mod bits;
pub mod causal_rd;
pub mod cli;
pub mod codes;
pub mod error;
pub mod hull;
pub mod keystream;
pub mod secure_causal;
pub mod source_models;
pub mod zd_block;
pub mod zd_stream;

pub use bits::Bits;
pub use error::{Error, Result};
