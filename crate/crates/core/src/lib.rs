#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod criteria;
pub mod entropy;
pub mod error;
pub mod hardcore;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod sampler;
pub mod spectra;

pub use error::{Error, Result};
