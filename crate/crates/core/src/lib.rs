//! MDCT perceptual audio codec with a legacy decoder and an annealed Langevin
//! posterior-sampling decoder.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod conditioning;
pub mod config;
pub mod decoders;
pub mod eval;
pub mod error;
pub mod prior;
pub mod sampler;
pub mod specfun;
pub mod synth;
pub mod transform;

pub use error::{Error, Result};
