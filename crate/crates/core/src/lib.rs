//! Transmit beamforming for multi-antenna wireless information and power
//! transfer with a secrecy constraint.
//!
//! A multi-antenna transmitter serves one information receiver and `K`
//! energy receivers. The energy receivers harvest power from every beam but
//! could also eavesdrop on the information stream, so the design maximizes
//! weighted harvested energy subject to a worst-case secrecy rate.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod cli;
pub mod config;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod sdp;
pub mod sdr;
pub mod optimal;
pub mod search;
pub mod suboptimal;

pub use error::{Error, Result};
