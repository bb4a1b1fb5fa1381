//! Channel customization for limited feedback in multi-RIS assisted FDD MIMO links.
//!
//! The crate is `no_std` with `alloc`. It covers the whole numerical pipeline:
//!
//! * [`scenario`]: deployment geometry, path loss and RIS sizing.
//! * [`channel`]: geometric multipath segments and the cascaded Tx–RIS–Rx channel.
//! * [`customization`]: path pruning, orthogonal path selection and RIS phase design.
//! * [`transceiver`]: SVD and channel-customization transceivers, water-filling, SE.
//! * [`feedback`]: direction quantization, SE-loss expressions and bit partitioning.
//! * [`harness`]: one Monte Carlo trial across CSI regimes with reproducible RNG streams.
//!
//! File formats, parallel sweeps and the command line live in the `riscc-sim` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod channel;
pub mod customization;
mod error;
pub mod feedback;
pub mod harness;
pub mod linalg;
pub mod scenario;
pub mod stats;
pub mod transceiver;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
pub use num_complex::Complex64;
