//! Detection of binary faster-than-Nyquist (FTN) signaling.
//!
//! Root-raised-cosine pulses packed every `τT` with `τ < 1` leave the
//! matched-filter output with ISI and correlated noise:
//! `y = G·a + w`, `w ~ N(0, σ²G)`. This crate builds the banded ISI matrix
//! `G`, simulates the channel exactly, and detects `a ∈ {±1}^N` with
//!
//! * zero forcing and an exhaustive MLSE reference,
//! * a standard sphere decoder on the (mismatched) white-noise model,
//! * a whitened banded sphere decoder that reaches the MLSE optimum,
//! * a semidefinite relaxation with Gaussian randomisation.
//!
//! The [`harness`] module runs Monte Carlo BER sweeps over all of them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod detect;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod pulse;
pub mod rng;
pub mod sdr;

pub use error::{Error, Result};
