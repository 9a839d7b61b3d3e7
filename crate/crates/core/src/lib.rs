//! Joint packet detection and decoding on the binary-input AWGN channel.
//!
//! The crate covers the full pipeline for slotted asynchronous transmission:
//!
//! * [`numerics`]: Gaussian tail functions and log-domain helpers.
//! * [`channel`]: SNR bookkeeping, BPSK, seeded slot synthesis, preamble/codeword split.
//! * [`codebook`]: binary linear codes with exhaustive ML decoding.
//! * [`detectors`]: preamble, hybrid preamble/energy, decoder-aided,
//!   codebook-aided and genie statistics.
//! * [`bounds`]: blocklength converse, decoder-aided achievability, and
//!   Monte Carlo DT / meta-converse code-size bounds.
//! * [`montecarlo`]: threshold calibration and error-rate estimation.
//!
//! Monte Carlo work runs on rayon when the default `parallel` feature is
//! enabled; see [`par::Execution`].

pub mod bounds;
pub mod channel;
pub mod codebook;
pub mod detectors;
mod error;
pub mod montecarlo;
pub mod numerics;
pub mod par;
pub mod rng;

pub use error::{Error, Result};
