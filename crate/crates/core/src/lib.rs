//! Joint discrete BS constant-envelope precoding and IRS phase design for
//! multi-cell massive MIMO downlink.
//!
//! * [`model`]: MUI power, sequential-term objectives, rates, interference analysis.
//! * [`trellis`]: survivor-path minimizer plus exhaustive reference.
//! * [`sdr`]: diagonal-constrained SDP relaxation with randomized rounding.
//! * [`schemes`]: end-to-end optimizers producing [`schemes::TrialReport`]s.
//! * [`harness`]: scenario files, Monte-Carlo runs, CSV output, validation.

pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod model;
pub mod phase;
pub mod rng;
pub mod schemes;
pub mod sdr;
pub mod trellis;

pub use error::{Error, Result};
