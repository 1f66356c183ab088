//! GRAND-family decoders for binary linear block codes, with a CA-Polar
//! code constructor and the channel and stratified-simulation machinery used
//! to evaluate them over BPSK-AWGN.
//!
//! The crate is `no_std` and needs only `alloc`. IO, configuration files and
//! the command line live in the `grand-sim` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ca_polar;
pub mod channel;
pub mod error;
pub mod gf2;
pub mod grand;
pub mod pattern;
pub mod sim;

pub use ca_polar::{Code, CodeSpec};
pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector};
pub use grand::{DecodeOutcome, Grand, GuessBudget};
