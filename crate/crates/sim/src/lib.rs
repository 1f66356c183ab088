//! Standard-library side of the GRAND toolkit: code description files,
//! matrix text files, CSV/JSON reports, rayon-parallel simulation and the
//! `grand-sim` command line. The algorithms live in `grand-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod matrix_io;
pub mod parallel;
pub mod report;

pub use error::{Result, SimError};
