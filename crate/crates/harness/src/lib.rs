//! Experiment harness and command-line front end for `copgauss`.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;

pub use error::{HarnessError, Result};
