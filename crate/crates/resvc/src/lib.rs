//! File formats and command-line front end for `resvc-core`.

pub mod cli;
pub mod converter;
mod error;
pub mod features;
pub mod text;
pub mod trace;
pub mod wav;

pub use error::{Error, Result};
