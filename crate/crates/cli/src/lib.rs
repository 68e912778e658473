//! File formats, manifests, predictors, and the pipeline driver around
//! `edgeroute-core`. The `edgeroute` binary is a thin wrapper over
//! [`cli::run`].

pub mod analysis;
pub mod cli;
pub mod error;
pub mod imageio;
pub mod manifest;
pub mod pipeline;
pub mod predictors;
pub mod records;
pub mod rulefile;
pub mod synthgen;

pub use cli::{run, Cli};
pub use error::{Error, Result};
