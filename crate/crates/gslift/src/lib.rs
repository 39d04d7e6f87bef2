//! Files, pipeline stages, command line and HTTP service around `gslift-core`.

pub mod cameras;
pub mod config;
pub mod error;
pub mod formats;
pub mod masks;
pub mod pipeline;
pub mod server;
pub mod ply;
pub mod synth;

pub use error::{Error, Result};
