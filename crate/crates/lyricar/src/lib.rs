//! IO, configuration, HTTP backends and the command-line pipeline around
//! `lyricar-core`.

pub use lyricar_core as core;

pub mod checkpoint;
pub mod config;
pub mod corpus_io;
pub mod error;
pub mod http;
pub mod jsonl;
pub mod manifest;
pub mod pipeline;
pub mod pools;

pub use config::RunConfig;
pub use error::{Error, Result};
