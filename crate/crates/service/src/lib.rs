//! HTTP service and batch CLI over `seqsym-core`.
//!
//! [`Engine`] answers every request; [`http::router`] and [`cli::run`] are
//! thin adapters over it, so both produce the same JSON documents.

pub mod cli;
pub mod config;
pub mod engine;
mod error;
pub mod http;

pub use config::{DataSource, SessionConfig};
pub use engine::{Engine, SCHEMA_VERSION};
pub use error::ApiError;
