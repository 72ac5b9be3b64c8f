//! File formats, configuration, reports and the session server.

pub mod error;
pub mod config;
pub mod files;
pub mod protocol;
pub mod report;
pub mod server;

pub use error::{Error, Result};
