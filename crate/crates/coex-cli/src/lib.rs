//! Library side of the `coex` command-line tool.
//!
//! The binary in `main.rs` is a thin argument-parsing shell; everything it
//! does lives here so integration tests can drive the same code paths
//! directly: the scenario file format ([`schema`]), sweep parsing and
//! evaluation ([`sweep`], [`runner`]), table output ([`table`]) and the
//! degradation report ([`degrade`]).

pub mod degrade;
pub mod error;
pub mod runner;
pub mod schema;
pub mod sweep;
pub mod table;

pub use error::{CliError, CliResult};
