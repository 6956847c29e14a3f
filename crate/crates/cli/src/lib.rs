//! Command-line front end for `gk-core`: CSV ingestion, the `gk`
//! subcommands, run manifests, the log-returns analysis pipeline and the
//! benchmark harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyze;
pub mod bench;
pub mod commands;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod output;

pub use error::{CliError, Result};
