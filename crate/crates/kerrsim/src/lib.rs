//! Experiment pipeline, file formats and CLI support for `kerrsim-core`.
//!
//! - [`config`]: JSON experiment configuration
//! - [`pipeline`]: state preparation through reconstruction for each α
//! - [`io`]: matrix JSON, sample CSV, Re/Im tables
//! - [`klm_compare`]: sign-gate versus superposition-scheme table

pub mod config;
pub mod error;
pub mod io;
pub mod klm_compare;
pub mod pipeline;

pub use error::{Error, Result, Stage};
pub use kerrsim_core;
