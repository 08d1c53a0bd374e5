//! File formats, plotting, parallel drivers and the `cfmm` command line on
//! top of [`cfmm_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod fmt;
pub mod io;
pub mod parallel;
pub mod pipeline;
pub mod svg;

pub use error::{Error, Result};
