//! File formats, reports and the command-line driver for `sas-core`.

pub mod error;
pub mod io;
pub mod num;
pub mod report_out;
pub mod scores_csv;
pub mod selection_json;
pub mod sweep_out;

pub use error::{Error, Result};
