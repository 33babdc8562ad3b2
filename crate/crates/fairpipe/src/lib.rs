//! File formats and command line for the fairness-auditing pipeline.
//!
//! Everything algorithmic lives in `fairpipe_core`; this crate reads CSV
//! tables and TOML configs, writes reports and model files, and exposes the
//! `fairpipe` binary.

pub mod cli;
pub mod error;
pub mod io;
pub mod render;

pub use error::{FileError, Result};
pub use io::{load_config, load_csv, load_model, save_model, ModelFile, MODEL_FORMAT_VERSION};
pub use render::{canonical_json, figure2_csv, render_report, table2_text};
