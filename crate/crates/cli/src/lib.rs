//! Library side of the `ptbundle` command: input grammar, the analysis
//! pipeline, JSON and text output, and batch processing.

pub mod batch;
pub mod error;
pub mod input;
pub mod report;
pub mod text;

pub use error::CliError;
pub use input::{parse_input, parse_line, Input};
pub use report::{analyze, AnalysisReport, Pipeline, Section, Settings};
