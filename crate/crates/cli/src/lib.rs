//! Reading, staging and exporting for the `wumprep` log preprocessor.
//!
//! The algorithms live in [`wumprep_core`]; this crate adds file input, the
//! intermediate stage format, the CSV tables, the run report and the CLI.

pub mod cli;
pub mod error;
pub mod export;
pub mod input;
pub mod intermediate;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
pub use export::{export_tables, read_tables, ExportBundle};
pub use input::{load_sources, parse_bytes, parse_stream, InputSpec};
pub use pipeline::{run_pipeline, write_run, InputSource, PipelineConfig, RunOutput};
pub use report::{render_report, RunReport};
