//! Verification pipeline and file formats on top of `period-core`.

pub mod config;
pub mod formats;
pub mod pipeline;
pub mod report;

pub use config::{ConfigError, FrameSpec, TrialConfig};
pub use pipeline::{run_pipeline, Check, Status, VerificationReport};
pub use report::{emit_report, Format};
