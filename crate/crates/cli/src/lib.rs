//! Library surface of the `youden-drm` CLI: dataset parsing, report
//! assembly, and the estimate/simulate pipelines.

pub mod commands;
pub mod dataset;
pub mod report;
