//! Library side of the `lexrsm` command: pipelines, report format and the
//! benchmark generator. The binary is a thin argument parser over this.

pub mod commands;
pub mod generate;
pub mod report;
