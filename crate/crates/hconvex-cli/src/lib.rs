//! Command-line surface for the hconvex solver: problem configuration,
//! solve/verify/bounds/export commands and the stable file formats behind
//! them. The binary (`hconvex`) is a thin dispatcher over [`commands`].

pub mod commands;
pub mod config;
pub mod files;

pub use commands::{cmd_bounds, cmd_export, cmd_solve, cmd_verify, ExportFormat};
pub use config::Config;
pub use files::{ReportFile, SolutionFile};
