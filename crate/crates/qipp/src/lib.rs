//! File formats, CSV reports and tolerance checks around `qipp-core`.
//!
//! The `qipp` binary is a thin layer over these modules.

pub mod checks;
pub mod meshio;
pub mod report;

pub use checks::Check;
