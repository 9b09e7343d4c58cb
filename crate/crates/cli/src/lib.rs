//! Scenario runner around the forward simulator and the boundary-only
//! Betti recovery.

pub mod error;
pub mod oracle;
pub mod pipeline;
pub mod provider;
pub mod scenario;

pub use error::CliError;
pub use pipeline::{run, verify, Checklist, RunOptions, RunReport};
pub use scenario::Scenario;
