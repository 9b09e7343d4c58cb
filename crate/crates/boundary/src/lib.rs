//! Everything an observer standing on the boundary patch is allowed to see.
//!
//! The forward simulator writes into these types and the recovery crate reads
//! from them; neither side needs the other.

pub mod dataset;
pub mod error;
pub mod patch;
pub mod record;
pub mod source;

pub use dataset::{DatasetHeader, ResponseDataset, ResponseEntry, SystemKind};
pub use error::BoundaryError;
pub use patch::{BoundaryPatch, SignedIncidence, SurfaceCounts};
pub use record::BoundaryRecord;
pub use source::{BoundarySource, Bump, SourceTerm, TimeGrid, TimeProfile};
