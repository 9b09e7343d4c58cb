//! Simplicial 3-manifolds with boundary, the discrete Maxwell/Dirac system on
//! them, and a forward simulator that turns boundary sources into boundary
//! measurements.
//!
//! The recovery side lives in a separate crate and only ever sees what this
//! crate exports through [`dirac_boundary`].

pub mod dirac;
pub mod error;
pub mod forms;
pub mod forward;
pub mod homology;
pub mod mesh;
pub mod sparse;

pub use error::CoreError;
pub use mesh::SimplicialComplex3;
