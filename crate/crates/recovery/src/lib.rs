//! Betti numbers of a manifold with boundary from boundary measurements.
//!
//! Everything here consumes a [`dirac_boundary::ResponseDataset`] and nothing
//! else: the crate does not depend on the mesh, the materials or the
//! simulator.

pub mod blagov;
pub mod error;
pub mod recover;

pub use blagov::{
    assemble_rhs, forcing_terms, wave_solve, AveragedFunctional, BoundaryData, GridCache, InnerProductGrid, ProfileWeights, Series, Term, Window,
};
pub use error::RecoveryError;
pub use recover::{
    beta1_physical, betti1_report, beta2_from_boundary, betti_from_dirac, betti_physical, count_dimension, gram_matrix, projected_inner, snap_horizon, state_norms,
    BettiReport, DimensionCount, Method, ProjectedGram, RecoveryConfig, ResponseSource,
};
