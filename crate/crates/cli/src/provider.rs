//! Forward-simulated datasets that grow on demand, in sources and in time.

use std::sync::Arc;

use dirac_boundary::{Bump, ResponseDataset, SystemKind, TimeGrid};
use dirac_core::dirac::DiracSystem;
use dirac_core::forward::{build_dataset, seeded_sources, source_grid};
use dirac_core::CoreError;
use dirac_recovery::{RecoveryError, ResponseSource};

pub struct SimulatedResponses {
    sys: Arc<DiracSystem>,
    kind: SystemKind,
    tau: f64,
    grid: TimeGrid,
    bump: Bump,
    seed: u64,
    dataset: Option<ResponseDataset>,
}

impl SimulatedResponses {
    pub fn new(sys: Arc<DiracSystem>, kind: SystemKind, tau: f64, grid: TimeGrid, bump: Bump, seed: u64) -> Self {
        SimulatedResponses { sys, kind, tau, grid, bump, seed, dataset: None }
    }

    /// Ensures at least `n` entries exist.
    pub fn grow(&mut self, n: usize) -> Result<&ResponseDataset, CoreError> {
        let have = self.dataset.as_ref().map_or(0, |d| d.len());
        if have < n {
            let sources = seeded_sources(&self.sys, self.kind, self.grid, self.bump, self.seed, have..n)?;
            let more = build_dataset(&self.sys, self.kind, self.tau, sources)?;
            match &mut self.dataset {
                None => self.dataset = Some(more),
                Some(ds) => {
                    for e in more.entries {
                        ds.push(e)?;
                    }
                }
            }
        }
        Ok(self.dataset.as_ref().expect("dataset built above"))
    }

    /// Moves to a grid reaching `horizon + tau` if the current one is
    /// shorter, dropping the simulated entries; later requests simulate
    /// only the sources they ask for.  Sources are seeded by index, so an
    /// entry keeps its values on the common part of the two grids.
    pub fn extend(&mut self, horizon: f64) -> Result<(), CoreError> {
        let end = horizon + self.tau;
        if self.grid.end() >= end - 1e-9 * self.grid.step {
            return Ok(());
        }
        let steps = (self.tau / self.grid.step).round() as usize;
        self.grid = source_grid(self.tau, steps, end)?;
        self.dataset = None;
        Ok(())
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn into_dataset(self) -> Option<ResponseDataset> {
        self.dataset
    }

    pub fn current(&self) -> Option<&ResponseDataset> {
        self.dataset.as_ref()
    }
}

impl ResponseSource for SimulatedResponses {
    fn dataset(&mut self, n_sources: usize) -> Result<&ResponseDataset, RecoveryError> {
        self.grow(n_sources).map_err(|e| RecoveryError::Mismatch(format!("simulation failed: {e}")))
    }

    fn extend_to(&mut self, horizon: f64) -> Result<(), RecoveryError> {
        self.extend(horizon).map_err(|e| RecoveryError::Mismatch(format!("simulation failed: {e}")))
    }
}
