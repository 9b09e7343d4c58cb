use serde::{Deserialize, Serialize};

use crate::{BoundaryError, TimeGrid};

/// Normal traces measured on the patch.
///
/// `traces[j]` holds the normal trace of the degree-`j+1` field, which lives on
/// patch `j`-simplices, row-major in time.  A record may omit some degrees
/// (the physical system only measures one of them); omitted degrees are empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRecord {
    pub grid: TimeGrid,
    pub sizes: [usize; 3],
    pub traces: [Vec<f64>; 3],
}

impl BoundaryRecord {
    pub fn zeros(grid: TimeGrid, sizes: [usize; 3], present: [bool; 3]) -> Self {
        let traces = std::array::from_fn(|j| if present[j] { vec![0.0; grid.len * sizes[j]] } else { Vec::new() });
        BoundaryRecord { grid, sizes, traces }
    }

    pub fn has(&self, j: usize) -> bool {
        !self.traces[j].is_empty() || self.sizes[j] == 0
    }

    pub fn present(&self) -> [bool; 3] {
        std::array::from_fn(|j| !self.traces[j].is_empty())
    }

    pub fn at(&self, j: usize, n: usize) -> &[f64] {
        let m = self.sizes[j];
        if self.traces[j].is_empty() {
            return &[];
        }
        &self.traces[j][n * m..(n + 1) * m]
    }

    pub fn at_mut(&mut self, j: usize, n: usize) -> &mut [f64] {
        let m = self.sizes[j];
        &mut self.traces[j][n * m..(n + 1) * m]
    }

    pub fn max_abs(&self) -> f64 {
        self.traces.iter().flatten().fold(0.0f64, |a, &x| a.max(x.abs()))
    }

    /// Max abs difference relative to the larger of the two records.
    pub fn relative_distance(&self, other: &BoundaryRecord) -> Result<f64, BoundaryError> {
        if !self.grid.same_as(&other.grid) || self.sizes != other.sizes || self.present() != other.present() {
            return Err(BoundaryError::Mismatch("records are not comparable".into()));
        }
        let mut diff = 0.0f64;
        for j in 0..3 {
            for (a, b) in self.traces[j].iter().zip(&other.traces[j]) {
                diff = diff.max((a - b).abs());
            }
        }
        let scale = self.max_abs().max(other.max_abs());
        Ok(if scale == 0.0 { diff } else { diff / scale })
    }
}
