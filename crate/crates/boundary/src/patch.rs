use serde::{Deserialize, Serialize};

use crate::BoundaryError;

/// Sparse matrix with entries in {-1, +1}, stored as (row, col, sign) triples.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SignedIncidence {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(u32, u32, i8)>,
}

impl SignedIncidence {
    pub fn new(rows: usize, cols: usize) -> Self {
        SignedIncidence { rows, cols, entries: Vec::new() }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "incidence: input length");
        let mut y = vec![0.0; self.rows];
        for &(r, c, s) in &self.entries {
            y[r as usize] += s as f64 * x[c as usize];
        }
        y
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "incidence: input length");
        let mut x = vec![0.0; self.cols];
        for &(r, c, s) in &self.entries {
            x[c as usize] += s as f64 * y[r as usize];
        }
        x
    }

    /// Integer product `self * rhs`, dense; only used on small matrices in checks.
    pub fn compose_is_zero(&self, rhs: &SignedIncidence) -> bool {
        if self.cols != rhs.rows {
            return false;
        }
        let mut by_row: Vec<Vec<(usize, i64)>> = vec![Vec::new(); rhs.rows];
        for &(r, c, s) in &rhs.entries {
            by_row[r as usize].push((c as usize, s as i64));
        }
        let mut acc = std::collections::HashMap::new();
        for &(r, c, s) in &self.entries {
            for &(cc, ss) in &by_row[c as usize] {
                *acc.entry((r, cc)).or_insert(0i64) += s as i64 * ss;
            }
        }
        acc.values().all(|&v| v == 0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceCounts {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
}

impl SurfaceCounts {
    pub fn euler(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64
    }
}

/// The closed sub-complex generated by the measurement patch, seen as a
/// stand-alone surface complex.
///
/// Simplices are identified by their sorted global vertex tuples, which is all
/// an outside observer needs to line sources up with records.  Sources may
/// only live on `admissible` simplices (their whole boundary star lies in the
/// patch), so that applying `coboundary` to a source never leaves the patch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPatch {
    pub simplices: [Vec<Vec<usize>>; 3],
    pub admissible: [Vec<bool>; 3],
    /// `coboundary[0]`: edges x vertices, `coboundary[1]`: faces x edges.
    pub coboundary: [SignedIncidence; 2],
    /// Counts of the whole boundary surface, not just the patch.
    pub surface: SurfaceCounts,
    pub patch_faces: usize,
}

impl BoundaryPatch {
    pub fn len(&self, k: usize) -> usize {
        self.simplices[k].len()
    }

    pub fn sizes(&self) -> [usize; 3] {
        [self.len(0), self.len(1), self.len(2)]
    }

    pub fn admissible_count(&self, k: usize) -> usize {
        self.admissible[k].iter().filter(|&&a| a).count()
    }

    /// Boundary exterior derivative of a degree-`k` patch cochain.  Degree 2
    /// maps to the (empty) space of boundary 3-cochains.
    pub fn d(&self, k: usize, x: &[f64]) -> Vec<f64> {
        match k {
            0 | 1 => self.coboundary[k].apply(x),
            _ => Vec::new(),
        }
    }

    pub fn is_supported(&self, k: usize, x: &[f64]) -> bool {
        x.len() == self.len(k)
            && x.iter().zip(&self.admissible[k]).all(|(v, &ok)| ok || *v == 0.0)
    }

    pub fn validate(&self) -> Result<(), BoundaryError> {
        for k in 0..3 {
            if self.admissible[k].len() != self.simplices[k].len() {
                return Err(BoundaryError::Mismatch(format!("admissible mask of degree {k} has wrong length")));
            }
            if let Some(s) = self.simplices[k].iter().find(|s| s.len() != k + 1) {
                return Err(BoundaryError::Mismatch(format!("degree-{k} simplex {s:?} has wrong arity")));
            }
        }
        for k in 0..2 {
            let d = &self.coboundary[k];
            if d.rows != self.len(k + 1) || d.cols != self.len(k) {
                return Err(BoundaryError::Mismatch(format!("coboundary {k} has shape {}x{}", d.rows, d.cols)));
            }
        }
        if !self.coboundary[1].compose_is_zero(&self.coboundary[0]) {
            return Err(BoundaryError::Mismatch("patch coboundaries do not compose to zero".into()));
        }
        if self.surface.euler() % 2 != 0 {
            return Err(BoundaryError::Mismatch(format!("boundary surface has odd Euler characteristic {}", self.surface.euler())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // one triangle [0,1,2] with its edges and vertices
    pub(crate) fn triangle() -> BoundaryPatch {
        let mut d0 = SignedIncidence::new(3, 3);
        for (e, (a, b)) in [(0u32, 1u32), (0, 2), (1, 2)].iter().enumerate() {
            d0.entries.push((e as u32, *a, -1));
            d0.entries.push((e as u32, *b, 1));
        }
        let mut d1 = SignedIncidence::new(1, 3);
        d1.entries = vec![(0, 0, 1), (0, 1, -1), (0, 2, 1)];
        BoundaryPatch {
            simplices: [
                vec![vec![0], vec![1], vec![2]],
                vec![vec![0, 1], vec![0, 2], vec![1, 2]],
                vec![vec![0, 1, 2]],
            ],
            admissible: [vec![false; 3], vec![false; 3], vec![true]],
            coboundary: [d0, d1],
            surface: SurfaceCounts { vertices: 4, edges: 6, faces: 4 },
            patch_faces: 1,
        }
    }

    #[test]
    fn triangle_patch_is_valid() {
        let p = triangle();
        p.validate().unwrap();
        assert_eq!(p.surface.euler(), 2);
        assert_eq!(p.d(0, &[1.0, 1.0, 1.0]), vec![0.0; 3]);
        assert!(p.d(2, &[1.0]).is_empty());
    }

    #[test]
    fn support_check_respects_mask() {
        let p = triangle();
        assert!(p.is_supported(2, &[3.0]));
        assert!(!p.is_supported(1, &[0.0, 1.0, 0.0]));
        assert!(p.is_supported(1, &[0.0; 3]));
    }

    #[test]
    fn transpose_is_adjoint() {
        let p = triangle();
        let x = [0.3, -1.2, 2.0];
        let y = [1.0, 0.5, -0.25];
        let dx = p.d(0, &x);
        let dty = p.coboundary[0].apply_transpose(&y);
        let lhs: f64 = dx.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&dty).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-15);
    }
}
