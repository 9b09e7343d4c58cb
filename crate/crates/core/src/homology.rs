//! Exact Betti numbers over the rationals.  Nothing here touches floating
//! point, materials or the PDE machinery.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dirac::DiracSystem;
use crate::mesh::SimplicialComplex3;
use crate::CoreError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HomologyMode {
    Absolute,
    /// Chains modulo boundary chains: H_k(M, dM).
    Relative,
}

/// Boundary maps `bd[k-1]: C_k -> C_{k-1}` for k = 1..3 with entries in {-1, 0, 1}.
#[derive(Clone, Debug)]
pub struct ChainComplexQ {
    pub mode: HomologyMode,
    pub dims: [usize; 4],
    /// Column-sparse: `bd[k-1][j]` lists (row, sign) of the boundary of k-simplex j.
    pub bd: [Vec<Vec<(usize, i64)>>; 3],
}

impl ChainComplexQ {
    pub fn new(c: &SimplicialComplex3, mode: HomologyMode) -> Self {
        let keep: [Vec<usize>; 4] = std::array::from_fn(|k| match mode {
            HomologyMode::Absolute => (0..c.count(k)).collect(),
            HomologyMode::Relative => c.interior_simplices(k),
        });
        let local: [BTreeMap<usize, usize>; 4] = std::array::from_fn(|k| keep[k].iter().enumerate().map(|(i, &g)| (g, i)).collect());
        let bd = std::array::from_fn(|km1| {
            let inc = c.incidence(km1);
            let mut cols: Vec<Vec<(usize, i64)>> = vec![Vec::new(); keep[km1 + 1].len()];
            for &(r, col, s) in &inc.entries {
                if let (Some(&j), Some(&i)) = (local[km1 + 1].get(&(r as usize)), local[km1].get(&(col as usize))) {
                    cols[j].push((i, s as i64));
                }
            }
            cols
        });
        ChainComplexQ { mode, dims: std::array::from_fn(|k| keep[k].len()), bd }
    }

    /// Checks that consecutive boundary maps compose to zero, exactly.
    pub fn is_complex(&self) -> bool {
        for k in 1..3 {
            // bd[k-1] * bd[k]
            for col in &self.bd[k] {
                let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
                for &(mid, s) in col {
                    for &(row, t) in &self.bd[k - 1][mid] {
                        *acc.entry(row).or_insert(0) += s * t;
                    }
                }
                if acc.values().any(|&v| v != 0) {
                    return false;
                }
            }
        }
        true
    }

    pub fn rank(&self, k: usize) -> usize {
        assert!((1..=3).contains(&k));
        rational_rank(&self.bd[k - 1])
    }

    pub fn betti(&self) -> [usize; 4] {
        let rank = [0, self.rank(1), self.rank(2), self.rank(3), 0];
        std::array::from_fn(|k| self.dims[k] - rank[k] - rank[k + 1])
    }
}

/// Rank of a sparse integer matrix (given by columns) by fraction-exact
/// Gaussian elimination.  Columns are reduced against earlier pivots keyed by
/// their lowest nonzero row, which keeps fill small on incidence matrices.
pub fn rational_rank(cols: &[Vec<(usize, i64)>]) -> usize {
    let mut pivots: BTreeMap<usize, BTreeMap<usize, BigRational>> = BTreeMap::new();
    for col in cols {
        let mut v: BTreeMap<usize, BigRational> = BTreeMap::new();
        for &(r, s) in col {
            let e = v.entry(r).or_insert_with(BigRational::zero);
            *e += BigRational::from_integer(BigInt::from(s));
        }
        v.retain(|_, x| !x.is_zero());
        loop {
            let Some((low, lead)) = v.iter().next_back().map(|(&r, x)| (r, x.clone())) else { break };
            let Some(p) = pivots.get(&low) else {
                // normalize so the pivot entry is one
                let inv = BigRational::one() / lead;
                for x in v.values_mut() {
                    *x *= &inv;
                }
                pivots.insert(low, v);
                break;
            };
            for (r, x) in p {
                let e = v.entry(*r).or_insert_with(BigRational::zero);
                *e -= &lead * x;
                if e.is_zero() {
                    v.remove(r);
                }
            }
        }
    }
    pivots.len()
}

pub fn betti(c: &SimplicialComplex3, mode: HomologyMode) -> [usize; 4] {
    ChainComplexQ::new(c, mode).betti()
}

/// Standard alternating count V - E + F - T.
pub fn euler(c: &SimplicialComplex3) -> i64 {
    c.euler()
}

/// V - E + F of the boundary surface.
pub fn boundary_euler(c: &SimplicialComplex3) -> i64 {
    c.boundary_euler()
}

pub fn euler_from_betti(b: [usize; 4]) -> i64 {
    b[0] as i64 - b[1] as i64 + b[2] as i64 - b[3] as i64
}

/// Kernel dimensions of the degree blocks of the squared Dirac operator,
/// checked against the relative Betti numbers.
pub fn hodge_kernel_check(sys: &DiracSystem) -> Result<[usize; 4], CoreError> {
    let dims = sys.harmonic_dims(crate::dirac::DEFAULT_KERNEL_TOL)?;
    let rel = betti(sys.complex(), HomologyMode::Relative);
    if dims != rel {
        return Err(CoreError::Consistency(format!("harmonic dimensions {dims:?} differ from relative Betti numbers {rel:?}")));
    }
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::*;

    #[test]
    fn single_tet() {
        let c = build_single_tet();
        assert_eq!(betti(&c, HomologyMode::Absolute), [1, 0, 0, 0]);
        assert_eq!(betti(&c, HomologyMode::Relative), [0, 0, 0, 1]);
    }

    #[test]
    fn torus_absolute_and_relative() {
        let c = build_solid_torus(4).unwrap();
        assert_eq!(betti(&c, HomologyMode::Absolute), [1, 1, 0, 0]);
        assert_eq!(betti(&c, HomologyMode::Relative), [0, 0, 1, 1]);
    }

    #[test]
    fn tunnels_and_cavities() {
        for k in 0..3 {
            let c = build_tunneled_box(k, 1).unwrap();
            assert_eq!(betti(&c, HomologyMode::Absolute), [1, k, 0, 0]);
            assert_eq!(betti(&c, HomologyMode::Relative), [0, 0, k, 1]);
        }
        let c = build_tunneled_box_with(1, 1, TunnelStyle::Cavity).unwrap();
        assert_eq!(betti(&c, HomologyMode::Absolute), [1, 1, 1, 0]);
    }

    #[test]
    fn rank_handles_dependent_columns() {
        let cols = vec![vec![(0, 1), (1, -1)], vec![(1, 1), (2, -1)], vec![(0, 1), (2, -1)], vec![(0, 2), (1, -2)]];
        assert_eq!(rational_rank(&cols), 2);
        assert_eq!(rational_rank(&[vec![(0, 1)], vec![(1, 3)], vec![(0, 2), (1, 6)]]), 2);
    }

    #[test]
    fn chain_maps_compose_to_zero() {
        let c = refine(&build_solid_torus(3).unwrap()).unwrap();
        for mode in [HomologyMode::Absolute, HomologyMode::Relative] {
            assert!(ChainComplexQ::new(&c, mode).is_complex());
        }
    }

    #[test]
    fn euler_relation() {
        for c in [build_single_tet(), build_solid_torus(5).unwrap(), build_tunneled_box(2, 1).unwrap()] {
            assert_eq!(euler_from_betti(betti(&c, HomologyMode::Absolute)), euler(&c));
            assert_eq!(boundary_euler(&c), 2 * euler(&c));
        }
    }
}
