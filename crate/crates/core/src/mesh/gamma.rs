use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::SimplicialComplex3;
use crate::CoreError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GammaSelector {
    Whole,
    /// At least `ceil(p * |boundary faces|)` faces grown breadth-first from
    /// boundary face number `seed` (an index into `boundary_faces()`).
    Fraction { p: f64, seed: usize },
}

pub fn select_gamma(c: &SimplicialComplex3, selector: GammaSelector) -> Result<SimplicialComplex3, CoreError> {
    let bf = c.boundary_faces();
    if bf.is_empty() {
        return Err(CoreError::EmptyBoundary);
    }
    match selector {
        GammaSelector::Whole => c.with_gamma(bf.to_vec()),
        GammaSelector::Fraction { p, seed } => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(CoreError::Malformed(format!("gamma fraction {p} outside (0, 1]")));
            }
            if seed >= bf.len() {
                return Err(CoreError::Malformed(format!("seed face {seed} but only {} boundary faces", bf.len())));
            }
            let target = ((p * bf.len() as f64) - 1e-12).ceil().max(1.0) as usize;
            // boundary faces sharing an edge
            let mut by_edge: HashMap<[usize; 2], Vec<usize>> = HashMap::new();
            for &f in bf {
                let [a, b, cc] = c.faces()[f];
                for e in [[a, b], [a, cc], [b, cc]] {
                    by_edge.entry(e).or_default().push(f);
                }
            }
            let mut chosen = BTreeSet::new();
            let mut q = VecDeque::from([bf[seed]]);
            chosen.insert(bf[seed]);
            while chosen.len() < target {
                let Some(f) = q.pop_front() else { break };
                let [a, b, cc] = c.faces()[f];
                let mut nb: Vec<usize> = [[a, b], [a, cc], [b, cc]].iter().flat_map(|e| by_edge[e].iter().copied()).collect();
                nb.sort_unstable();
                nb.dedup();
                for g in nb {
                    if chosen.len() >= target {
                        break;
                    }
                    if chosen.insert(g) {
                        q.push_back(g);
                    }
                }
            }
            if chosen.len() < target {
                return Err(CoreError::Geometry(format!(
                    "the boundary component of the seed face has only {} faces, {target} requested",
                    chosen.len()
                )));
            }
            c.with_gamma(chosen.into_iter().collect())
        }
    }
}
