use serde::{Deserialize, Serialize};

use crate::{BoundaryError, BoundaryPatch};

/// Uniform grid `start + n * step`, `n = 0..len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl TimeGrid {
    /// Grid from `start` to at least `end` with `start` itself a lattice point.
    pub fn spanning(start: f64, end: f64, step: f64) -> Self {
        let len = ((end - start) / step - 1e-9).ceil().max(0.0) as usize + 1;
        TimeGrid { start, step, len }
    }

    pub fn time(&self, n: usize) -> f64 {
        self.start + n as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.time(self.len.saturating_sub(1))
    }

    /// Index of `t` if it sits on the lattice (to 1e-9 of a step).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.start) / self.step;
        let n = x.round();
        if (x - n).abs() > 1e-9 || n < 0.0 || n as usize >= self.len {
            return None;
        }
        Some(n as usize)
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.len == other.len
            && (self.start - other.start).abs() <= 1e-12 * self.step
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }
}

/// Smooth compactly supported bump `exp(-1/(1-x^2))` on `(lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
}

impl Bump {
    fn local(&self, t: f64) -> Option<f64> {
        let x = (2.0 * t - (self.lo + self.hi)) / (self.hi - self.lo);
        (x.abs() < 1.0).then_some(x)
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.local(t) {
            Some(x) => (-1.0 / (1.0 - x * x)).exp(),
            None => 0.0,
        }
    }

    pub fn rate(&self, t: f64) -> f64 {
        match self.local(t) {
            Some(x) => {
                let q = 1.0 - x * x;
                (-1.0 / q).exp() * (-2.0 * x / (q * q)) * 2.0 / (self.hi - self.lo)
            }
            None => 0.0,
        }
    }

    pub fn second_rate(&self, t: f64) -> f64 {
        match self.local(t) {
            Some(x) => {
                let q = 1.0 - x * x;
                let e = (-1.0 / q).exp();
                // d/dx of e * (-2x/q^2)
                let g = -2.0 * x / (q * q);
                let dg = -2.0 / (q * q) - 8.0 * x * x / (q * q * q);
                let s = 2.0 / (self.hi - self.lo);
                e * (g * g + dg) * s * s
            }
            None => 0.0,
        }
    }
}

/// Values and exact time derivatives of a scalar profile, sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeProfile {
    pub values: Vec<f64>,
    pub rates: Vec<f64>,
}

impl TimeProfile {
    pub fn sample(grid: &TimeGrid, f: impl Fn(f64) -> (f64, f64)) -> Self {
        let (values, rates) = (0..grid.len).map(|n| f(grid.time(n))).unzip();
        TimeProfile { values, rates }
    }

    pub fn zero(len: usize) -> Self {
        TimeProfile { values: vec![0.0; len], rates: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `t -> p(t + m*step)` on the same grid, zero where undefined.
    pub fn shifted(&self, m: isize) -> Self {
        let n = self.len() as isize;
        let pick = |v: &Vec<f64>| {
            (0..n)
                .map(|i| {
                    let j = i + m;
                    if (0..n).contains(&j) {
                        v[j as usize]
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        TimeProfile { values: pick(&self.values), rates: pick(&self.rates) }
    }
}

/// One separable piece `profile(t) * spatial` of a degree-`degree` source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceTerm {
    pub degree: usize,
    pub spatial: Vec<f64>,
    pub profile: TimeProfile,
}

/// Tangential boundary data on the patch: a sum of separable terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySource {
    pub grid: TimeGrid,
    pub sizes: [usize; 3],
    pub terms: Vec<SourceTerm>,
    /// Generating bump, kept as metadata.
    pub bump: Option<Bump>,
}

impl BoundarySource {
    pub fn zero(grid: TimeGrid, sizes: [usize; 3]) -> Self {
        BoundarySource { grid, sizes, terms: Vec::new(), bump: None }
    }

    pub fn push(&mut self, degree: usize, spatial: Vec<f64>, profile: TimeProfile) {
        assert!(degree < 3 && spatial.len() == self.sizes[degree], "source term shape");
        assert_eq!(profile.len(), self.grid.len, "source term grid");
        self.terms.push(SourceTerm { degree, spatial, profile });
    }

    fn accumulate(&self, k: usize, n: usize, rate: bool, out: &mut [f64]) {
        for term in self.terms.iter().filter(|t| t.degree == k) {
            let a = if rate { term.profile.rates[n] } else { term.profile.values[n] };
            if a != 0.0 {
                for (o, s) in out.iter_mut().zip(&term.spatial) {
                    *o += a * s;
                }
            }
        }
    }

    pub fn value(&self, k: usize, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.sizes[k]];
        self.accumulate(k, n, false, &mut out);
        out
    }

    pub fn rate(&self, k: usize, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.sizes[k]];
        self.accumulate(k, n, true, &mut out);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| {
            t.spatial.iter().all(|&x| x == 0.0)
                || (t.profile.values.iter().all(|&x| x == 0.0) && t.profile.rates.iter().all(|&x| x == 0.0))
        })
    }

    pub fn has_degree(&self, k: usize) -> bool {
        self.terms.iter().any(|t| t.degree == k)
    }

    /// First and last grid index at which any term is active.
    pub fn active_window(&self) -> Option<(usize, usize)> {
        let mut lo = usize::MAX;
        let mut hi = 0;
        for t in &self.terms {
            if t.spatial.iter().all(|&x| x == 0.0) {
                continue;
            }
            for n in 0..self.grid.len {
                if t.profile.values[n] != 0.0 || t.profile.rates[n] != 0.0 {
                    lo = lo.min(n);
                    hi = hi.max(n);
                }
            }
        }
        (lo != usize::MAX).then_some((lo, hi))
    }

    pub fn sum(&self, other: &BoundarySource) -> Result<BoundarySource, BoundaryError> {
        if !self.grid.same_as(&other.grid) || self.sizes != other.sizes {
            return Err(BoundaryError::Mismatch("sources live on different grids or patches".into()));
        }
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out.bump = None;
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> BoundarySource {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.spatial.iter_mut().for_each(|x| *x *= c);
        }
        out
    }

    pub fn shifted(&self, m: isize) -> BoundarySource {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.profile = t.profile.shifted(m);
        }
        out.bump = self.bump.map(|b| Bump { lo: b.lo - m as f64 * self.grid.step, hi: b.hi - m as f64 * self.grid.step });
        out
    }

    /// Checks the two contracts every source must meet: spatial support on
    /// admissible patch simplices and temporal support strictly inside
    /// `(grid.start, 0)`.
    pub fn check_support(&self, patch: &BoundaryPatch) -> Result<(), BoundaryError> {
        if self.sizes != patch.sizes() {
            return Err(BoundaryError::Mismatch("source sizes differ from patch".into()));
        }
        for t in &self.terms {
            if !patch.is_supported(t.degree, &t.spatial) {
                return Err(BoundaryError::Mismatch(format!(
                    "degree-{} source term touches a simplex outside the admissible patch",
                    t.degree
                )));
            }
        }
        if let Some((lo, hi)) = self.active_window() {
            if lo == 0 || self.grid.time(hi) >= 0.0 {
                return Err(BoundaryError::Mismatch(format!(
                    "source active on [{}, {}], outside the open window ({}, 0)",
                    self.grid.time(lo),
                    self.grid.time(hi),
                    self.grid.start
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_indexing() {
        let g = TimeGrid::spanning(-1.0, 2.0, 0.25);
        assert_eq!(g.len, 13);
        assert_eq!(g.index_of(0.0), Some(4));
        assert_eq!(g.index_of(0.1), None);
        assert!((g.end() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bump_vanishes_outside() {
        let b = Bump { lo: -0.9, hi: -0.1 };
        assert_eq!(b.value(-0.9), 0.0);
        assert_eq!(b.value(0.0), 0.0);
        assert_eq!(b.rate(-1.0), 0.0);
        assert!((b.value(-0.5) - (-1.0f64).exp()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn bump_rates_match_differences(t in -0.85f64..-0.15) {
            let b = Bump { lo: -0.9, hi: -0.1 };
            let h = 1e-6;
            let fd = (b.value(t + h) - b.value(t - h)) / (2.0 * h);
            prop_assert!((fd - b.rate(t)).abs() < 1e-6 * (1.0 + b.rate(t).abs()));
            let fd2 = (b.rate(t + h) - b.rate(t - h)) / (2.0 * h);
            prop_assert!((fd2 - b.second_rate(t)).abs() < 1e-5 * (1.0 + b.second_rate(t).abs()));
        }
    }

    #[test]
    fn shift_moves_samples() {
        let p = TimeProfile { values: vec![0.0, 1.0, 2.0, 3.0], rates: vec![1.0; 4] };
        let s = p.shifted(1);
        assert_eq!(s.values, vec![1.0, 2.0, 3.0, 0.0]);
        assert_eq!(s.rates, vec![1.0, 1.0, 1.0, 0.0]);
        assert_eq!(p.shifted(-1).values, vec![0.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn sum_accumulates_terms() {
        let g = TimeGrid::spanning(-1.0, 0.0, 0.5);
        let prof = TimeProfile { values: vec![0.0, 1.0, 0.0], rates: vec![0.0; 3] };
        let mut a = BoundarySource::zero(g, [1, 2, 0]);
        a.push(1, vec![1.0, 2.0], prof.clone());
        let mut b = BoundarySource::zero(g, [1, 2, 0]);
        b.push(1, vec![0.5, 0.5], prof);
        let s = a.sum(&b).unwrap();
        assert_eq!(s.value(1, 1), vec![1.5, 2.5]);
        assert_eq!(s.value(0, 1), vec![0.0]);
        assert!(!s.is_zero());
        assert!(BoundarySource::zero(g, [1, 2, 0]).is_zero());
    }
}
