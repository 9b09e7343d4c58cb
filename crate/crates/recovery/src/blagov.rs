//! Inner products of interior waves rebuilt from boundary data alone.
//!
//! For two entries `a` (driving `u`) and `b` (driving `w`) of a dataset,
//! `I(s, t) = (u_k(t), w_k(s))` solves `I_ss - I_tt = F` on the lattice of the
//! dataset grid, with zero Cauchy data at `t = -tau` and a zero Dirichlet
//! value at `s = -tau`.  The forcing `F` is a sum of patch pairings
//! `<U(t), V(s)>` in which one factor is always a source quantity.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use dirac_boundary::{ResponseDataset, SystemKind};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::RecoveryError;

/// One time series entering the forcing.  Source quantities vanish outside
/// the source window; record quantities come straight from the dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Series {
    /// Tangential data of degree `k` (on patch `k`-simplices).
    Source(usize),
    /// Its surface coboundary (on patch `(k+1)`-simplices).
    SourceD(usize),
    /// `f_k' + d f_{k-1}` (on patch `k`-simplices).
    Phi(usize),
    /// `traces[j]`: normal trace of the degree-`(j+1)` field.
    Rec(usize),
    /// Time derivative of `traces[j]`.
    RecRate(usize),
}

impl Series {
    pub fn is_source(self) -> bool {
        matches!(self, Series::Source(_) | Series::SourceD(_) | Series::Phi(_))
    }

    /// Degree of the patch simplices the series lives on.
    pub fn support_degree(self) -> usize {
        match self {
            Series::Source(k) | Series::Phi(k) | Series::Rec(k) | Series::RecRate(k) => k,
            Series::SourceD(k) => k + 1,
        }
    }

    fn record(self) -> Option<usize> {
        match self {
            Series::Rec(j) | Series::RecRate(j) => Some(j),
            _ => None,
        }
    }
}

/// `sign * <U(t), V(s)>` where `U` belongs to the `u` entry and `V` to `w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub u: Series,
    pub v: Series,
    pub sign: f64,
}

/// The forcing terms of degree `k`.  Terms that need a trace missing from
/// the record layout are dropped; this is only legitimate for the
/// physical system, whose unmeasured traces vanish.
pub fn forcing_terms(k: usize, present: [bool; 3]) -> Vec<Term> {
    use Series::*;
    let mut t = Vec::new();
    if k <= 2 {
        t.push(Term { u: Source(k), v: RecRate(k), sign: -1.0 });
        t.push(Term { u: RecRate(k), v: Source(k), sign: 1.0 });
    }
    if k <= 1 {
        t.push(Term { u: SourceD(k), v: Rec(k + 1), sign: -1.0 });
        t.push(Term { u: Rec(k + 1), v: SourceD(k), sign: 1.0 });
    }
    if k >= 1 {
        t.push(Term { u: Phi(k - 1), v: Rec(k - 1), sign: 1.0 });
        t.push(Term { u: Rec(k - 1), v: Phi(k - 1), sign: -1.0 });
    }
    t.retain(|term| [term.u, term.v].iter().all(|s| s.record().map_or(true, |j| present[j])));
    t
}

/// Degrees whose inner products the dataset determines.
pub fn recoverable_degrees(kind: SystemKind) -> &'static [usize] {
    match kind {
        SystemKind::Complete => &[0, 1, 2, 3],
        SystemKind::Physical => &[1, 2],
    }
}

/// Source series of one entry as sums of `profile(t) * spatial` pieces.
#[derive(Clone, Debug, Default)]
struct SourceParts {
    /// Keyed by series; each piece is (profile id, spatial vector).
    series: HashMap<Series, Vec<(usize, Vec<f64>)>>,
}

/// Read-only view of a dataset with the derived series the forcing needs.
pub struct BoundaryData<'a> {
    ds: &'a ResponseDataset,
    sizes: [usize; 3],
    dt: f64,
    /// Distinct source time profiles over the grid points before `t = 0`.
    profiles: Vec<Vec<f64>>,
    parts: Vec<SourceParts>,
}

fn profile_id(profiles: &mut Vec<Vec<f64>>, p: &[f64]) -> usize {
    if let Some(i) = profiles.iter().position(|q| q.as_slice() == p) {
        return i;
    }
    profiles.push(p.to_vec());
    profiles.len() - 1
}

impl<'a> BoundaryData<'a> {
    pub fn new(ds: &'a ResponseDataset) -> Result<Self, RecoveryError> {
        let sizes = ds.header.sizes;
        let dt = ds.grid().step;
        let origin = ds.origin();
        let mut profiles = Vec::new();
        let mut parts = Vec::with_capacity(ds.len());
        for e in &ds.entries {
            e.source.check_support(&ds.patch)?;
            let mut sp = SourceParts::default();
            for t in &e.source.terms {
                if t.spatial.iter().all(|&x| x == 0.0) {
                    continue;
                }
                let k = t.degree;
                let val = profile_id(&mut profiles, &t.profile.values[..origin]);
                let rate = profile_id(&mut profiles, &t.profile.rates[..origin]);
                let mut add = |s: Series, p: usize, x: Vec<f64>| sp.series.entry(s).or_default().push((p, x));
                add(Series::Source(k), val, t.spatial.clone());
                add(Series::Phi(k), rate, t.spatial.clone());
                if k < 2 {
                    let d = ds.patch.d(k, &t.spatial);
                    add(Series::SourceD(k), val, d.clone());
                    add(Series::Phi(k + 1), val, d);
                }
            }
            parts.push(sp);
        }
        Ok(BoundaryData { ds, sizes, dt, profiles, parts })
    }

    pub fn dataset(&self) -> &ResponseDataset {
        self.ds
    }

    pub fn len(&self) -> usize {
        self.ds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ds.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Grid index of `t = 0`; the grid starts at `-tau`.
    pub fn origin(&self) -> usize {
        self.ds.origin()
    }

    pub fn grid_len(&self) -> usize {
        self.ds.grid().len
    }

    pub fn dim(&self, s: Series) -> usize {
        let d = s.support_degree();
        if d < 3 {
            self.sizes[d]
        } else {
            0
        }
    }

    pub fn present(&self) -> [bool; 3] {
        self.ds.header.record_degrees
    }

    pub fn terms(&self, k: usize) -> Result<Vec<Term>, RecoveryError> {
        if !recoverable_degrees(self.ds.header.kind).contains(&k) {
            return Err(RecoveryError::Mismatch(format!("degree {k} is not determined by a {:?} dataset", self.ds.header.kind)));
        }
        Ok(forcing_terms(k, self.present()))
    }

    fn pieces(&self, e: usize, s: Series) -> &[(usize, Vec<f64>)] {
        self.parts[e].series.get(&s).map_or(&[], |v| v.as_slice())
    }

    /// Writes the value of series `s` of entry `e` at grid index `n` into `out`.
    pub fn row(&self, e: usize, s: Series, n: usize, out: &mut [f64]) {
        let m = out.len();
        out.fill(0.0);
        match s {
            Series::Source(_) | Series::SourceD(_) | Series::Phi(_) => {
                if n >= self.origin() {
                    return;
                }
                for (p, x) in self.pieces(e, s) {
                    let a = self.profiles[*p][n];
                    if a != 0.0 {
                        for (o, v) in out.iter_mut().zip(x) {
                            *o += a * v;
                        }
                    }
                }
            }
            Series::Rec(j) => {
                let rec = &self.ds.entries[e].record;
                if !rec.traces[j].is_empty() && m > 0 {
                    out.copy_from_slice(rec.at(j, n));
                }
            }
            Series::RecRate(j) => {
                let rec = &self.ds.entries[e].record;
                if rec.traces[j].is_empty() || m == 0 {
                    return;
                }
                let len = rec.grid.len;
                let h = self.dt;
                let comb: &[(isize, f64)] = if n >= 2 && n + 2 < len {
                    &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)]
                } else if n >= 1 && n + 1 < len {
                    &[(-1, -0.5), (1, 0.5)]
                } else if n == 0 {
                    &[(0, -1.5), (1, 2.0), (2, -0.5)]
                } else {
                    &[(0, 1.5), (-1, -2.0), (-2, 0.5)]
                };
                for &(di, c) in comb {
                    let i = (n as isize + di) as usize;
                    for (o, x) in out.iter_mut().zip(rec.at(j, i)) {
                        *o += c * x / h;
                    }
                }
            }
        }
    }

    /// `rows` consecutive values of a series as a `rows x dim` matrix.
    fn block(&self, e: usize, s: Series, rows: usize) -> DMatrix<f64> {
        let m = self.dim(s);
        let mut out = DMatrix::zeros(rows, m);
        let mut buf = vec![0.0; m];
        for n in 0..rows {
            self.row(e, s, n, &mut buf);
            for (c, &x) in buf.iter().enumerate() {
                out[(n, c)] = x;
            }
        }
        out
    }
}

/// Forcing `F[n * n_s + i]` at `t = t_n`, `s = s_i` for `n < n_t`, `i < n_s`.
pub fn assemble_rhs(data: &BoundaryData, a: usize, b: usize, k: usize, n_t: usize, n_s: usize) -> Result<Vec<f64>, RecoveryError> {
    let len = data.grid_len();
    if n_t > len || n_s > len {
        return Err(RecoveryError::Domain(format!("forcing needs {} grid points, the records have {len}", n_t.max(n_s))));
    }
    let mut f = DMatrix::<f64>::zeros(n_t, n_s);
    for term in data.terms(k)? {
        if data.dim(term.u) == 0 {
            continue;
        }
        let u = data.block(a, term.u, n_t);
        let v = data.block(b, term.v, n_s);
        f.gemm(term.sign, &u, &v.transpose(), 1.0);
    }
    let mut out = Vec::with_capacity(n_t * n_s);
    for n in 0..n_t {
        for i in 0..n_s {
            out.push(f[(n, i)]);
        }
    }
    Ok(out)
}

/// Leapfrog at unit Courant number.  `f` and the result are `n_t x n_s`,
/// row `n` holding time level `t_n`.  The first and last `s` columns are
/// held at zero.
pub fn wave_solve(f: &[f64], n_t: usize, n_s: usize, dt: f64) -> Vec<f64> {
    assert_eq!(f.len(), n_t * n_s);
    let mut u = vec![0.0; n_t * n_s];
    if n_t < 2 || n_s < 3 {
        return u;
    }
    let h2 = dt * dt;
    for i in 1..n_s - 1 {
        u[n_s + i] = -0.5 * h2 * f[i];
    }
    for n in 1..n_t - 1 {
        let (done, rest) = u.split_at_mut((n + 1) * n_s);
        let next = &mut rest[..n_s];
        let cur = &done[n * n_s..(n + 1) * n_s];
        let prev = &done[(n - 1) * n_s..n * n_s];
        let fr = &f[n * n_s..(n + 1) * n_s];
        for i in 1..n_s - 1 {
            next[i] = cur[i + 1] + cur[i - 1] - prev[i] - h2 * fr[i];
        }
    }
    u
}

/// `I^k` on the lattice `t_n, s_i` for `n < n_t`, `i < n_s`, both starting at
/// the grid start.  Values with `i + n >= n_s - 1` are outside the domain of
/// dependence of the real problem and are refused by [`InnerProductGrid::at`].
#[derive(Clone, Debug)]
pub struct InnerProductGrid {
    pub degree: usize,
    pub u_label: String,
    pub w_label: String,
    pub start: f64,
    pub step: f64,
    pub n_t: usize,
    pub n_s: usize,
    pub values: Vec<f64>,
}

impl InnerProductGrid {
    /// Grid covering `s, t` in `[-tau, t_max]`.
    pub fn compute(data: &BoundaryData, a: usize, b: usize, k: usize, t_max: f64) -> Result<Self, RecoveryError> {
        let grid = data.dataset().grid();
        let n_t = ((t_max - grid.start) / grid.step).round() as usize + 1;
        let n_s = 2 * n_t;
        if n_s > grid.len {
            return Err(RecoveryError::Domain(format!(
                "a grid up to t = {t_max} needs records up to t = {}, the dataset ends at {}",
                grid.time(n_s - 1),
                grid.end()
            )));
        }
        let f = assemble_rhs(data, a, b, k, n_t, n_s)?;
        let values = wave_solve(&f, n_t, n_s, grid.step);
        let ds = data.dataset();
        Ok(InnerProductGrid {
            degree: k,
            u_label: ds.entries[a].label.clone(),
            w_label: ds.entries[b].label.clone(),
            start: grid.start,
            step: grid.step,
            n_t,
            n_s,
            values,
        })
    }

    /// `I(s_i, t_n)`.
    pub fn value(&self, i: usize, n: usize) -> Result<f64, RecoveryError> {
        if n >= self.n_t || i + n >= self.n_s - 1 {
            return Err(RecoveryError::Domain(format!("lattice point (s index {i}, t index {n}) is outside the solved region")));
        }
        Ok(self.values[n * self.n_s + i])
    }

    /// `I(s, t)` at lattice times.
    pub fn at(&self, s: f64, t: f64) -> Result<f64, RecoveryError> {
        let idx = |x: f64| {
            let r = (x - self.start) / self.step;
            let n = r.round();
            if (r - n).abs() > 1e-9 || n < 0.0 {
                Err(RecoveryError::Domain(format!("time {x} is not a lattice point")))
            } else {
                Ok(n as usize)
            }
        };
        self.value(idx(s)?, idx(t)?)
    }

    /// `s,t,value` rows over the square `[-tau, t_max]^2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,t,value\n");
        for n in 0..self.n_t {
            for i in 0..self.n_t {
                let _ = writeln!(out, "{},{},{:e}", self.start + i as f64 * self.step, self.start + n as f64 * self.step, self.values[n * self.n_s + i]);
            }
        }
        out
    }
}

/// Grids keyed by `(u entry, w entry, degree)`, computed on first use.
#[derive(Default)]
pub struct GridCache {
    grids: Mutex<HashMap<(usize, usize, usize), Arc<InnerProductGrid>>>,
}

impl GridCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, data: &BoundaryData, a: usize, b: usize, k: usize, t_max: f64) -> Result<Arc<InnerProductGrid>, RecoveryError> {
        if let Some(g) = self.grids.lock().expect("cache lock").get(&(a, b, k)) {
            if g.start + (g.n_t - 1) as f64 * g.step >= t_max - 1e-9 * g.step {
                return Ok(g.clone());
            }
        }
        let g = Arc::new(InnerProductGrid::compute(data, a, b, k, t_max)?);
        self.grids.lock().expect("cache lock").insert((a, b, k), g.clone());
        Ok(g)
    }

    /// `I^k(s, t)` for entries `a`, `b`, from boundary data only.
    pub fn boundary_inner_product(&self, data: &BoundaryData, a: usize, b: usize, k: usize, s: f64, t: f64) -> Result<f64, RecoveryError> {
        self.get(data, a, b, k, s.max(t))?.at(s, t)
    }
}

/// Shape of the time average of `I(0, t)` over `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    /// Plain trapezoid mean.
    Cesaro,
    /// Weight `sin^4(pi t / T)`, normalised.  Its transform decays like
    /// `(gap T)^-5`, against `(gap T)^-1` for the plain mean.
    Hann2,
}

/// The functional `sum_n c_n I(s = 0, t_n)`, with `c` supported on
/// `origin..=horizon`, written as `sum_{i,n} W(i, n) F(i, n)` over the forcing.
///
/// At unit Courant number the leapfrog propagator is a checkerboard
/// indicator of the backward light cone, odd-reflected at the Dirichlet
/// line, so `W` has a closed form in suffix sums of `c`.
#[derive(Clone, Debug)]
pub struct AveragedFunctional {
    origin: usize,
    horizon: usize,
    h2: f64,
    /// `suffix[a] = c[a] + c[a + 2] + ...`
    suffix: Vec<f64>,
}

impl AveragedFunctional {
    /// `coeffs` lists `(n, c_n)` with `origin <= n`.
    pub fn new(origin: usize, coeffs: &[(usize, f64)], dt: f64) -> Self {
        let horizon = coeffs.iter().map(|&(n, _)| n).max().unwrap_or(origin).max(origin);
        let mut suffix = vec![0.0; horizon + 3];
        for &(n, v) in coeffs {
            assert!(n >= origin, "averaging starts at t = 0");
            suffix[n] += v;
        }
        for a in (0..=horizon).rev() {
            suffix[a] += suffix[a + 2];
        }
        AveragedFunctional { origin, horizon, h2: dt * dt, suffix }
    }

    /// Window average of `I(0, t)` over `t` in `[0, steps * dt]`.
    pub fn windowed(origin: usize, steps: usize, dt: f64, window: Window) -> Self {
        if steps == 0 {
            return Self::point(origin, dt);
        }
        let w: Vec<f64> = (0..=steps)
            .map(|j| match window {
                Window::Cesaro => {
                    if j == 0 || j == steps {
                        0.5
                    } else {
                        1.0
                    }
                }
                Window::Hann2 => (std::f64::consts::PI * j as f64 / steps as f64).sin().powi(4),
            })
            .collect();
        let total: f64 = w.iter().sum();
        let coeffs: Vec<(usize, f64)> = w.iter().enumerate().map(|(j, &x)| (origin + j, x / total)).collect();
        Self::new(origin, &coeffs, dt)
    }

    /// `I(0, 0)`.
    pub fn point(origin: usize, dt: f64) -> Self {
        Self::new(origin, &[(origin, 1.0)], dt)
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Largest grid index of the records the functional reads.
    pub fn record_extent(&self) -> usize {
        self.origin + self.horizon
    }

    fn tail(&self, a: usize) -> f64 {
        self.suffix.get(a).copied().unwrap_or(0.0)
    }

    /// Weight of `F` at `s_i, t_n`.
    pub fn weight(&self, i: usize, n: usize) -> f64 {
        if i == 0 {
            return 0.0;
        }
        let lambda = self.tail(n + 1 + i.abs_diff(self.origin)) - self.tail(n + 1 + i + self.origin);
        let scale = if n == 0 { -0.5 * self.h2 } else { -self.h2 };
        scale * lambda
    }
}

/// Each source profile folded against the weights.  `rows[p][i]` is
/// `sum_n p(t_n) W(i, n)`, `cols[p][n]` is `sum_i p(s_i) W(i, n)`.
pub struct ProfileWeights {
    functional: AveragedFunctional,
    rows: Vec<Vec<f64>>,
    cols: Vec<Vec<f64>>,
}

impl ProfileWeights {
    pub fn new(data: &BoundaryData, functional: AveragedFunctional) -> Result<Self, RecoveryError> {
        if functional.origin != data.origin() {
            return Err(RecoveryError::Mismatch("functional and dataset disagree on t = 0".into()));
        }
        let extent = functional.record_extent();
        if extent >= data.grid_len() {
            return Err(RecoveryError::Domain(format!(
                "averaging up to t = {} needs records up to t = {}, the dataset ends at {}",
                data.dataset().grid().time(functional.horizon),
                data.dataset().grid().time(extent),
                data.dataset().grid().end()
            )));
        }
        let fold = |p: &Vec<f64>, len: usize, w: &dyn Fn(usize, usize) -> f64| -> Vec<f64> {
            (0..=len).map(|x| p.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(y, &v)| v * w(x, y)).sum()).collect()
        };
        let f = &functional;
        let rows = data.profiles.iter().map(|p| fold(p, extent, &|i, n| f.weight(i, n))).collect();
        let cols = data.profiles.iter().map(|p| fold(p, f.horizon, &|n, i| f.weight(i, n))).collect();
        Ok(ProfileWeights { functional, rows, cols })
    }

    pub fn functional(&self) -> &AveragedFunctional {
        &self.functional
    }
}

/// Record-side series of one entry folded against every profile weight:
/// `parts[q][p]` belongs to forcing term `q` and profile `p`.
#[derive(Clone, Debug)]
pub struct Contraction {
    parts: Vec<Vec<Vec<f64>>>,
}

pub fn contract(data: &BoundaryData, w: &ProfileWeights, e: usize, terms: &[Term]) -> Contraction {
    let parts = terms
        .iter()
        .map(|t| {
            let (series, weights, len) = if t.u.is_source() {
                (t.v, &w.rows, w.functional.record_extent())
            } else {
                (t.u, &w.cols, w.functional.horizon)
            };
            let m = data.dim(series);
            let mut acc = vec![vec![0.0; m]; weights.len()];
            let mut buf = vec![0.0; m];
            for x in 0..=len {
                if weights.iter().all(|wp| wp[x] == 0.0) {
                    continue;
                }
                data.row(e, series, x, &mut buf);
                for (a, wp) in acc.iter_mut().zip(weights) {
                    let c = wp[x];
                    if c != 0.0 {
                        for (o, v) in a.iter_mut().zip(&buf) {
                            *o += c * v;
                        }
                    }
                }
            }
            acc
        })
        .collect();
    Contraction { parts }
}

/// The functional for `u = a`, `w = b`, from their contractions.
pub fn pair_functional(data: &BoundaryData, terms: &[Term], a: usize, ca: &Contraction, b: usize, cb: &Contraction) -> f64 {
    let mut total = 0.0;
    for (q, t) in terms.iter().enumerate() {
        let (entry, series, folded) = if t.u.is_source() { (a, t.u, &cb.parts[q]) } else { (b, t.v, &ca.parts[q]) };
        let s: f64 = data.pieces(entry, series).iter().map(|(p, x)| x.iter().zip(&folded[*p]).map(|(u, v)| u * v).sum::<f64>()).sum();
        total += t.sign * s;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_table_shapes() {
        assert_eq!(forcing_terms(0, [true; 3]).len(), 4);
        assert_eq!(forcing_terms(1, [true; 3]).len(), 6);
        assert_eq!(forcing_terms(2, [true; 3]).len(), 4);
        assert_eq!(forcing_terms(3, [true; 3]).len(), 2);
        // physical layout keeps only the degree-2 trace
        let p1 = forcing_terms(1, [false, true, false]);
        assert_eq!(p1.len(), 2);
        assert!(p1.iter().all(|t| t.u == Series::RecRate(1) || t.v == Series::RecRate(1)));
        assert_eq!(forcing_terms(2, [false, true, false]).len(), 2);
        for k in 0..4 {
            for t in forcing_terms(k, [true; 3]) {
                assert!(t.u.is_source() != t.v.is_source());
            }
        }
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let u = wave_solve(&vec![0.0; 20 * 40], 20, 40, 0.1);
        assert!(u.iter().all(|&x| x == 0.0));
    }

    /// `I = sin(s + tau) (1 - cos(2 (t + tau)))` has zero Cauchy data at
    /// `t = -tau` and vanishes at `s = -tau`.
    fn manufactured(steps: usize) -> f64 {
        let tau = 0.5;
        let dt = tau / steps as f64;
        let n_t = 2 * steps + 1;
        let n_s = 3 * n_t;
        let exact = |s: f64, t: f64| (s + tau).sin() * (1.0 - (2.0 * (t + tau)).cos());
        let forcing = |s: f64, t: f64| {
            let a = (s + tau).sin();
            -a * (1.0 - (2.0 * (t + tau)).cos()) - a * 4.0 * (2.0 * (t + tau)).cos()
        };
        let mut f = vec![0.0; n_t * n_s];
        for n in 0..n_t {
            for i in 0..n_s {
                f[n * n_s + i] = forcing(-tau + i as f64 * dt, -tau + n as f64 * dt);
            }
        }
        let u = wave_solve(&f, n_t, n_s, dt);
        let mut err: f64 = 0.0;
        for n in 0..n_t {
            for i in 0..n_t {
                err = err.max((u[n * n_s + i] - exact(-tau + i as f64 * dt, -tau + n as f64 * dt)).abs());
            }
        }
        err
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        let e1 = manufactured(32);
        let e2 = manufactured(64);
        let e3 = manufactured(128);
        let o1 = (e1 / e2).log2();
        let o2 = (e2 / e3).log2();
        assert!(e3 < 1e-4, "{e3:e}");
        assert!((o1 - 2.0).abs() <= 0.2 && (o2 - 2.0).abs() <= 0.2, "orders {o1} {o2}");
    }

    #[test]
    fn closed_form_weights_match_brute_force() {
        let (n_t, origin, dt) = (30, 6, 0.05);
        let n_s = 2 * n_t + 4;
        let f: Vec<f64> = (0..n_t * n_s).map(|x| ((x * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let u = wave_solve(&f, n_t, n_s, dt);
        let coeffs: Vec<(usize, f64)> = (origin..n_t - 1).map(|n| (n, 1.0 + 0.1 * n as f64)).collect();
        let direct: f64 = coeffs.iter().map(|&(n, c)| c * u[n * n_s + origin]).sum();
        let w = AveragedFunctional::new(origin, &coeffs, dt);
        let mut via = 0.0;
        for n in 0..n_t {
            for i in 0..n_s {
                let mut e = vec![0.0; n_t * n_s];
                e[n * n_s + i] = 1.0;
                let ue = wave_solve(&e, n_t, n_s, dt);
                let wt: f64 = coeffs.iter().map(|&(m, c)| c * ue[m * n_s + origin]).sum();
                assert!((wt - w.weight(i, n)).abs() < 1e-14, "weight at ({i},{n})");
                via += w.weight(i, n) * f[n * n_s + i];
            }
        }
        assert!((via - direct).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn windows_have_unit_mass() {
        for win in [Window::Cesaro, Window::Hann2] {
            let w = AveragedFunctional::windowed(4, 40, 0.1, win);
            // a constant I(0, t) = 1 must average to 1
            let total: f64 = (0..=w.horizon()).map(|n| w.tail(n) - w.tail(n + 2)).sum();
            assert!((total - 1.0).abs() < 1e-13);
        }
    }
}
