//! Time-averaged projection onto Dirichlet harmonic fields, rank counting
//! and Betti numbers, all computed from a response dataset.

use std::fmt::Write as _;

use dirac_boundary::{ResponseDataset, SurfaceCounts, SystemKind};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::blagov::{contract, pair_functional, AveragedFunctional, BoundaryData, Contraction, GridCache, ProfileWeights, Term, Window};
use crate::RecoveryError;

/// Required ratio between the last kept and the first discarded eigenvalue.
pub const RANK_GAP: f64 = 10.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryConfig {
    /// Initial number of sources; doubled until the counts settle.
    pub n_sources: usize,
    pub max_sources: usize,
    /// Averaging horizons, increasing.  Two consecutive ones must agree.
    pub horizons: Vec<f64>,
    /// Rank threshold relative to the unprojected norms.
    pub tau_rel: f64,
    /// Sources whose degree-`k` norm is below this fraction of the largest
    /// total energy are measured against that floor instead.
    pub floor_rel: f64,
    /// Enforce `b0 = 1`, `b3 = 0`.
    pub connected: bool,
    pub window: Window,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig { n_sources: 4, max_sources: 32, horizons: vec![128.0, 256.0, 512.0, 1024.0, 2048.0], tau_rel: 1e-4, floor_rel: 1e-6, connected: true, window: Window::Hann2 }
    }
}

impl RecoveryConfig {
    pub fn validate(&self) -> Result<(), RecoveryError> {
        if self.n_sources == 0 || self.max_sources < self.n_sources {
            return Err(RecoveryError::Domain("source counts must satisfy 1 <= n_sources <= max_sources".into()));
        }
        if self.horizons.is_empty() || self.horizons.iter().any(|&t| !(t > 0.0)) || self.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RecoveryError::Domain("horizons must be positive and increasing".into()));
        }
        if !(self.tau_rel > 0.0 && self.tau_rel < 1.0) || !(self.floor_rel >= 0.0 && self.floor_rel < 1.0) {
            return Err(RecoveryError::Domain("thresholds must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// `p[i][j]` approximates the pairing of the projected degree-`k` state of
/// source `i` with the unprojected state of source `j`, both at `t = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectedGram {
    pub degree: usize,
    pub sources: Vec<String>,
    pub horizon: f64,
    pub quadrature: String,
    pub p: Vec<Vec<f64>>,
    /// `max |P - P^T| / max |P|` before symmetrising.
    pub asymmetry: f64,
    /// Unprojected squared norms at `t = 0`.
    pub norms: Vec<f64>,
}

impl ProjectedGram {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let m = self.len();
        DMatrix::from_fn(m, m, |i, j| self.p[i][j])
    }

    fn from_raw(degree: usize, sources: Vec<String>, horizon: f64, raw: DMatrix<f64>, norms: Vec<f64>) -> Self {
        let m = raw.nrows();
        let big = raw.amax();
        let skew = (&raw - raw.transpose()).amax();
        let sym = (&raw + raw.transpose()) * 0.5;
        ProjectedGram {
            degree,
            sources,
            horizon,
            quadrature: "trapezoid".into(),
            p: (0..m).map(|i| (0..m).map(|j| sym[(i, j)]).collect()).collect(),
            asymmetry: if big > 0.0 { skew / big } else { 0.0 },
            norms,
        }
    }
}

fn horizon_steps(data: &BoundaryData, t: f64) -> Result<usize, RecoveryError> {
    let r = t / data.dt();
    let n = r.round();
    if !(t >= 0.0) || (r - n).abs() > 1e-6 {
        return Err(RecoveryError::Domain(format!("horizon {t} is not a multiple of the time step {}", data.dt())));
    }
    Ok(n as usize)
}

/// Trapezoid average of `I^k(0, t)` over `[0, T]` read off the wave grid.
pub fn projected_inner(data: &BoundaryData, cache: &GridCache, a: usize, b: usize, k: usize, horizon: f64) -> Result<f64, RecoveryError> {
    let steps = horizon_steps(data, horizon)?;
    let grid = cache.get(data, a, b, k, horizon)?;
    let i0 = data.origin();
    if steps == 0 {
        return grid.value(i0, i0);
    }
    let mut acc = 0.0;
    for j in 0..=steps {
        let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
        acc += w * grid.value(i0, i0 + j)?;
    }
    Ok(acc / steps as f64)
}

/// Per-degree contractions of a set of entries against one functional.
struct Contracted {
    terms: Vec<Term>,
    parts: Vec<Contraction>,
}

fn contract_all(data: &BoundaryData, w: &ProfileWeights, k: usize, entries: &[usize]) -> Result<Contracted, RecoveryError> {
    let terms = data.terms(k)?;
    let parts = entries.par_iter().map(|&e| contract(data, w, e, &terms)).collect();
    Ok(Contracted { terms, parts })
}

fn functional_matrix(data: &BoundaryData, w: &ProfileWeights, k: usize, entries: &[usize]) -> Result<DMatrix<f64>, RecoveryError> {
    let c = contract_all(data, w, k, entries)?;
    let m = entries.len();
    Ok(DMatrix::from_fn(m, m, |i, j| pair_functional(data, &c.terms, entries[i], &c.parts[i], entries[j], &c.parts[j])))
}

/// Unprojected squared norms `|state_k(0)|^2` of the given entries.
pub fn state_norms(data: &BoundaryData, k: usize, entries: &[usize]) -> Result<Vec<f64>, RecoveryError> {
    let w = ProfileWeights::new(data, AveragedFunctional::point(data.origin(), data.dt()))?;
    let c = contract_all(data, &w, k, entries)?;
    Ok(entries.iter().enumerate().map(|(q, &e)| pair_functional(data, &c.terms, e, &c.parts[q], e, &c.parts[q])).collect())
}

/// All window-averaged pairings of the given entries at once.
pub fn gram_matrix(data: &BoundaryData, entries: &[usize], k: usize, horizon: f64, window: Window) -> Result<ProjectedGram, RecoveryError> {
    if entries.is_empty() {
        return Err(RecoveryError::Domain("a Gram matrix needs at least one source".into()));
    }
    let steps = horizon_steps(data, horizon)?;
    let w = ProfileWeights::new(data, AveragedFunctional::windowed(data.origin(), steps, data.dt(), window))?;
    let raw = functional_matrix(data, &w, k, entries)?;
    let norms = state_norms(data, k, entries)?;
    let labels = entries.iter().map(|&e| data.dataset().entries[e].label.clone()).collect();
    let mut g = ProjectedGram::from_raw(k, labels, horizon, raw, norms);
    g.quadrature = match window {
        Window::Cesaro => "trapezoid",
        Window::Hann2 => "hann-squared",
    }
    .into();
    Ok(g)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimensionCount {
    pub degree: usize,
    pub count: usize,
    pub gram_schmidt: usize,
    pub eigen: usize,
    /// Eigenvalues divided by `scale`, descending.
    pub ladder: Vec<f64>,
    pub scale: f64,
    pub threshold: f64,
    /// Last kept over first discarded eigenvalue; infinite if nothing is discarded.
    pub gap: f64,
    pub asymmetry: f64,
}

/// Rank of the projected Gram matrix by sequential Gram–Schmidt and by
/// eigenvalue counting; the two must agree and the spectrum must show a gap.
/// `floor` is an absolute lower bound on the norm a source is measured against.
pub fn count_dimension(gram: &ProjectedGram, tau_rel: f64, floor: f64) -> Result<DimensionCount, RecoveryError> {
    let m = gram.len();
    let p = gram.matrix();
    let norms: Vec<f64> = gram.norms.iter().map(|&n| n.max(floor)).collect();
    let scale = norms.iter().copied().fold(floor, f64::max);
    let k = gram.degree;
    if scale <= 0.0 || m == 0 {
        return Ok(DimensionCount { degree: k, count: 0, gram_schmidt: 0, eigen: 0, ladder: vec![0.0; m], scale, threshold: tau_rel, gap: f64::INFINITY, asymmetry: gram.asymmetry });
    }

    // sequential orthogonalisation in the P inner product
    let mut kept: Vec<usize> = Vec::new();
    let mut chol = DMatrix::<f64>::zeros(0, 0);
    for j in 0..m {
        let col: Vec<f64> = kept.iter().map(|&a| p[(a, j)]).collect();
        let mut y = nalgebra::DVector::from_vec(col);
        if !kept.is_empty() {
            chol.solve_lower_triangular_mut(&mut y);
        }
        let residual = p[(j, j)] - y.norm_squared();
        if residual < tau_rel * norms[j] {
            continue;
        }
        let n = kept.len();
        let mut next = DMatrix::zeros(n + 1, n + 1);
        next.view_mut((0, 0), (n, n)).copy_from(&chol);
        for c in 0..n {
            next[(n, c)] = y[c];
        }
        next[(n, n)] = residual.sqrt();
        chol = next;
        kept.push(j);
    }

    let mut ladder: Vec<f64> = SymmetricEigen::new(p / scale).eigenvalues.iter().copied().collect();
    ladder.sort_by(|a, b| b.total_cmp(a));
    let eigen = ladder.iter().filter(|&&l| l > tau_rel).count();
    let gap = if eigen == 0 || eigen == m {
        f64::INFINITY
    } else if ladder[eigen] <= 0.0 {
        f64::INFINITY
    } else {
        ladder[eigen - 1] / ladder[eigen]
    };
    let ambiguous = |reason: String| RecoveryError::AmbiguousRank { degree: k, reason, ladder: ladder.clone() };
    if kept.len() != eigen {
        return Err(ambiguous(format!("Gram–Schmidt keeps {} sources, eigenvalue counting gives {eigen}", kept.len())));
    }
    if gap < RANK_GAP {
        return Err(ambiguous(format!("gap {gap:.2} between kept and discarded eigenvalues is below {RANK_GAP}")));
    }
    Ok(DimensionCount { degree: k, count: eigen, gram_schmidt: kept.len(), eigen, ladder, scale, threshold: tau_rel, gap, asymmetry: gram.asymmetry })
}

/// Supplies datasets with a growing number of entries.  Each call must
/// return a dataset whose first entries are those returned before, up to the
/// next `extend_to`.
pub trait ResponseSource {
    fn dataset(&mut self, n_sources: usize) -> Result<&ResponseDataset, RecoveryError>;

    /// Makes the records long enough for averages up to `horizon`, if the
    /// source can.  A fixed dataset cannot; a too-short one then surfaces
    /// as a domain error from the averaging.
    fn extend_to(&mut self, _horizon: f64) -> Result<(), RecoveryError> {
        Ok(())
    }
}

/// A fixed dataset: requests beyond its size get the whole dataset.
impl ResponseSource for ResponseDataset {
    fn dataset(&mut self, _n_sources: usize) -> Result<&ResponseDataset, RecoveryError> {
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    CompleteDirac,
    PhysicalMaxwell,
    Corollary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BettiReport {
    pub method: Method,
    /// `dim H_D^k` for the degrees the data determine.
    pub harmonic_dims: [Option<usize>; 4],
    /// Relative Betti numbers `b_k(M, dM) = dim H_D^k`.
    pub relative: [Option<usize>; 4],
    /// Absolute Betti numbers, `b_k(M) = b_{3-k}(M, dM)`.
    pub absolute: [Option<usize>; 4],
    pub euler: Option<i64>,
    pub boundary_euler: i64,
    pub horizon: f64,
    pub n_sources: usize,
    pub tau_rel: f64,
    pub counts: Vec<DimensionCount>,
    /// Counts per horizon in the sweep, for diagnostics.
    pub sweep: Vec<(f64, [Option<usize>; 4])>,
}

impl BettiReport {
    pub fn betti(&self) -> [Option<usize>; 4] {
        self.absolute
    }

    /// Ladders as `degree,index,value` CSV rows.
    pub fn ladder_csv(&self) -> String {
        let mut s = String::from("degree,index,eigenvalue\n");
        for c in &self.counts {
            for (i, l) in c.ladder.iter().enumerate() {
                let _ = writeln!(s, "{},{},{:e}", c.degree, i, l);
            }
        }
        s
    }

    pub fn sweep_csv(&self) -> String {
        let mut s = String::from("horizon,k0,k1,k2,k3\n");
        let f = |x: Option<usize>| x.map_or(String::new(), |v| v.to_string());
        for (t, c) in &self.sweep {
            let _ = writeln!(s, "{t},{},{},{},{}", f(c[0]), f(c[1]), f(c[2]), f(c[3]));
        }
        s
    }
}

/// Counts for `degrees` at one horizon, doubling the source count until two
/// successive rounds agree and stay below the number of sources used.
fn settled_counts(
    provider: &mut dyn ResponseSource,
    cfg: &RecoveryConfig,
    degrees: &[usize],
    horizon: f64,
) -> Result<(usize, Vec<DimensionCount>), RecoveryError> {
    let mut m = cfg.n_sources;
    let mut prev: Option<Vec<usize>> = None;
    let mut last_err = None;
    loop {
        let ds = provider.dataset(m)?;
        let avail = ds.len().min(m);
        let data = BoundaryData::new(ds)?;
        let entries: Vec<usize> = (0..avail).collect();
        let round = (|| {
            let mut norms = vec![0.0; avail];
            let mut grams = Vec::new();
            for &k in degrees {
                let g = gram_matrix(&data, &entries, k, horizon, cfg.window)?;
                for (t, n) in norms.iter_mut().zip(&g.norms) {
                    *t += n;
                }
                grams.push(g);
            }
            let floor = cfg.floor_rel * norms.iter().copied().fold(0.0, f64::max);
            grams.iter().map(|g| count_dimension(g, cfg.tau_rel, floor)).collect::<Result<Vec<_>, _>>()
        })();
        match round {
            Ok(counts) => {
                let c: Vec<usize> = counts.iter().map(|d| d.count).collect();
                let saturated = c.iter().any(|&x| x >= avail);
                if !saturated && prev.as_ref() == Some(&c) {
                    return Ok((avail, counts));
                }
                prev = if saturated { None } else { Some(c) };
            }
            Err(e @ RecoveryError::AmbiguousRank { .. }) => {
                prev = None;
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
        if avail < m || 2 * m > cfg.max_sources {
            return Err(last_err.unwrap_or_else(|| {
                RecoveryError::NoStabilization(format!("counts did not settle with up to {avail} sources at horizon {horizon}"))
            }));
        }
        m *= 2;
    }
}

/// Nearest positive multiple of `dt`.
pub fn snap_horizon(t: f64, dt: f64) -> f64 {
    (t / dt).round().max(1.0) * dt
}

/// Sweeps the horizons (snapped to the time step) until two consecutive ones give the same counts.
fn swept_counts(
    provider: &mut dyn ResponseSource,
    cfg: &RecoveryConfig,
    degrees: &[usize],
) -> Result<(f64, usize, Vec<DimensionCount>, Vec<(f64, [Option<usize>; 4])>), RecoveryError> {
    cfg.validate()?;
    let mut sweep = Vec::new();
    let mut prev: Option<Vec<usize>> = None;
    let mut last_err = None;
    let dt = provider.dataset(cfg.n_sources)?.grid().step;
    let mut horizons: Vec<f64> = cfg.horizons.iter().map(|&t| snap_horizon(t, dt)).collect();
    horizons.dedup();
    for t in horizons {
        provider.extend_to(t)?;
        match settled_counts(provider, cfg, degrees, t) {
            Ok((m, counts)) => {
                let c: Vec<usize> = counts.iter().map(|d| d.count).collect();
                let mut row = [None; 4];
                for (d, &k) in degrees.iter().enumerate() {
                    row[k] = Some(c[d]);
                }
                sweep.push((t, row));
                if prev.as_ref() == Some(&c) {
                    return Ok((t, m, counts, sweep));
                }
                prev = Some(c);
            }
            Err(e @ (RecoveryError::AmbiguousRank { .. } | RecoveryError::NoStabilization(_))) => {
                sweep.push((t, [None; 4]));
                prev = None;
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| RecoveryError::NoStabilization(format!("counts changed between every pair of horizons: {sweep:?}"))))
}

fn require_kind(ds: &ResponseDataset, kind: SystemKind) -> Result<(), RecoveryError> {
    if ds.header.kind != kind {
        return Err(RecoveryError::Mismatch(format!("expected a {kind:?} dataset, got {:?}", ds.header.kind)));
    }
    Ok(())
}

/// All Betti numbers from complete-system data.
pub fn betti_from_dirac(provider: &mut dyn ResponseSource, cfg: &RecoveryConfig) -> Result<BettiReport, RecoveryError> {
    let ds = provider.dataset(cfg.n_sources)?;
    require_kind(ds, SystemKind::Complete)?;
    let boundary_euler = ds.patch.surface.euler();
    let (horizon, n_sources, counts, sweep) = swept_counts(provider, cfg, &[0, 1, 2, 3])?;
    let dims: [usize; 4] = std::array::from_fn(|k| counts[k].count);
    let absolute: [usize; 4] = std::array::from_fn(|k| dims[3 - k]);
    if cfg.connected && (absolute[0] != 1 || absolute[3] != 0) {
        return Err(RecoveryError::Inconsistent(format!("connected manifold with boundary but recovered b0 = {}, b3 = {}", absolute[0], absolute[3])));
    }
    let euler = absolute[0] as i64 - absolute[1] as i64 + absolute[2] as i64 - absolute[3] as i64;
    Ok(BettiReport {
        method: Method::CompleteDirac,
        harmonic_dims: dims.map(Some),
        relative: dims.map(Some),
        absolute: absolute.map(Some),
        euler: Some(euler),
        boundary_euler,
        horizon,
        n_sources,
        tau_rel: cfg.tau_rel,
        counts,
        sweep,
    })
}

fn physical_counts(provider: &mut dyn ResponseSource, cfg: &RecoveryConfig) -> Result<(f64, usize, DimensionCount, Vec<(f64, [Option<usize>; 4])>, i64), RecoveryError> {
    let ds = provider.dataset(cfg.n_sources)?;
    require_kind(ds, SystemKind::Physical)?;
    let boundary_euler = ds.patch.surface.euler();
    let (horizon, n, mut counts, sweep) = swept_counts(provider, cfg, &[2])?;
    Ok((horizon, n, counts.remove(0), sweep, boundary_euler))
}

/// Report carrying only `b1(M) = dim H_D^2`, from physical-system data.
pub fn betti1_report(provider: &mut dyn ResponseSource, cfg: &RecoveryConfig) -> Result<BettiReport, RecoveryError> {
    let (horizon, n_sources, count, sweep, boundary_euler) = physical_counts(provider, cfg)?;
    let b1 = count.count;
    Ok(BettiReport {
        method: Method::PhysicalMaxwell,
        harmonic_dims: [None, None, Some(b1), None],
        relative: [None, None, Some(b1), None],
        absolute: [None, Some(b1), None, None],
        euler: None,
        boundary_euler,
        horizon,
        n_sources,
        tau_rel: cfg.tau_rel,
        counts: vec![count],
        sweep,
    })
}

/// `b1(M) = dim H_D^2` from physical-system data.
pub fn beta1_physical(provider: &mut dyn ResponseSource, cfg: &RecoveryConfig) -> Result<usize, RecoveryError> {
    Ok(physical_counts(provider, cfg)?.2.count)
}

/// `b2 = chi(dM)/2 - b0 + b1 + b3` with `b0 = 1`, `b3 = 0`.
pub fn beta2_from_boundary(beta1: usize, surface: &SurfaceCounts) -> Result<usize, RecoveryError> {
    let chi = surface.euler();
    if chi % 2 != 0 {
        return Err(RecoveryError::Inconsistent(format!("boundary Euler characteristic {chi} is odd")));
    }
    let b2 = chi / 2 - 1 + beta1 as i64;
    if b2 < 0 {
        return Err(RecoveryError::Inconsistent(format!("b1 = {beta1} and boundary Euler characteristic {chi} give b2 = {b2}")));
    }
    Ok(b2 as usize)
}

/// First and second Betti numbers from physical-system data and the
/// boundary surface.
pub fn betti_physical(provider: &mut dyn ResponseSource, cfg: &RecoveryConfig) -> Result<BettiReport, RecoveryError> {
    let (horizon, n_sources, count, sweep, boundary_euler) = physical_counts(provider, cfg)?;
    let ds = provider.dataset(n_sources)?;
    let b1 = count.count;
    let b2 = beta2_from_boundary(b1, &ds.patch.surface)?;
    let absolute = [Some(1), Some(b1), Some(b2), Some(0)];
    Ok(BettiReport {
        method: Method::Corollary,
        harmonic_dims: [None, None, Some(b1), None],
        relative: [Some(0), Some(b2), Some(b1), Some(1)],
        absolute,
        euler: Some(1 - b1 as i64 + b2 as i64),
        boundary_euler,
        horizon,
        n_sources,
        tau_rel: cfg.tau_rel,
        counts: vec![count],
        sweep,
    })
}
