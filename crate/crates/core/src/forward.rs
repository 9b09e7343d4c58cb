//! Boundary-driven evolution: sources, the Cayley stepper, trajectories,
//! normal-trace records and response datasets.

use dirac_boundary::{
    BoundaryPatch, BoundaryRecord, BoundarySource, Bump, DatasetHeader, ResponseDataset, ResponseEntry, SystemKind, TimeGrid,
    TimeProfile,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dirac::DiracSystem;
use crate::forms::CochainState;
use crate::sparse::{self, Csr, Ldl};
use crate::CoreError;

/// Minimum number of grid points strictly inside the bump support.
pub const MIN_BUMP_SAMPLES: usize = 16;

pub const INTEGRATOR: &str = "cayley-midpoint";

/// Grid on `[-tau, t_end]` whose step divides `tau` exactly.
pub fn source_grid(tau: f64, steps_per_tau: usize, t_end: f64) -> Result<TimeGrid, CoreError> {
    if !(tau > 0.0) || steps_per_tau == 0 || !(t_end >= 0.0) {
        return Err(CoreError::Source(format!("bad time parameters tau={tau}, steps={steps_per_tau}, end={t_end}")));
    }
    let dt = tau / steps_per_tau as f64;
    let n_pos = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    Ok(TimeGrid { start: -tau, step: dt, len: steps_per_tau + n_pos + 1 })
}

/// Step count per `tau` following the rule `dt = min(tau/64, 1/(8 r))` for
/// a spectral radius `r`, rounded so the step divides `tau`.
pub fn suggest_steps(tau: f64, radius: f64) -> usize {
    let dt = (tau / 64.0).min(if radius > 0.0 { 1.0 / (8.0 * radius) } else { f64::INFINITY });
    (tau / dt).ceil() as usize
}

/// The standard bump on `(-tau + tau/16, -tau/16)`.
pub fn standard_bump(tau: f64) -> Bump {
    let m = tau / 16.0;
    Bump { lo: -tau + m, hi: -m }
}

fn check_resolution(grid: &TimeGrid, bump: &Bump) -> Result<(), CoreError> {
    let inside = (0..grid.len).filter(|&n| {
        let t = grid.time(n);
        t > bump.lo && t < bump.hi
    });
    let count = inside.count();
    if count < MIN_BUMP_SAMPLES {
        return Err(CoreError::Source(format!(
            "time step {} resolves the source bump with {count} samples, need at least {MIN_BUMP_SAMPLES}",
            grid.step
        )));
    }
    if bump.lo <= grid.start || bump.hi >= 0.0 {
        return Err(CoreError::Source("bump support must lie inside (grid start, 0)".into()));
    }
    Ok(())
}

/// Uniform(-1, 1) values on every patch simplex, in degree then patch order,
/// zeroed off the admissible set.
fn random_profiles(patch: &BoundaryPatch, seed: u64) -> [Vec<f64>; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::array::from_fn(|k| {
        (0..patch.len(k))
            .map(|i| {
                let x: f64 = rng.gen_range(-1.0..1.0);
                if patch.admissible[k][i] {
                    x
                } else {
                    0.0
                }
            })
            .collect()
    })
}

/// Seeded random spatial profiles times the bump, one term per selected degree.
pub fn make_source(patch: &BoundaryPatch, seed: u64, degrees: [bool; 3], grid: TimeGrid, bump: Bump) -> Result<BoundarySource, CoreError> {
    check_resolution(&grid, &bump)?;
    if patch.patch_faces == 0 {
        return Err(CoreError::Source("empty patch".into()));
    }
    let spatial = random_profiles(patch, seed);
    let profile = TimeProfile::sample(&grid, |t| (bump.value(t), bump.rate(t)));
    let mut s = BoundarySource::zero(grid, patch.sizes());
    s.bump = Some(bump);
    for (k, g) in spatial.into_iter().enumerate() {
        if degrees[k] {
            s.push(k, g, profile.clone());
        }
    }
    Ok(s)
}

/// Projects a patch 1-cochain onto the kernel of the boundary derivative,
/// keeping it inside the admissible edges.
pub fn closed_part(patch: &BoundaryPatch, g: &[f64]) -> Vec<f64> {
    let cols: Vec<usize> = (0..patch.len(1)).filter(|&i| patch.admissible[1][i]).collect();
    let rows = patch.len(2);
    if cols.is_empty() || rows == 0 {
        return g.to_vec();
    }
    let mut d = DMatrix::<f64>::zeros(rows, cols.len());
    for (j, &c) in cols.iter().enumerate() {
        let mut e = vec![0.0; patch.len(1)];
        e[c] = 1.0;
        for (r, v) in patch.d(1, &e).into_iter().enumerate() {
            d[(r, j)] = v;
        }
    }
    let x = DVector::from_iterator(cols.len(), cols.iter().map(|&c| g[c]));
    let dx = &d * &x;
    let svd = d.clone().svd(true, true);
    let eps = 1e-10 * svd.singular_values.max().max(1.0);
    let mut h = &x - svd.solve(&dx, eps).expect("svd with both factors");
    let r = &d * &h;
    h -= svd.solve(&r, eps).expect("svd with both factors");
    let quiet = 1e-12 * x.amax();
    let mut out = vec![0.0; g.len()];
    for (j, &c) in cols.iter().enumerate() {
        if h[j].abs() > quiet {
            out[c] = h[j];
        }
    }
    out
}

/// Degree-1 control `bump(t) H` with `H` a seeded closed patch 1-cochain, so
/// that its magnetic companion vanishes and the source stays compact.
pub fn physical_control(patch: &BoundaryPatch, seed: u64, grid: TimeGrid, bump: Bump) -> Result<BoundarySource, CoreError> {
    check_resolution(&grid, &bump)?;
    let spatial = closed_part(patch, &random_profiles(patch, seed)[1]);
    if spatial.iter().all(|&x| x == 0.0) {
        return Err(CoreError::Source("patch carries no closed 1-cochains".into()));
    }
    let profile = TimeProfile::sample(&grid, |t| (bump.value(t), bump.rate(t)));
    let mut s = BoundarySource::zero(grid, patch.sizes());
    s.bump = Some(bump);
    s.push(1, spatial, profile);
    Ok(s)
}

/// Completes a degree-1 control `h` with the degree-2 term `-int d h`
/// (trapezoid running integral), whose rate is `-d h` exactly.  Spatial
/// parts that are closed up to roundoff contribute nothing.
pub fn physical_source(h: &BoundarySource, patch: &BoundaryPatch) -> Result<BoundarySource, CoreError> {
    if h.terms.iter().any(|t| t.degree != 1) {
        return Err(CoreError::Source("physical control must only carry degree-1 data".into()));
    }
    let mut out = h.clone();
    let dt = h.grid.step;
    for t in &h.terms {
        let scale = t.spatial.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut spatial: Vec<f64> = patch.d(1, &t.spatial).into_iter().map(|x| -x).collect();
        for x in spatial.iter_mut() {
            if x.abs() <= 1e-11 * scale {
                *x = 0.0;
            }
        }
        if spatial.iter().all(|&x| x == 0.0) {
            continue;
        }
        let p = &t.profile.values;
        let mut q = vec![0.0; p.len()];
        for n in 1..p.len() {
            q[n] = q[n - 1] + 0.5 * dt * (p[n - 1] + p[n]);
        }
        let floor = 8.0 * f64::EPSILON * dt * p.iter().map(|x| x.abs()).sum::<f64>();
        for (n, x) in q.iter_mut().enumerate() {
            let quiet = p[n] == 0.0 && (n == 0 || p[n - 1] == 0.0);
            if quiet && x.abs() <= floor {
                *x = 0.0;
            }
        }
        out.push(2, spatial, TimeProfile { values: q, rates: p.clone() });
    }
    Ok(out)
}

/// Flat boundary values and rates of the source at grid index `n`.
pub fn lift(sys: &DiracSystem, source: &BoundarySource, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut f = vec![0.0; sys.n_boundary()];
    let mut r = vec![0.0; sys.n_boundary()];
    for term in &source.terms {
        let (a, b) = (term.profile.values[n], term.profile.rates[n]);
        if a == 0.0 && b == 0.0 {
            continue;
        }
        for (&pos, &s) in sys.patch_to_boundary(term.degree).iter().zip(&term.spatial) {
            f[pos] += a * s;
            r[pos] += b * s;
        }
    }
    (f, r)
}

/// Zero-extension of the source at index `n` to a full graded state.
pub fn lift_state(sys: &DiracSystem, source: &BoundarySource, n: usize) -> CochainState {
    let (f, _) = lift(sys, source, n);
    sys.full_state(&vec![0.0; sys.n_interior()], &f)
}

/// Implicit-midpoint stepper on relative dofs for `G u' + K u = 0` with the
/// boundary part of `u` prescribed.  The Cayley matrix is factored once.
pub struct Stepper<'a> {
    sys: &'a DiracSystem,
    dt: f64,
    fac: Ldl,
    explicit: Csr,
    sign: Vec<f64>,
    work: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(sys: &'a DiracSystem, dt: f64) -> Result<Self, CoreError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CoreError::Source(format!("time step {dt} must be positive and finite")));
        }
        let off = sys.relative_offsets();
        let sign: Vec<f64> = (0..sys.n_interior()).map(|i| if (off[1]..off[2]).contains(&i) || (off[3]..off[4]).contains(&i) { -1.0 } else { 1.0 }).collect();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (i, j, &v) in sys.g_ii.triplet_iter() {
            a.push((i, j, sign[i] * v / dt));
            b.push((i, j, v / dt));
        }
        for (i, j, &v) in sys.k_ii.triplet_iter() {
            a.push((i, j, sign[i] * v / 2.0));
            b.push((i, j, -v / 2.0));
        }
        let n = sys.n_interior();
        let fac = Ldl::factor(&sparse::from_triplets(n, n, &a))?;
        Ok(Stepper { sys, dt, fac, explicit: sparse::from_triplets(n, n, &b), sign, work: Vec::with_capacity(n) })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `v_{n+1}` from `v_n` and the boundary values at both ends of the step.
    pub fn step(&mut self, v: &mut [f64], f_prev: &[f64], f_next: &[f64]) {
        let n = v.len();
        let mut rhs = vec![0.0; n];
        sparse::mul_into(&self.explicit, v, &mut rhs);
        let df: Vec<f64> = f_next.iter().zip(f_prev).map(|(a, b)| (a - b) / self.dt).collect();
        let mf: Vec<f64> = f_next.iter().zip(f_prev).map(|(a, b)| 0.5 * (a + b)).collect();
        sparse::mul_add(&self.sys.g_ib, -1.0, &df, &mut rhs);
        sparse::mul_add(&self.sys.k_ib, -1.0, &mf, &mut rhs);
        for (r, s) in rhs.iter_mut().zip(&self.sign) {
            *r *= s;
        }
        self.fac.solve_in_place(&mut rhs, &mut self.work);
        v.copy_from_slice(&rhs);
    }

    /// Source-free step.
    pub fn step_free(&mut self, v: &mut [f64]) {
        let zero = vec![0.0; self.sys.n_boundary()];
        self.step(v, &zero, &zero);
    }

    /// Interior velocity `G_II^{-1}(-K_II v - K_IB f - G_IB f')`.
    pub fn velocity(&self, v: &[f64], f: &[f64], fdot: &[f64]) -> Vec<f64> {
        let mut r = sparse::mul(&self.sys.k_ii, v);
        r.iter_mut().for_each(|x| *x = -*x);
        sparse::mul_add(&self.sys.k_ib, -1.0, f, &mut r);
        sparse::mul_add(&self.sys.g_ib, -1.0, fdot, &mut r);
        self.sys.g_ii_factor().solve(&r)
    }
}

/// Scatter interior and boundary parts into one flat full vector.
fn assemble_full(sys: &DiracSystem, v: &[f64], f: &[f64], out: &mut [f64]) {
    for (&i, &a) in sys.interior_flat().iter().zip(v) {
        out[i] = a;
    }
    for (&i, &a) in sys.boundary_flat().iter().zip(f) {
        out[i] = a;
    }
}

/// Normal traces on the patch: `-(G u' + K u)` on patch rows.
fn patch_flux(sys: &DiracSystem, u: &[f64], du: &[f64], present: [bool; 3], grid_n: usize, rec: &mut BoundaryRecord) {
    let mut r = sparse::mul(&sys.g_patch, du);
    sparse::mul_add(&sys.k_patch, 1.0, u, &mut r);
    let off = sys.patch_offsets();
    for j in 0..3 {
        if present[j] && off[j + 1] > off[j] {
            for (dst, src) in rec.at_mut(j, grid_n).iter_mut().zip(&r[off[j]..off[j + 1]]) {
                *dst = -src;
            }
        }
    }
}

/// Per-step view handed to trajectory observers.
pub struct StepView<'s> {
    pub n: usize,
    pub t: f64,
    /// Interior values (relative numbering).
    pub v: &'s [f64],
    /// Flat boundary values.
    pub f: &'s [f64],
}

/// Runs the scheme over the whole source grid from a zero state, calling
/// `observe` at every grid point (including the initial one).
pub fn evolve_with(sys: &DiracSystem, source: &BoundarySource, mut observe: impl FnMut(&StepView, &Stepper)) -> Result<(), CoreError> {
    if source.sizes != sys.patch().sizes() {
        return Err(CoreError::Source("source does not live on this patch".into()));
    }
    source.check_support(sys.patch())?;
    let grid = source.grid;
    let mut st = Stepper::new(sys, grid.step)?;
    let mut v = vec![0.0; sys.n_interior()];
    let (mut f_prev, _) = lift(sys, source, 0);
    if f_prev.iter().any(|&x| x != 0.0) {
        return Err(CoreError::Source("source must vanish at the first grid point".into()));
    }
    observe(&StepView { n: 0, t: grid.time(0), v: &v, f: &f_prev }, &st);
    for n in 1..grid.len {
        let (f_next, _) = lift(sys, source, n);
        st.step(&mut v, &f_prev, &f_next);
        observe(&StepView { n, t: grid.time(n), v: &v, f: &f_next }, &st);
        f_prev = f_next;
    }
    Ok(())
}

/// Interior values at every grid point.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub interior: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Full graded state at index `n`.
    pub fn state(&self, sys: &DiracSystem, source: &BoundarySource, n: usize) -> CochainState {
        let (f, _) = lift(sys, source, n);
        sys.full_state(&self.interior[n], &f)
    }
}

pub fn evolve(sys: &DiracSystem, source: &BoundarySource) -> Result<Trajectory, CoreError> {
    let mut interior = Vec::with_capacity(source.grid.len);
    evolve_with(sys, source, |s, _| interior.push(s.v.to_vec()))?;
    Ok(Trajectory { grid: source.grid, interior })
}

/// Records the normal traces of the degrees selected by `present` (index
/// `j` is the trace of the degree-`j+1` field).
pub fn response_with(sys: &DiracSystem, source: &BoundarySource, present: [bool; 3]) -> Result<BoundaryRecord, CoreError> {
    let mut rec = BoundaryRecord::zeros(source.grid, sys.patch().sizes(), present);
    let mut u = vec![0.0; sys.n_full()];
    let mut du = vec![0.0; sys.n_full()];
    evolve_with(sys, source, |s, st| {
        let (_, fdot) = lift(sys, source, s.n);
        let dv = st.velocity(s.v, s.f, &fdot);
        assemble_full(sys, s.v, s.f, &mut u);
        assemble_full(sys, &dv, &fdot, &mut du);
        patch_flux(sys, &u, &du, present, s.n, &mut rec);
    })?;
    Ok(rec)
}

pub fn response(sys: &DiracSystem, source: &BoundarySource) -> Result<BoundaryRecord, CoreError> {
    response_with(sys, source, [true; 3])
}

/// Leakage threshold for the degree-0 and degree-3 parts of a physical run.
pub const LEAKAGE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct PhysicalResponse {
    pub source: BoundarySource,
    pub record: BoundaryRecord,
    /// `max_t (|u0| + |u3|) / max_t |u|`, G norms of the full state.
    pub leakage: f64,
}

/// Response to the completed control `h`; measures only the degree-2 trace.
pub fn physical_response(sys: &DiracSystem, h: &BoundarySource) -> Result<PhysicalResponse, CoreError> {
    let source = physical_source(h, sys.patch())?;
    let present = [false, true, false];
    let mut rec = BoundaryRecord::zeros(source.grid, sys.patch().sizes(), present);
    let mut u = vec![0.0; sys.n_full()];
    let mut du = vec![0.0; sys.n_full()];
    let foff = sys.full_offsets();
    let op = sys.operator();
    let mut max_norm: f64 = 0.0;
    let mut max_leak: f64 = 0.0;
    evolve_with(sys, &source, |s, st| {
        let (_, fdot) = lift(sys, &source, s.n);
        let dv = st.velocity(s.v, s.f, &fdot);
        assemble_full(sys, s.v, s.f, &mut u);
        assemble_full(sys, &dv, &fdot, &mut du);
        patch_flux(sys, &u, &du, present, s.n, &mut rec);
        let part = |k: usize| {
            let x = &u[foff[k]..foff[k + 1]];
            op.inner(k, x, x).max(0.0)
        };
        let e: [f64; 4] = std::array::from_fn(part);
        max_norm = max_norm.max(e.iter().sum::<f64>().sqrt());
        max_leak = max_leak.max(e[0].sqrt() + e[3].sqrt());
    })?;
    let leakage = if max_norm > 0.0 { max_leak / max_norm } else { 0.0 };
    Ok(PhysicalResponse { source, record: rec, leakage })
}

/// Simulates every source in parallel and packs the results.
pub fn build_dataset(sys: &DiracSystem, kind: SystemKind, tau: f64, sources: Vec<(String, BoundarySource)>) -> Result<ResponseDataset, CoreError> {
    let grid = match sources.first() {
        Some((_, s)) => s.grid,
        None => return Err(CoreError::Source("no sources".into())),
    };
    let present = match kind {
        SystemKind::Complete => [true; 3],
        SystemKind::Physical => [false, true, false],
    };
    let header = DatasetHeader {
        fingerprint: sys.fingerprint().to_string(),
        kind,
        grid,
        source_window: tau,
        integrator: INTEGRATOR.to_string(),
        sizes: sys.patch().sizes(),
        record_degrees: present,
    };
    let mut ds = ResponseDataset::new(header, sys.patch().clone())?;
    let entries: Vec<Result<ResponseEntry, CoreError>> = sources
        .into_par_iter()
        .map(|(label, src)| match kind {
            SystemKind::Complete => Ok(ResponseEntry { label, record: response(sys, &src)?, source: src }),
            SystemKind::Physical => {
                let r = physical_response(sys, &src)?;
                Ok(ResponseEntry { label, source: r.source, record: r.record })
            }
        })
        .collect();
    for e in entries {
        ds.push(e?)?;
    }
    Ok(ds)
}

/// Seeded sources `seed0, seed0 + 1, ...` of the given kind.
pub fn seeded_sources(
    sys: &DiracSystem,
    kind: SystemKind,
    grid: TimeGrid,
    bump: Bump,
    seed0: u64,
    range: std::ops::Range<usize>,
) -> Result<Vec<(String, BoundarySource)>, CoreError> {
    range
        .map(|i| {
            let seed = seed0 + i as u64;
            let s = match kind {
                SystemKind::Complete => make_source(sys.patch(), seed, [true; 3], grid, bump)?,
                SystemKind::Physical => physical_control(sys.patch(), seed, grid, bump)?,
            };
            Ok((format!("src-{i}"), s))
        })
        .collect()
}

/// Degree-`k` G inner product of two full states.
pub fn state_inner(sys: &DiracSystem, k: usize, a: &CochainState, b: &CochainState) -> f64 {
    let op = sys.operator();
    op.inner(k, &op.full_part(a, k), &op.full_part(b, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::MaterialField;
    use crate::mesh::*;

    fn torus_system() -> DiracSystem {
        let c = build_solid_torus(4).unwrap();
        crate::dirac::assemble_dirac(&c, &MaterialField::random(c.tets().len(), 5, 4.0)).unwrap()
    }

    #[test]
    fn sources_are_deterministic_and_supported() {
        let sys = torus_system();
        let g = source_grid(1.0, 32, 1.0).unwrap();
        let b = standard_bump(1.0);
        let a = make_source(sys.patch(), 4, [true; 3], g, b).unwrap();
        assert_eq!(a, make_source(sys.patch(), 4, [true; 3], g, b).unwrap());
        assert_ne!(a, make_source(sys.patch(), 5, [true; 3], g, b).unwrap());
        assert!(a.check_support(sys.patch()).is_ok());
        let z = g.index_of(0.0).unwrap();
        for k in 0..3 {
            assert!(a.value(k, 0).iter().all(|&x| x == 0.0));
            assert!(a.value(k, z).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let sys = torus_system();
        let g = source_grid(1.0, 8, 1.0).unwrap();
        assert!(matches!(make_source(sys.patch(), 0, [true; 3], g, standard_bump(1.0)), Err(CoreError::Source(_))));
    }

    #[test]
    fn lift_is_right_inverse_of_trace() {
        let sys = torus_system();
        let g = source_grid(1.0, 32, 0.5).unwrap();
        let s = make_source(sys.patch(), 2, [true; 3], g, standard_bump(1.0)).unwrap();
        let n = g.index_of(-0.5).unwrap();
        let state = lift_state(&sys, &s, n);
        for k in 0..3 {
            let t = sys.operator().trace_t(&state, k);
            let bnd = sys.operator().boundary(k);
            let want = s.value(k, n);
            for (i, &gid) in sys.patch_ids(k).iter().enumerate() {
                let pos = bnd.binary_search(&gid).unwrap();
                assert_eq!(t[pos], want[i]);
            }
        }
        assert!(lift_state(&sys, &s, 0).flatten().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn zero_source_gives_zero_record() {
        let sys = torus_system();
        let g = source_grid(1.0, 32, 0.5).unwrap();
        let s = BoundarySource::zero(g, sys.patch().sizes());
        assert_eq!(response(&sys, &s).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn physical_control_is_closed_and_compact() {
        let c = refine(&build_solid_torus(4).unwrap()).unwrap();
        let sys = crate::dirac::assemble_dirac(&c, &MaterialField::random(c.tets().len(), 5, 4.0)).unwrap();
        let g = source_grid(1.0, 64, 0.5).unwrap();
        let h = physical_control(sys.patch(), 3, g, standard_bump(1.0)).unwrap();
        let spatial = &h.terms[0].spatial;
        assert!(spatial.iter().any(|&x| x != 0.0));
        assert!(sys.patch().d(1, spatial).iter().all(|x| x.abs() < 1e-12));
        let f = physical_source(&h, sys.patch()).unwrap();
        assert!(!f.has_degree(2));
        assert!(f.check_support(sys.patch()).is_ok());
    }

    #[test]
    fn open_control_gets_its_companion() {
        let sys = torus_system();
        let g = source_grid(1.0, 64, 0.5).unwrap();
        let mut h = make_source(sys.patch(), 3, [false, true, false], g, standard_bump(1.0)).unwrap();
        h.terms[0].spatial = random_profiles(sys.patch(), 3)[1].clone();
        let f = physical_source(&h, sys.patch()).unwrap();
        assert!(f.has_degree(2));
        for n in 0..g.len {
            let d = sys.patch().d(1, &f.value(1, n));
            for (a, b) in f.rate(2, n).iter().zip(&d) {
                assert!((a + b).abs() < 1e-12);
            }
        }
    }
}
