//! Interior-state checks: these see the whole simulated state and serve as
//! the reference the boundary-only recovery is compared against.

use std::collections::HashMap;

use dirac_boundary::SystemKind;
use dirac_core::dirac::{DiracSystem, HarmonicBasis};
use dirac_core::forms::{coboundary, CochainState};
use dirac_core::forward::{build_dataset, evolve, seeded_sources, source_grid, standard_bump, state_inner, Stepper};
use dirac_core::SimplicialComplex3;
use dirac_recovery::{BoundaryData, GridCache};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

/// `d_{k+1} d_k = 0` evaluated in integer arithmetic.
pub fn coboundaries_nilpotent(c: &SimplicialComplex3) -> bool {
    (0..2).all(|k| {
        let (a, b) = (coboundary(c, k), coboundary(c, k + 1));
        let mut by_mid = vec![Vec::new(); a.rows];
        for &(r, mid, s) in &b.entries {
            by_mid[mid as usize].push((r, s));
        }
        let mut prod = HashMap::<(u32, u32), i64>::new();
        for &(mid, col, s) in &a.entries {
            for &(r, t) in &by_mid[mid as usize] {
                *prod.entry((r, col)).or_default() += s as i64 * t as i64;
            }
        }
        prod.values().all(|&v| v == 0)
    })
}

fn random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Largest relative residual of `(d a, b) = (a, delta b)` over degrees, for
/// random `a` vanishing on the boundary.
pub fn adjoint_residual(sys: &DiracSystem, seed: u64) -> f64 {
    let op = sys.operator();
    let c = sys.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for k in 1..4 {
        let mut a = random(&mut rng, c.count(k - 1));
        for &i in op.boundary(k - 1) {
            a[i] = 0.0;
        }
        let b = random(&mut rng, c.count(k));
        let da = op.apply_d(k - 1, &a);
        let lhs = op.inner(k, &da, &b);
        let rhs = op.inner(k - 1, &a, &op.codifferential_relative(k, &b));
        let scale = (op.inner(k, &da, &da) * op.inner(k, &b, &b)).sqrt();
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    worst
}

/// Largest relative residual of `(d e, w) - (e, delta w) = <t e, n w>` for
/// random unconstrained `e`, `w`.
pub fn stokes_residual(sys: &DiracSystem, seed: u64) -> f64 {
    let op = sys.operator();
    let c = sys.complex();
    let sizes = c.counts();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for k in 1..4 {
        let e = random(&mut rng, c.count(k - 1));
        let w = random(&mut rng, c.count(k));
        let de = op.apply_d(k - 1, &e);
        let lhs = op.inner(k, &de, &w) - op.inner(k - 1, &e, &op.codifferential_relative(k, &w));
        let te = op.trace_t(&CochainState::degree(k - 1, e, sizes, false), k - 1);
        let nw = op.trace_n(&CochainState::degree(k, w.clone(), sizes, false), k);
        let rhs: f64 = te.iter().zip(&nw).map(|(x, y)| x * y).sum();
        let scale = (op.inner(k, &de, &de) * op.inner(k, &w, &w)).sqrt();
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    worst
}

/// Relative change of the energy after `steps` source-free steps.
pub fn energy_drift(sys: &DiracSystem, dt: f64, steps: usize, seed: u64) -> Result<f64, CliError> {
    let mut st = Stepper::new(sys, dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = random(&mut rng, sys.n_interior());
    let e0 = sys.inner(&v, &v);
    if e0 == 0.0 {
        return Ok(0.0);
    }
    for _ in 0..steps {
        st.step_free(&mut v);
    }
    Ok((sys.inner(&v, &v) - e0).abs() / e0)
}

/// Worst relative error, per degree, of the boundary-reconstructed
/// `(u_a(t), u_b(s))` against the simulated states, over `[0, t_max]^2`
/// for the source pairs (0,1) and (1,1).
pub fn reconstruction_errors(
    sys: &DiracSystem,
    kind: SystemKind,
    tau: f64,
    steps_per_tau: usize,
    t_max: f64,
    seed: u64,
) -> Result<Vec<(usize, f64)>, CliError> {
    let grid = source_grid(tau, steps_per_tau, 2.0 * t_max + 2.0 * tau)?;
    let srcs = seeded_sources(sys, kind, grid, standard_bump(tau), seed, 0..2)?;
    let ds = build_dataset(sys, kind, tau, srcs)?;
    let trajs = ds.entries.iter().map(|e| evolve(sys, &e.source)).collect::<Result<Vec<_>, _>>()?;
    let data = BoundaryData::new(&ds)?;
    let cache = GridCache::new();
    let o = ds.origin();
    let nt = (t_max / grid.step).round() as usize;
    let stride = (nt / 16).max(1);
    let degrees: Vec<usize> = match kind {
        SystemKind::Complete => vec![0, 1, 2, 3],
        SystemKind::Physical => vec![1, 2],
    };
    let mut out = Vec::new();
    for k in degrees {
        let mut err: f64 = 0.0;
        let mut big: f64 = 0.0;
        for (a, b) in [(0usize, 1usize), (1, 1)] {
            let g = cache.get(&data, a, b, k, t_max)?;
            for n in (0..=nt).step_by(stride) {
                let sa = trajs[a].state(sys, &ds.entries[a].source, o + n);
                for i in (0..=nt).step_by(stride) {
                    let sb = trajs[b].state(sys, &ds.entries[b].source, o + i);
                    let exact = state_inner(sys, k, &sa, &sb);
                    err = err.max((exact - g.value(o + i, o + n)?).abs());
                    big = big.max(exact.abs());
                }
            }
        }
        out.push((k, if big > 0.0 { err / big } else { err }));
    }
    Ok(out)
}

/// `(P u, w)` with `P` the orthogonal projection onto the degree-`k`
/// harmonic fields.
pub fn projected_pair(sys: &DiracSystem, basis: &HarmonicBasis, k: usize, u: &CochainState, w: &CochainState) -> f64 {
    basis.fields[k].iter().map(|h| state_inner(sys, k, u, h) * state_inner(sys, k, h, w)).sum()
}
