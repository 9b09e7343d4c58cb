//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p dirac-betti --test acceptance`.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use dirac_betti::oracle;
use dirac_betti::pipeline::recover;
use dirac_betti::Scenario;
use dirac_boundary::{ResponseDataset, SystemKind};
use dirac_core::dirac::{DiracSystem, DEFAULT_KERNEL_TOL};
use dirac_core::forms::MaterialField;
use dirac_core::forward::{build_dataset, evolve, seeded_sources, source_grid, standard_bump, state_inner, suggest_steps};
use dirac_core::homology::{betti, HomologyMode};
use dirac_core::mesh::*;
use dirac_core::SimplicialComplex3;
use dirac_recovery::{
    beta1_physical, beta2_from_boundary, betti_physical, gram_matrix, projected_inner, BettiReport, BoundaryData, GridCache,
    RecoveryConfig, Window,
};

type Outcome = Result<String, String>;

const MESHES: [&str; 4] = ["ball", "solid_torus", "tunneled_box_1", "tunneled_box_2"];
const EXPECTED_ABSOLUTE: [[usize; 4]; 4] = [[1, 0, 0, 0], [1, 1, 0, 0], [1, 1, 0, 0], [1, 2, 0, 0]];
const SEEDS: [u64; 3] = [7, 8, 9];

fn mesh(name: &str) -> SimplicialComplex3 {
    match name {
        "single_tet" => Ok(build_single_tet()),
        "ball" => build_ball(1),
        "solid_torus" => build_solid_torus(4),
        "tunneled_box_1" => build_tunneled_box(1, 1),
        "tunneled_box_2" => build_tunneled_box(2, 1),
        _ => unreachable!(),
    }
    .map_err(|e| format!("{name}: {e}"))
    .unwrap()
}

fn mesh_json(name: &str) -> serde_json::Value {
    match name {
        "ball" => serde_json::json!({"generator": "ball", "refinement": 1}),
        "solid_torus" => serde_json::json!({"generator": "solid_torus", "segments": 4}),
        "tunneled_box_1" => serde_json::json!({"generator": "tunneled_box", "tunnels": 1, "resolution": 1}),
        "tunneled_box_2" => serde_json::json!({"generator": "tunneled_box", "tunnels": 2, "resolution": 1}),
        _ => unreachable!(),
    }
}

fn system(c: &SimplicialComplex3, seed: u64) -> Result<Arc<DiracSystem>, String> {
    let m = MaterialField::random(c.tets().len(), seed, 10.0);
    DiracSystem::new(Arc::new(c.clone()), Arc::new(m)).map(Arc::new).map_err(|e| e.to_string())
}

fn whole(c: &SimplicialComplex3) -> SimplicialComplex3 {
    select_gamma(c, GammaSelector::Whole).unwrap()
}

fn scenario(mesh: &str, seed: u64, gamma: serde_json::Value, method: &str) -> Scenario {
    serde_json::from_value(serde_json::json!({
        "name": format!("{mesh} seed {seed}"),
        "mesh": mesh_json(mesh),
        "material": {"kind": "random", "seed": seed, "cond": 10.0},
        "gamma": gamma,
        "method": method,
        "seed": 100
    }))
    .unwrap()
}

fn recovered(s: &Scenario) -> Result<BettiReport, String> {
    let setup = s.setup().map_err(|e| format!("{}: {e}", s.name))?;
    recover(s, &setup).map(|(r, _)| r).map_err(|e| format!("{}: {e}", s.name))
}

fn exact_algebra() -> Outcome {
    let (mut adj, mut stokes, mut skew): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for name in ["single_tet", "ball", "solid_torus", "tunneled_box_1", "tunneled_box_2"] {
        let c = whole(&mesh(name));
        if !oracle::coboundaries_nilpotent(&c) {
            return Err(format!("{name}: d d != 0"));
        }
        for seed in SEEDS {
            let sys = system(&c, seed)?;
            adj = adj.max(oracle::adjoint_residual(&sys, seed));
            stokes = stokes.max(oracle::stokes_residual(&sys, seed));
            skew = skew.max(sys.skew_residual());
        }
    }
    let msg = format!("adjoint {adj:.1e}, stokes {stokes:.1e}, skew {skew:.1e}");
    if adj <= 1e-12 && stokes <= 1e-12 && skew <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn kernel_is_topology() -> Outcome {
    let mut seen = Vec::new();
    for name in MESHES {
        let c = whole(&mesh(name));
        let rel = betti(&c, HomologyMode::Relative);
        for seed in SEEDS {
            let dims = system(&c, seed)?.harmonic_dims(DEFAULT_KERNEL_TOL).map_err(|e| e.to_string())?;
            if dims != rel {
                return Err(format!("{name} seed {seed}: kernel {dims:?}, relative Betti {rel:?}"));
            }
        }
        seen.push(format!("{name} {rel:?}"));
    }
    Ok(seen.join(", "))
}

/// Boundary-reconstructed inner products against the simulated states on a
/// twice refined solid torus, at three step sizes.
fn reconstruction_fidelity() -> Outcome {
    let c = whole(&refine(&refine(&mesh("solid_torus")).unwrap()).unwrap());
    let sys = system(&c, 7)?;
    let tau = 0.25;
    let mut errs = Vec::new();
    for steps in [64, 128, 256] {
        let e = oracle::reconstruction_errors(&sys, SystemKind::Complete, tau, steps, 1.0, 3).map_err(|e| e.to_string())?;
        errs.push(e);
    }
    let mut parts = Vec::new();
    let mut ok = true;
    for k in 0..4 {
        let (e64, e128, e256) = (errs[0][k].1, errs[1][k].1, errs[2][k].1);
        let order = (e128 / e256).log2();
        ok &= e128 <= 1e-4 && (order - 2.0).abs() <= 0.4;
        parts.push(format!("k{k} {e64:.1e}/{e128:.1e}/{e256:.1e} order {order:.2}"));
    }
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn conservation() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in ["single_tet", "ball", "solid_torus", "tunneled_box_1", "tunneled_box_2"] {
        let c = whole(&mesh(name));
        let sys = system(&c, 7)?;
        let r = sys.spectral_radius().map_err(|e| e.to_string())?;
        let tau = if r > 0.0 { 8.0 / r } else { 1.0 };
        let dt = tau / suggest_steps(tau, r) as f64;
        for h in [dt, 10.0 * dt] {
            worst = worst.max(oracle::energy_drift(&sys, h, 1000, 1).map_err(|e| e.to_string())?);
        }
    }
    let msg = format!("worst relative drift {worst:.1e} per 1000 steps");
    if worst <= 1e-11 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Time-averaged boundary pairings against the exact harmonic projection of
/// the simulated states.  The error envelope is the largest error over
/// `[T, 2T]`.
fn averaging_law() -> Outcome {
    let c = whole(&mesh("solid_torus"));
    let sys = system(&c, 7)?;
    let k = 2;
    let r = sys.spectral_radius().map_err(|e| e.to_string())?;
    let tau = 8.0 / r;
    let horizons = [640.0, 1280.0, 2560.0, 5120.0, 10240.0];
    let t_max = 2.0 * horizons[horizons.len() - 1];
    let grid = source_grid(tau, suggest_steps(tau, r), 2.0 * t_max + 2.0 * tau).map_err(|e| e.to_string())?;
    let srcs = seeded_sources(&sys, SystemKind::Complete, grid, standard_bump(tau), 5, 0..2).map_err(|e| e.to_string())?;
    let ds = build_dataset(&sys, SystemKind::Complete, tau, srcs).map_err(|e| e.to_string())?;
    let o = ds.origin();
    let states: Vec<_> = ds
        .entries
        .iter()
        .map(|e| evolve(&sys, &e.source).map(|tr| tr.state(&sys, &e.source, o)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let basis = sys.harmonic_kernel(DEFAULT_KERNEL_TOL).map_err(|e| e.to_string())?;
    let exact = oracle::projected_pair(&sys, &basis, k, &states[0], &states[1]);
    let scale = (state_inner(&sys, k, &states[0], &states[0]) * state_inner(&sys, k, &states[1], &states[1])).sqrt();
    let data = BoundaryData::new(&ds).map_err(|e| e.to_string())?;

    let short = 20.0_f64;
    let short = (short / grid.step).round() * grid.step;
    let cache = GridCache::new();
    let forward = projected_inner(&data, &cache, 0, 1, k, short).map_err(|e| e.to_string())?;
    let backward = projected_inner(&data, &cache, 1, 0, k, short).map_err(|e| e.to_string())?;
    let via_grid = 0.5 * (forward + backward);
    let via_functional = gram_matrix(&data, &[0, 1], k, short, Window::Cesaro).map_err(|e| e.to_string())?.p[0][1];
    if (via_grid - via_functional).abs() > 1e-10 * scale {
        return Err(format!("grid average {via_grid:e} and folded average {via_functional:e} disagree"));
    }

    let mut envelopes = Vec::new();
    for &t in &horizons {
        let n0 = (t / grid.step).round() as usize;
        let stride = (n0 / 64).max(1);
        let mut worst: f64 = 0.0;
        for n in (n0..=2 * n0).step_by(stride) {
            let g = gram_matrix(&data, &[0, 1], k, n as f64 * grid.step, Window::Cesaro).map_err(|e| e.to_string())?;
            worst = worst.max((g.p[0][1] - exact).abs() / scale);
        }
        envelopes.push(worst);
    }
    let ratios: Vec<f64> = envelopes.windows(2).map(|w| w[1] / w[0]).collect();
    let msg = format!(
        "envelopes {} ratios {}",
        envelopes.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>().join(" "),
        ratios.iter().map(|q| format!("{q:.2}")).collect::<Vec<_>>().join(" ")
    );
    if ratios.len() >= 4 && ratios.iter().all(|&q| q <= 0.6) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn complete_recovery() -> Outcome {
    let mut parts = Vec::new();
    for (name, expected) in MESHES.iter().zip(EXPECTED_ABSOLUTE) {
        let s = scenario(name, 7, serde_json::json!({"fraction": {"p": 0.25}}), "complete-dirac");
        let r = recovered(&s)?;
        let got = r.absolute.map(|b| b.unwrap_or(usize::MAX));
        let min_gap = r.counts.iter().map(|c| c.gap).fold(f64::INFINITY, f64::min);
        if got != expected || min_gap < 10.0 {
            return Err(format!("{name}: recovered {got:?}, expected {expected:?}, smallest gap {min_gap:.1e}"));
        }
        parts.push(format!("{name} {got:?} gap>={min_gap:.0e}"));
    }
    Ok(parts.join(", "))
}

fn physical_recovery() -> Outcome {
    let mut parts = Vec::new();
    for (name, expected) in MESHES.iter().zip(EXPECTED_ABSOLUTE) {
        let s = scenario(name, 7, serde_json::json!("whole"), "corollary");
        let setup = s.setup().map_err(|e| e.to_string())?;
        let (_, mut provider) = recover(&s, &setup).map_err(|e| format!("{name}: {e}"))?;
        let cfg = RecoveryConfig { horizons: setup.horizons.clone(), ..s.recovery_config() };
        let b1 = beta1_physical(&mut provider, &cfg).map_err(|e| format!("{name}: {e}"))?;
        let surface = &setup.system.patch().surface;
        let b2 = beta2_from_boundary(b1, surface).map_err(|e| format!("{name}: {e}"))?;
        let oracle_abs = betti(setup.system.complex(), HomologyMode::Absolute);
        if b1 != expected[1] || b2 != 0 || oracle_abs[1] != b1 || oracle_abs[2] != b2 {
            return Err(format!("{name}: beta1 {b1}, beta2 {b2}, oracle {oracle_abs:?}"));
        }
        parts.push(format!("{name} b1={b1} b2={b2}"));
    }
    Ok(parts.join(", "))
}

fn invariance() -> Outcome {
    let mut parts = Vec::new();
    for name in MESHES {
        let mut seen: Vec<[Option<usize>; 4]> = Vec::new();
        for seed in SEEDS {
            for gamma in [serde_json::json!("whole"), serde_json::json!({"fraction": {"p": 0.25}})] {
                seen.push(recovered(&scenario(name, seed, gamma, "complete-dirac"))?.absolute);
            }
            seen.push(recovered(&scenario(name, seed, serde_json::json!("whole"), "corollary"))?.absolute);
        }
        if seen.iter().any(|b| *b != seen[0]) {
            return Err(format!("{name}: {seen:?}"));
        }
        parts.push(format!("{name} {:?} x{}", seen[0].map(|b| b.unwrap_or(usize::MAX)), seen.len()));
    }
    Ok(parts.join(", "))
}

/// The recovery crate builds without the simulator and recovers from a
/// stored dataset alone.
fn boundary_only_provenance() -> Outcome {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../recovery");
    let manifest = std::fs::read_to_string(root.join("Cargo.toml")).map_err(|e| e.to_string())?;
    if manifest.contains("dirac-core") {
        return Err("recovery manifest depends on the simulator".into());
    }
    for entry in std::fs::read_dir(root.join("src")).map_err(|e| e.to_string())? {
        let p = entry.map_err(|e| e.to_string())?.path();
        if std::fs::read_to_string(&p).map_err(|e| e.to_string())?.contains("dirac_core") {
            return Err(format!("{} refers to the simulator", p.display()));
        }
    }
    let mut ds = ResponseDataset::load(&root.join("tests/data/torus_physical.json")).map_err(|e| e.to_string())?;
    let cfg = RecoveryConfig { n_sources: 2, max_sources: 4, horizons: vec![8.0, 16.0], ..Default::default() };
    let r = betti_physical(&mut ds, &cfg).map_err(|e| e.to_string())?;
    if r.absolute != [Some(1), Some(1), Some(0), Some(0)] {
        return Err(format!("stored dataset gives {:?}", r.absolute));
    }
    Ok(format!("no simulator dependency; stored torus dataset gives {:?}", r.absolute.map(|b| b.unwrap_or(usize::MAX))))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("exact algebra", exact_algebra),
        ("kernel equals relative topology", kernel_is_topology),
        ("boundary reconstruction fidelity", reconstruction_fidelity),
        ("energy conservation", conservation),
        ("averaging law", averaging_law),
        ("complete-system Betti recovery, 25% patch", complete_recovery),
        ("physical first and second Betti numbers", physical_recovery),
        ("invariance across materials and patches", invariance),
        ("boundary-only provenance", boundary_only_provenance),
    ];
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if filter.is_some_and(|f| f != i + 1) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {} {name}: PASS ({secs:.1}s) {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.1}s) {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
