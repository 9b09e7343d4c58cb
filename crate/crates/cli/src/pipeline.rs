//! `run` and `verify`: simulate, recover from boundary data only, and compare
//! against the homology oracle and the interior checks.

use std::fs;
use std::path::{Path, PathBuf};

use dirac_core::dirac::DEFAULT_KERNEL_TOL;
use dirac_core::homology::{betti, HomologyMode};
use dirac_recovery::{betti1_report, betti_from_dirac, betti_physical, BettiReport, BoundaryData, InnerProductGrid, Method};
use serde::Serialize;

use crate::error::CliError;
use crate::oracle;
use crate::provider::SimulatedResponses;
use crate::scenario::{Scenario, Setup};

pub const REPORT_FILE: &str = "betti_report.json";
pub const VERIFY_FILE: &str = "verify_report.json";
pub const ERROR_FILE: &str = "errors.json";
pub const DATASET_FILE: &str = "dataset.json";

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    pub dump_grids: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemSummary {
    pub fingerprint: String,
    pub relative_sizes: [usize; 4],
    pub patch_sizes: [usize; 3],
    pub spectral_radius: f64,
    pub spectral_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TimeSummary {
    pub tau: f64,
    pub steps_per_tau: usize,
    pub dt: f64,
    pub horizons: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeCheck {
    pub degree: usize,
    pub recovered: usize,
    pub oracle: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub method: Method,
    pub system: SystemSummary,
    pub time: TimeSummary,
    pub recovery: BettiReport,
    pub oracle_absolute: [usize; 4],
    pub oracle_relative: [usize; 4],
    /// One entry per absolute Betti number the method determines.
    pub comparison: Vec<DegreeCheck>,
    pub pass: bool,
}

fn summarize(setup: &Setup) -> Result<(SystemSummary, TimeSummary), CliError> {
    let sys = &setup.system;
    Ok((
        SystemSummary {
            fingerprint: sys.fingerprint().to_string(),
            relative_sizes: sys.relative_sizes(),
            patch_sizes: sys.patch().sizes(),
            spectral_radius: sys.spectral_radius()?,
            spectral_gap: sys.spectral_gap()?,
        },
        TimeSummary { tau: setup.tau, steps_per_tau: setup.steps_per_tau, dt: setup.dt(), horizons: setup.horizons.clone() },
    ))
}

/// Recovery only; nothing is written.
pub fn recover(scenario: &Scenario, setup: &Setup) -> Result<(BettiReport, SimulatedResponses), CliError> {
    let mut provider = SimulatedResponses::new(setup.system.clone(), setup.kind, setup.tau, setup.grid, setup.bump, scenario.seed);
    provider.grow(scenario.n_sources)?;
    let mut cfg = scenario.recovery_config();
    cfg.horizons = setup.horizons.clone();
    let report = match scenario.method {
        Method::CompleteDirac => betti_from_dirac(&mut provider, &cfg)?,
        Method::PhysicalMaxwell => betti1_report(&mut provider, &cfg)?,
        Method::Corollary => betti_physical(&mut provider, &cfg)?,
    };
    Ok((report, provider))
}

pub fn compare(recovered: &[Option<usize>; 4], oracle: &[usize; 4]) -> Vec<DegreeCheck> {
    (0..4)
        .filter_map(|k| recovered[k].map(|r| DegreeCheck { degree: k, recovered: r, oracle: oracle[k], pass: r == oracle[k] }))
        .collect()
}

/// Full pipeline; writes the report and diagnostics under `opts.out`.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<RunReport, CliError> {
    let setup = scenario.setup()?;
    let (system, time) = summarize(&setup)?;
    let (recovery, provider) = recover(scenario, &setup)?;
    let c = setup.system.complex();
    let oracle_absolute = betti(c, HomologyMode::Absolute);
    let oracle_relative = betti(c, HomologyMode::Relative);
    let comparison = compare(&recovery.absolute, &oracle_absolute);
    let pass = !comparison.is_empty() && comparison.iter().all(|d| d.pass);
    let report = RunReport {
        scenario: scenario.name.clone(),
        method: scenario.method,
        system,
        time,
        recovery,
        oracle_absolute,
        oracle_relative,
        comparison,
        pass,
    };

    let diag = opts.out.join("diagnostics");
    fs::create_dir_all(&diag)?;
    write_json(&opts.out.join(REPORT_FILE), &report)?;
    fs::write(diag.join("gram_ladder.csv"), report.recovery.ladder_csv())?;
    fs::write(diag.join("horizon_sweep.csv"), report.recovery.sweep_csv())?;
    fs::write(diag.join("kernel_ladder.csv"), setup.system.eigen_ladder_csv(DEFAULT_KERNEL_TOL)?)?;
    if opts.dump_grids {
        if let Some(ds) = provider.current() {
            dump_grids(ds, &setup, &diag)?;
        }
    }
    Ok(report)
}

/// Inner-product grids of the first two sources over `[-tau, 2 tau]`.
fn dump_grids(ds: &dirac_boundary::ResponseDataset, setup: &Setup, dir: &Path) -> Result<(), CliError> {
    let data = BoundaryData::new(ds)?;
    let degrees: Vec<usize> = match setup.kind {
        dirac_boundary::SystemKind::Complete => vec![0, 1, 2, 3],
        dirac_boundary::SystemKind::Physical => vec![1, 2],
    };
    let b = if ds.len() > 1 { 1 } else { 0 };
    for k in degrees {
        let g = InnerProductGrid::compute(&data, 0, b, k, 2.0 * setup.tau)?;
        fs::write(dir.join(format!("grid_k{k}_0_{b}.csv")), g.to_csv())?;
    }
    Ok(())
}

/// Simulates the scenario's first `max_sources` sources over the longest
/// horizon and saves the boundary data only.
pub fn simulate(scenario: &Scenario, out: &Path) -> Result<PathBuf, CliError> {
    let setup = scenario.setup()?;
    let mut provider = SimulatedResponses::new(setup.system.clone(), setup.kind, setup.tau, setup.grid, setup.bump, scenario.seed);
    if let Some(&t) = setup.horizons.last() {
        provider.extend(t)?;
    }
    let ds = provider.grow(scenario.max_sources)?;
    fs::create_dir_all(out)?;
    let path = out.join(DATASET_FILE);
    ds.save(&path)?;
    Ok(path)
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, pass: value <= threshold, detail: String::new() }
    }

    fn flag(name: &str, pass: bool, detail: String) -> Self {
        Check { name: name.into(), value: if pass { 0.0 } else { 1.0 }, threshold: 0.0, pass, detail }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Checklist {
    pub scenario: String,
    pub kernel_dims: Option<[usize; 4]>,
    pub oracle_relative: Option<[usize; 4]>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Invariant checks without the recovery; a mesh that fails validation
/// becomes a failed `mesh` item rather than an error.
pub fn verify(scenario: &Scenario, out: &Path) -> Result<Checklist, CliError> {
    let mut checks = Vec::new();
    let mut list = Checklist { scenario: scenario.name.clone(), kernel_dims: None, oracle_relative: None, checks: Vec::new(), pass: false };
    match scenario.setup() {
        Err(CliError::Core(e)) => {
            checks.push(Check::flag("mesh", false, e.to_string()));
        }
        Err(e) => return Err(e),
        Ok(setup) => {
            let sys = &setup.system;
            let c = sys.complex();
            checks.push(Check::flag("mesh", true, format!("counts {:?}", c.counts())));
            checks.push(Check::flag("coboundaries_nilpotent", oracle::coboundaries_nilpotent(c), String::new()));
            checks.push(Check::at_most("adjointness", oracle::adjoint_residual(sys, scenario.seed), 1e-12));
            checks.push(Check::at_most("stokes", oracle::stokes_residual(sys, scenario.seed), 1e-12));
            checks.push(Check::at_most("skew", sys.skew_residual(), 1e-10));
            checks.push(Check::at_most("graded_square", sys.square_mixing_residual(scenario.seed), 1e-12));
            checks.push(Check::at_most("energy_drift_1000", oracle::energy_drift(sys, setup.dt(), 1000, scenario.seed)?, 1e-11));
            let rel = betti(c, HomologyMode::Relative);
            let dims = sys.harmonic_dims(DEFAULT_KERNEL_TOL)?;
            checks.push(Check::flag("kernel_equals_relative_betti", dims == rel, format!("kernel {dims:?} oracle {rel:?}")));
            list.kernel_dims = Some(dims);
            list.oracle_relative = Some(rel);
            let errs = oracle::reconstruction_errors(sys, setup.kind, setup.tau, setup.steps_per_tau, setup.tau, scenario.seed)?;
            for (k, e) in errs {
                checks.push(Check::at_most(&format!("reconstruction_k{k}"), e, scenario.verify_tol));
            }
        }
    }
    list.pass = checks.iter().all(|c| c.pass);
    list.checks = checks;
    fs::create_dir_all(out)?;
    write_json(&out.join(VERIFY_FILE), &list)?;
    Ok(list)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_error(out: &Path, err: &CliError) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    write_json(&out.join(ERROR_FILE), &err.report())
}
