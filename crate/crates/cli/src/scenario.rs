//! Scenario files: one JSON document fixing mesh, materials, patch, time
//! discretization, sources and recovery settings.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use dirac_boundary::{Bump, SystemKind, TimeGrid};
use dirac_core::dirac::DiracSystem;
use dirac_core::forms::MaterialField;
use dirac_core::forward::{source_grid, standard_bump, suggest_steps};
use dirac_core::mesh::*;
use dirac_core::SimplicialComplex3;
use dirac_recovery::{snap_horizon, Method, RecoveryConfig, Window};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum MeshSpec {
    SingleTet,
    Ball { refinement: usize },
    SolidTorus { segments: usize },
    TunneledBox { tunnels: usize, resolution: usize },
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaterialSpec {
    Identity,
    Random { seed: u64, cond: f64 },
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSpec {
    Whole,
    Fraction { p: f64, #[serde(default)] seed: usize },
    /// Keep the patch stored in the mesh file.
    FromMesh,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub mesh: MeshSpec,
    /// Extra uniform refinements applied after generation.
    #[serde(default)]
    pub refine: usize,
    pub material: MaterialSpec,
    pub gamma: GammaSpec,
    pub method: Method,
    /// Source window length; `8 / spectral radius` when absent.
    #[serde(default)]
    pub tau: Option<f64>,
    /// Time steps per source window; chosen from the spectral radius when absent.
    #[serde(default)]
    pub steps_per_tau: Option<usize>,
    #[serde(default = "default_horizons")]
    pub horizons: Vec<f64>,
    #[serde(default = "default_n_sources")]
    pub n_sources: usize,
    #[serde(default = "default_max_sources")]
    pub max_sources: usize,
    /// Seed of the first source; source `i` uses `seed + i`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tau_rel")]
    pub tau_rel: f64,
    #[serde(default = "default_floor_rel")]
    pub floor_rel: f64,
    #[serde(default = "default_window")]
    pub window: Window,
    /// Tolerance for the reconstruction check in `verify`.
    #[serde(default = "default_verify_tol")]
    pub verify_tol: f64,
}

fn default_horizons() -> Vec<f64> {
    RecoveryConfig::default().horizons
}
fn default_n_sources() -> usize {
    RecoveryConfig::default().n_sources
}
fn default_max_sources() -> usize {
    RecoveryConfig::default().max_sources
}
fn default_tau_rel() -> f64 {
    RecoveryConfig::default().tau_rel
}
fn default_floor_rel() -> f64 {
    RecoveryConfig::default().floor_rel
}
fn default_window() -> Window {
    RecoveryConfig::default().window
}
fn default_verify_tol() -> f64 {
    1e-3
}

/// Everything the forward side needs, built from a scenario.
pub struct Setup {
    pub system: Arc<DiracSystem>,
    pub kind: SystemKind,
    pub tau: f64,
    pub steps_per_tau: usize,
    pub horizons: Vec<f64>,
    pub grid: TimeGrid,
    pub bump: Bump,
}

impl Setup {
    pub fn dt(&self) -> f64 {
        self.grid.step
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let mut s: Scenario = serde_json::from_str(&text).map_err(|e| CliError::Scenario(format!("{}: {e}", path.display())))?;
        if let Some(dir) = path.parent() {
            s.resolve_paths(dir);
        }
        s.validate()?;
        Ok(s)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let MeshSpec::File { path } = &mut self.mesh {
            fix(path);
        }
        if let MaterialSpec::File { path } = &mut self.material {
            fix(path);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Scenario(m.into()));
        if let Some(t) = self.tau {
            if !(t > 0.0 && t.is_finite()) {
                return bad("tau must be positive");
            }
        }
        if self.steps_per_tau == Some(0) {
            return bad("steps_per_tau must be positive");
        }
        if let MaterialSpec::Random { cond, .. } = self.material {
            if !(cond >= 1.0) {
                return bad("material condition bound must be at least 1");
            }
        }
        if let GammaSpec::Fraction { p, .. } = self.gamma {
            if !(p > 0.0 && p <= 1.0) {
                return bad("gamma fraction must lie in (0, 1]");
            }
        }
        if !(self.verify_tol > 0.0) {
            return bad("verify_tol must be positive");
        }
        self.recovery_config().validate()?;
        Ok(())
    }

    pub fn kind(&self) -> SystemKind {
        match self.method {
            Method::CompleteDirac => SystemKind::Complete,
            Method::PhysicalMaxwell | Method::Corollary => SystemKind::Physical,
        }
    }

    pub fn recovery_config(&self) -> RecoveryConfig {
        RecoveryConfig {
            n_sources: self.n_sources,
            max_sources: self.max_sources,
            horizons: self.horizons.clone(),
            tau_rel: self.tau_rel,
            floor_rel: self.floor_rel,
            connected: true,
            window: self.window,
        }
    }

    /// The mesh with its patch selected.
    pub fn complex(&self) -> Result<SimplicialComplex3, CliError> {
        let mut c = match &self.mesh {
            MeshSpec::SingleTet => build_single_tet(),
            MeshSpec::Ball { refinement } => build_ball(*refinement)?,
            MeshSpec::SolidTorus { segments } => build_solid_torus(*segments)?,
            MeshSpec::TunneledBox { tunnels, resolution } => build_tunneled_box(*tunnels, *resolution)?,
            MeshSpec::File { path } => load_complex(path)?,
        };
        for _ in 0..self.refine {
            c = refine(&c)?;
        }
        Ok(match self.gamma {
            GammaSpec::Whole => select_gamma(&c, GammaSelector::Whole)?,
            GammaSpec::Fraction { p, seed } => select_gamma(&c, GammaSelector::Fraction { p, seed })?,
            GammaSpec::FromMesh => {
                if self.refine > 0 {
                    return Err(CliError::Scenario("a patch read from the mesh file cannot be refined".into()));
                }
                c
            }
        })
    }

    pub fn materials(&self, n_tets: usize) -> Result<MaterialField, CliError> {
        Ok(match &self.material {
            MaterialSpec::Identity => MaterialField::identity(n_tets),
            MaterialSpec::Random { seed, cond } => MaterialField::random(n_tets, *seed, *cond),
            MaterialSpec::File { path } => MaterialField::load(path, n_tets)?,
        })
    }

    pub fn system(&self) -> Result<Arc<DiracSystem>, CliError> {
        let c = self.complex()?;
        let m = self.materials(c.tets().len())?;
        Ok(Arc::new(DiracSystem::new(Arc::new(c), Arc::new(m))?))
    }

    /// Builds the system and fixes the time discretization; horizons are
    /// snapped to the step and the grid covers the shortest one.  Longer
    /// horizons extend the simulation only when the sweep reaches them.
    pub fn setup(&self) -> Result<Setup, CliError> {
        let system = self.system()?;
        let radius = system.spectral_radius()?;
        let tau = match self.tau {
            Some(t) => t,
            None if radius > 0.0 => 8.0 / radius,
            None => 1.0,
        };
        let steps_per_tau = self.steps_per_tau.unwrap_or_else(|| suggest_steps(tau, radius));
        let dt = tau / steps_per_tau as f64;
        let mut horizons: Vec<f64> = self.horizons.iter().map(|&t| snap_horizon(t, dt)).collect();
        horizons.dedup();
        let first = horizons.first().copied().unwrap_or(0.0);
        let grid = source_grid(tau, steps_per_tau, first + tau)?;
        Ok(Setup { system, kind: self.kind(), tau, steps_per_tau, horizons, grid, bump: standard_bump(tau) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "mesh": {"generator": "solid_torus", "segments": 4},
        "material": {"kind": "random", "seed": 7, "cond": 10.0},
        "gamma": {"fraction": {"p": 0.25}},
        "method": "complete-dirac"
    }"#;

    #[test]
    fn defaults_fill_in() {
        let s: Scenario = serde_json::from_str(MINIMAL).unwrap();
        assert_eq!(s.horizons, RecoveryConfig::default().horizons);
        assert_eq!(s.gamma, GammaSpec::Fraction { p: 0.25, seed: 0 });
        assert_eq!(s.kind(), SystemKind::Complete);
        s.validate().unwrap();
    }

    #[test]
    fn round_trip() {
        let s: Scenario = serde_json::from_str(MINIMAL).unwrap();
        let back: Scenario = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut s: Scenario = serde_json::from_str(MINIMAL).unwrap();
        s.horizons = vec![8.0, 4.0];
        assert!(matches!(s.validate(), Err(CliError::Recovery(_))));
        let mut s: Scenario = serde_json::from_str(MINIMAL).unwrap();
        s.material = MaterialSpec::Random { seed: 1, cond: 0.5 };
        assert!(matches!(s.validate(), Err(CliError::Scenario(_))));
        assert!(serde_json::from_str::<Scenario>(&MINIMAL.replace("\"method\"", "\"bogus\": 1, \"method\"")).is_err());
    }

    #[test]
    fn horizons_land_on_the_grid() {
        let mut s: Scenario = serde_json::from_str(MINIMAL).unwrap();
        s.horizons = vec![3.3, 7.1];
        let setup = s.setup().unwrap();
        for &h in &setup.horizons {
            let r = h / setup.dt();
            assert!((r - r.round()).abs() < 1e-9);
        }
        assert!(setup.grid.end() >= setup.horizons[0] + setup.tau - 1e-9);
    }
}
