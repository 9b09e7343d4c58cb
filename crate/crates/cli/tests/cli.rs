use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use dirac_betti::{run, verify, RunOptions, Scenario};
use serde_json::Value;

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn bin(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_dirac-betti"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap();
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned())
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn verify_passes_on_a_single_tet() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario_dir().join("single_tet_verify.json");
    let (code, _) = bin(&["verify", s.to_str().unwrap()], tmp.path());
    assert_eq!(code, 0);
    let v = read_json(&tmp.path().join("verify_report.json"));
    assert_eq!(v["pass"], Value::Bool(true));
    assert_eq!(v["kernel_dims"], serde_json::json!([0, 0, 0, 1]));
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for n in ["mesh", "adjointness", "stokes", "energy_drift_1000", "kernel_equals_relative_betti", "reconstruction_k0"] {
        assert!(names.contains(&n), "{n} missing");
    }
}

#[test]
fn non_manifold_mesh_fails_the_mesh_check() {
    let tmp = tempfile::tempdir().unwrap();
    let mesh = serde_json::json!({
        "vertices": [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.2, 0.2, 1.0], [0.2, 0.2, -1.0], [-0.5, -0.5, 0.7]],
        "tets": [[0, 1, 2, 3], [0, 2, 1, 4], [0, 1, 2, 5]]
    });
    fs::write(tmp.path().join("three_on_a_face.json"), mesh.to_string()).unwrap();
    let scenario = serde_json::json!({
        "mesh": {"generator": "file", "path": "three_on_a_face.json"},
        "material": {"kind": "identity"},
        "gamma": "whole",
        "method": "complete-dirac"
    });
    let sp = tmp.path().join("scenario.json");
    fs::write(&sp, scenario.to_string()).unwrap();
    let out = tmp.path().join("out");
    let (code, _) = bin(&["verify", sp.to_str().unwrap()], &out);
    assert_eq!(code, 1);
    let v = read_json(&out.join("verify_report.json"));
    let mesh_check = &v["checks"][0];
    assert_eq!(mesh_check["name"], "mesh");
    assert_eq!(mesh_check["pass"], Value::Bool(false));
    assert!(mesh_check["detail"].as_str().unwrap().contains("non-manifold"), "{mesh_check}");
}

#[test]
fn coarse_time_step_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario_dir().join("coarse_step.json");
    let (code, _) = bin(&["run", s.to_str().unwrap()], tmp.path());
    assert_eq!(code, 2);
    let e = read_json(&tmp.path().join("errors.json"));
    assert_eq!(e["kind"], "core");
    assert!(e["message"].as_str().unwrap().contains("source bump"), "{e}");
    assert!(!tmp.path().join("betti_report.json").exists());
}

#[test]
fn material_seed_does_not_change_the_kernel() {
    let base = Scenario::load(&scenario_dir().join("single_tet_verify.json")).unwrap();
    let mut dims = Vec::new();
    for seed in [1, 2] {
        let mut s = base.clone();
        s.mesh = dirac_betti::scenario::MeshSpec::SolidTorus { segments: 4 };
        s.material = dirac_betti::scenario::MaterialSpec::Random { seed, cond: 10.0 };
        let tmp = tempfile::tempdir().unwrap();
        let list = verify(&s, tmp.path()).unwrap();
        assert!(list.pass, "seed {seed}: {:?}", list.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        dims.push(list.kernel_dims.unwrap());
    }
    assert_eq!(dims[0], dims[1]);
    assert_eq!(dims[0], [0, 0, 1, 1]);
}

#[test]
fn runs_are_deterministic() {
    let s = Scenario::load(&scenario_dir().join("fixture_torus_physical.json")).unwrap();
    let mut texts = Vec::new();
    for _ in 0..2 {
        let tmp = tempfile::tempdir().unwrap();
        let r = run(&s, &RunOptions { out: tmp.path().to_path_buf(), dump_grids: false }).unwrap();
        assert!(r.pass);
        texts.push(fs::read(tmp.path().join("betti_report.json")).unwrap());
        assert!(tmp.path().join("diagnostics/gram_ladder.csv").exists());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn simulated_dataset_recovers_offline() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario_dir().join("fixture_torus_physical.json");
    let (code, _) = bin(&["simulate", s.to_str().unwrap()], tmp.path());
    assert_eq!(code, 0);
    let mut ds = dirac_boundary::ResponseDataset::load(&tmp.path().join("dataset.json")).unwrap();
    assert_eq!(ds.len(), 4);
    let cfg = Scenario::load(&s).unwrap().recovery_config();
    let r = dirac_recovery::betti_physical(&mut ds, &cfg).unwrap();
    assert_eq!(r.absolute, [Some(1), Some(1), Some(0), Some(0)]);
}

#[test]
fn unknown_scenario_fields_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let sp = tmp.path().join("bad.json");
    fs::write(&sp, r#"{"mesh": {"generator": "single_tet"}, "material": {"kind": "identity"}, "gamma": "whole", "method": "complete-dirac", "colour": 3}"#).unwrap();
    let (code, _) = bin(&["run", sp.to_str().unwrap()], tmp.path());
    assert_eq!(code, 2);
    assert_eq!(read_json(&tmp.path().join("errors.json"))["kind"], "scenario");
}

#[test]
fn extending_in_time_keeps_earlier_records() {
    use dirac_recovery::ResponseSource;
    let s = Scenario::load(&scenario_dir().join("fixture_torus_physical.json")).unwrap();
    let setup = s.setup().unwrap();
    let mut p = dirac_betti::provider::SimulatedResponses::new(setup.system.clone(), setup.kind, setup.tau, setup.grid, setup.bump, s.seed);
    let short = p.dataset(2).unwrap().clone();
    p.extend_to(4.0 * setup.horizons[1]).unwrap();
    assert!(p.grid().end() > short.grid().end());
    let long = p.dataset(2).unwrap();
    assert_eq!(long.len(), 2);
    assert!(!long.grid().same_as(&short.grid()));
    for e in 0..2 {
        for n in 0..short.grid().len {
            let (a, b) = (short.entries[e].record.at(2, n), long.entries[e].record.at(2, n));
            assert_eq!(a, b, "entry {e} step {n}");
        }
    }
}
