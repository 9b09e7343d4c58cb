use dirac_boundary::*;

fn patch() -> BoundaryPatch {
    let mut d0 = SignedIncidence::new(3, 3);
    for (e, (a, b)) in [(0u32, 1u32), (0, 2), (1, 2)].iter().enumerate() {
        d0.entries.push((e as u32, *a, -1));
        d0.entries.push((e as u32, *b, 1));
    }
    let mut d1 = SignedIncidence::new(1, 3);
    d1.entries = vec![(0, 0, 1), (0, 1, -1), (0, 2, 1)];
    BoundaryPatch {
        simplices: [vec![vec![0], vec![1], vec![2]], vec![vec![0, 1], vec![0, 2], vec![1, 2]], vec![vec![0, 1, 2]]],
        admissible: [vec![false; 3], vec![false; 3], vec![true]],
        coboundary: [d0, d1],
        surface: SurfaceCounts { vertices: 4, edges: 6, faces: 4 },
        patch_faces: 1,
    }
}

fn dataset() -> ResponseDataset {
    let grid = TimeGrid::spanning(-1.0, 1.0, 0.125);
    let header = DatasetHeader {
        fingerprint: "abc".into(),
        kind: SystemKind::Complete,
        grid,
        source_window: 1.0,
        integrator: "test".into(),
        sizes: [3, 3, 1],
        record_degrees: [true, true, true],
    };
    let mut ds = ResponseDataset::new(header, patch()).unwrap();
    let bump = Bump { lo: -0.9, hi: -0.1 };
    let mut src = BoundarySource::zero(grid, [3, 3, 1]);
    src.bump = Some(bump);
    src.push(2, vec![0.7], TimeProfile::sample(&grid, |t| (bump.value(t), bump.rate(t))));
    let mut rec = BoundaryRecord::zeros(grid, [3, 3, 1], [true; 3]);
    for (i, x) in rec.traces[1].iter_mut().enumerate() {
        *x = (i as f64).sin();
    }
    ds.push(ResponseEntry { label: "s0".into(), source: src, record: rec }).unwrap();
    ds
}

#[test]
fn save_load_round_trip() {
    let ds = dataset();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.bin");
    ds.save(&path).unwrap();
    let back = ResponseDataset::load(&path).unwrap();
    assert_eq!(back, ds);
}

#[test]
fn truncated_file_is_rejected() {
    let ds = dataset();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.bin");
    ds.save(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(ResponseDataset::load(&path), Err(BoundaryError::Format(_))));
}

#[test]
fn off_patch_source_is_rejected() {
    let mut ds = dataset();
    let mut e = ds.entries[0].clone();
    let grid = ds.grid();
    let bump = Bump { lo: -0.9, hi: -0.1 };
    e.source.push(1, vec![1.0, 0.0, 0.0], TimeProfile::sample(&grid, |t| (bump.value(t), bump.rate(t))));
    assert!(ds.push(e).is_err());
}

#[test]
fn late_source_is_rejected() {
    let mut ds = dataset();
    let mut e = ds.entries[0].clone();
    let grid = ds.grid();
    let late = Bump { lo: -0.2, hi: 0.5 };
    e.source.terms[0].profile = TimeProfile::sample(&grid, |t| (late.value(t), late.rate(t)));
    assert!(ds.push(e).is_err());
}
