use dirac_core::dirac::{assemble_dirac, DEFAULT_KERNEL_TOL};
use dirac_core::forms::MaterialField;
use dirac_core::homology::{betti, hodge_kernel_check, HomologyMode};
use dirac_core::mesh::*;
use proptest::prelude::*;

#[test]
fn kernel_dimensions_equal_relative_betti_numbers() {
    let meshes = [
        ("ball", build_ball(1).unwrap(), [0, 0, 0, 1]),
        ("solid_torus", build_solid_torus(4).unwrap(), [0, 0, 1, 1]),
        ("box1", build_tunneled_box(1, 1).unwrap(), [0, 0, 1, 1]),
        ("box2", build_tunneled_box(2, 1).unwrap(), [0, 0, 2, 1]),
    ];
    for (name, c, want) in meshes {
        assert_eq!(betti(&c, HomologyMode::Relative), want, "{name}");
        for seed in [1, 2, 3] {
            let sys = assemble_dirac(&c, &MaterialField::random(c.tets().len(), seed, 10.0)).unwrap();
            assert_eq!(sys.harmonic_dims(DEFAULT_KERNEL_TOL).unwrap(), want, "{name} seed {seed}");
            assert_eq!(hodge_kernel_check(&sys).unwrap(), want, "{name} seed {seed}");
        }
    }
}

#[test]
fn refinement_keeps_the_betti_vector() {
    for c in [build_solid_torus(3).unwrap(), build_tunneled_box(1, 1).unwrap()] {
        let r = refine(&c).unwrap();
        for mode in [HomologyMode::Absolute, HomologyMode::Relative] {
            assert_eq!(betti(&c, mode), betti(&r, mode));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn kernel_is_material_independent(seed in 0u64..10_000, cond in 1.5f64..10.0) {
        let c = build_solid_torus(4).unwrap();
        let sys = assemble_dirac(&c, &MaterialField::random(c.tets().len(), seed, cond)).unwrap();
        prop_assert_eq!(sys.harmonic_dims(DEFAULT_KERNEL_TOL).unwrap(), betti(&c, HomologyMode::Relative));
    }
}
