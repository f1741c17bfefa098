mod common;

use common::*;
use moment_asymptotics::action::{ActionError, ActionSpec, GroupAction, StratumSignature, Violation};
use moment_asymptotics::linalg::numerical_rank;
use nalgebra::DMatrix;

#[test]
fn rotation_generator_is_valid() {
    let r = GroupAction::so2().validate();
    assert!(r.is_valid());
    assert_eq!(r.skew_residual, 0.0);
}

#[test]
fn symmetric_generator_fails_skewness() {
    let a = GroupAction::new("sym", 2, vec![mat(&[&[0.0, 1.0], &[1.0, 0.0]])]).unwrap();
    let r = a.validate();
    assert!(!r.is_valid());
    assert!(r.violations.iter().any(|v| matches!(v, Violation::NotSkew { index: 0, .. })));
    assert!(matches!(a.checked(), Err(ActionError::Invalid(_))));
}

#[test]
fn so3_brackets_close_with_zero_residual() {
    // [L_x, L_y] = L_z and cyclic, expanded entry by entry
    let g = GroupAction::so3();
    let x = g.generators();
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let c = &x[i] * &x[j] - &x[j] * &x[i];
        assert_eq!(c, x[k]);
    }
    let r = g.validate();
    assert!(r.is_valid());
    assert!(r.bracket_residual <= 1e-14, "{}", r.bracket_residual);
}

#[test]
fn non_closed_pair_is_reported() {
    // two rotations of R^3 without their bracket
    let a = GroupAction::new("pair", 3, GroupAction::so3().generators()[..2].to_vec()).unwrap();
    let r = a.validate();
    assert!(r.violations.iter().any(|v| matches!(v, Violation::NotClosed { .. })));
}

#[test]
fn dependent_generators_are_reported() {
    let j = GroupAction::so2().generators()[0].clone();
    let a = GroupAction::new("dup", 2, vec![j.clone(), &j * 2.0]).unwrap();
    assert!(a.validate().violations.iter().any(|v| matches!(v, Violation::Dependent { .. })));
}

#[test]
fn shape_mismatch_is_structural() {
    let err = GroupAction::new("bad", 2, vec![DMatrix::zeros(3, 3)]).unwrap_err();
    assert!(matches!(err, ActionError::Shape { .. }));
    let spec = ActionSpec {
        name: "x".into(),
        n: 2,
        d: 2,
        generators: vec![vec![vec![0.0, -1.0], vec![1.0, 0.0]]],
    };
    assert!(matches!(GroupAction::from_spec(&spec), Err(ActionError::Declared { .. })));
}

#[test]
fn isotropy_at_origin_is_full_algebra() {
    for a in shipped() {
        assert_eq!(a.isotropy_algebra(&nalgebra::DVector::zeros(a.n())).dim(), a.d());
        let z = nalgebra::DVector::zeros(a.n());
        assert_eq!(a.isotropy_algebra_pair(&z, &z).dim(), a.d());
    }
}

#[test]
fn plane_rotation_isotropy_is_trivial_off_origin() {
    let a = GroupAction::so2();
    assert_eq!(a.isotropy_algebra(&v(&[1.0, 0.0])).dim(), 0);
    assert_eq!(a.isotropy_algebra_pair(&v(&[1.0, 0.0]), &v(&[2.0, 0.0])).dim(), 0);
}

#[test]
fn so3_isotropy_of_pole_is_z_rotation() {
    // X_i (0,0,1): L_x e3 = -e2, L_y e3 = e1, L_z e3 = 0, so the kernel is e_z
    let a = GroupAction::so3();
    let iso = a.isotropy_algebra(&v(&[0.0, 0.0, 1.0]));
    assert_eq!(iso.dim(), 1);
    let b = &iso.basis[0];
    assert!(b[0].abs() < 1e-12 && b[1].abs() < 1e-12 && (b[2].abs() - 1.0).abs() < 1e-12);
}

#[test]
fn torus_pair_isotropy_is_second_circle() {
    let a = GroupAction::torus_t2();
    let iso = a.isotropy_algebra_pair(&v(&[1.0, 0.0, 0.0, 0.0]), &v(&[0.0; 4]));
    assert_eq!(iso.dim(), 1);
    assert!(iso.basis[0][0].abs() < 1e-12 && (iso.basis[0][1].abs() - 1.0).abs() < 1e-12);
}

#[test]
fn principal_orbit_dimensions() {
    assert_eq!(GroupAction::so2().principal_orbit_dimension(50, 1), 1);
    assert_eq!(GroupAction::so3().principal_orbit_dimension(50, 1), 2);
    assert_eq!(GroupAction::torus_t2().principal_orbit_dimension(50, 1), 2);
}

fn isotropy_dims(a: &GroupAction) -> Vec<StratumSignature> {
    a.stratify_sample(&a.probe_points(40, 3)).iter().map(|s| s.signature).collect()
}

#[test]
fn plane_rotation_has_two_strata() {
    let sigs = isotropy_dims(&GroupAction::so2());
    let dims: Vec<usize> = sigs.iter().map(|s| s.isotropy_dim).collect();
    assert_eq!(dims, vec![1, 0]);
}

#[test]
fn so3_strata_are_origin_and_generic() {
    let sigs = isotropy_dims(&GroupAction::so3());
    let dims: Vec<usize> = sigs.iter().map(|s| s.isotropy_dim).collect();
    assert_eq!(dims, vec![3, 1]);
}

#[test]
fn torus_strata_by_sampling_coordinate_planes() {
    // the two circle strata share the signature (1, 2); they are told apart by
    // which coordinate plane carries the fixed space
    let a = GroupAction::torus_t2();
    let sigs = isotropy_dims(&a);
    let dims: Vec<usize> = sigs.iter().map(|s| s.isotropy_dim).collect();
    assert_eq!(dims, vec![2, 1, 0]);
    assert_eq!(sigs[1].fixed_subspace_dim, 2);
    let p = v(&[1.0, 0.0, 0.0, 0.0]);
    let q = v(&[0.0, 0.0, 1.0, 0.0]);
    let fp = a.fixed_subspace(&a.isotropy_algebra(&p).basis);
    let fq = a.fixed_subspace(&a.isotropy_algebra(&q).basis);
    let first_plane = |f: &Vec<nalgebra::DVector<f64>>| f.iter().map(|b| b[0] * b[0] + b[1] * b[1]).sum::<f64>();
    assert!((first_plane(&fp) - 2.0).abs() < 1e-12);
    assert!(first_plane(&fq).abs() < 1e-12);
}

#[test]
fn isotropy_basis_annihilates_point() {
    let mut r = rng(11);
    for a in shipped() {
        for _ in 0..50 {
            let x = uniform(&mut r, a.n(), 1.0);
            let xi = uniform(&mut r, a.n(), 1.0);
            let gx = a.isotropy_algebra(&x);
            for y in &gx.basis {
                assert!((a.element(y.as_slice()) * &x).norm() <= 1e-10);
            }
            assert_eq!(a.d() - gx.dim(), numerical_rank(&a.orbit_matrix(&x)));
            let pair = a.isotropy_algebra_pair(&x, &xi).dim();
            assert!(pair <= gx.dim().min(a.isotropy_algebra(&xi).dim()));
        }
    }
}

#[test]
fn kappa_does_not_depend_on_seed() {
    for a in shipped() {
        assert_eq!(a.principal_orbit_dimension(100, 1), a.principal_orbit_dimension(100, 2));
    }
}

#[test]
fn orthonormalized_basis_is_trace_orthonormal() {
    for a in shipped() {
        let g = a.gram();
        assert!((g - DMatrix::identity(a.d(), a.d())).amax() < 1e-14);
    }
}
