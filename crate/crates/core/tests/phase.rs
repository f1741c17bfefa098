mod common;

use common::*;
use moment_asymptotics::action::GroupAction;
use moment_asymptotics::phase::{grad_psi, hess_psi, is_critical, moment_map, psi, PhasePoint};
use nalgebra::{DMatrix, DVector};

/// Central difference with step `h`, independent of the library's helpers.
fn fd_grad(f: &dyn Fn(&DVector<f64>) -> f64, z: &DVector<f64>, h: f64) -> DVector<f64> {
    DVector::from_fn(z.len(), |i, _| {
        let mut a = z.clone();
        let mut b = z.clone();
        a[i] += h;
        b[i] -= h;
        (f(&a) - f(&b)) / (2.0 * h)
    })
}

fn flat_psi(a: &GroupAction) -> impl Fn(&DVector<f64>) -> f64 + '_ {
    move |z| psi(a, &PhasePoint::from_flat(z, a.n()))
}

#[test]
fn moment_map_vanishes_at_zero_covector() {
    for a in shipped() {
        let m = moment_map(&a, &v(&vec![0.3; a.n()]), &DVector::zeros(a.n()));
        assert!(m.iter().all(|c| *c == 0.0));
    }
}

#[test]
fn moment_map_of_plane_rotation() {
    // x1 ξ2 - x2 ξ1 at x = (1,0), ξ = (0,1)
    let m = moment_map(&GroupAction::so2(), &v(&[1.0, 0.0]), &v(&[0.0, 1.0]));
    assert_eq!(m[0], 1.0);
}

#[test]
fn moment_map_vanishes_on_diagonal() {
    let mut r = rng(1);
    for a in shipped() {
        let x = uniform(&mut r, a.n(), 2.0);
        assert!(moment_map(&a, &x, &x).norm() < 1e-14);
    }
}

#[test]
fn psi_values() {
    let a = GroupAction::so2();
    assert_eq!(psi(&a, &PhasePoint::new(&[1.0, 0.0], &[0.0, 1.0], &[0.5])), 0.5);
    assert_eq!(psi(&a, &PhasePoint::new(&[1.0, 2.0], &[3.0, 1.0], &[0.0])), 0.0);
    assert!(psi(&a, &PhasePoint::new(&[0.3, -0.7], &[0.3, -0.7], &[2.0])).abs() < 1e-15);
}

#[test]
fn gradient_at_zero_algebra_is_moment_map() {
    let mut r = rng(2);
    for a in shipped() {
        let mut p = random_point(&a, &mut r);
        p.t = DVector::zeros(a.d());
        let g = grad_psi(&a, &p);
        let n = a.n();
        assert!(g.rows(0, 2 * n).iter().all(|c| *c == 0.0));
        assert_eq!(g.rows(2 * n, a.d()).into_owned(), moment_map(&a, &p.x, &p.xi));
    }
}

#[test]
fn plane_rotation_gradient_matches_differences() {
    let a = GroupAction::so2();
    let p = PhasePoint::new(&[1.0, 0.0], &[1.0, 0.0], &[1.0]);
    let g = grad_psi(&a, &p);
    let fd = fd_grad(&flat_psi(&a), &p.to_flat(), 1e-5);
    assert!((&g - &fd).norm() <= 1e-8);
    // ∂_x ψ = Jᵀξ = (0, -1), ∂_ξ ψ = Jx = (0, 1)
    assert_eq!(g.as_slice(), &[0.0, -1.0, 0.0, 1.0, 0.0]);
}

#[test]
fn gradient_vanishes_at_critical_point() {
    let a = GroupAction::so2();
    let g = grad_psi(&a, &PhasePoint::new(&[1.0, 0.0], &[2.0, 0.0], &[0.0]));
    assert_eq!(g.norm(), 0.0);
}

#[test]
fn plane_rotation_hessian_explicit() {
    let a = GroupAction::so2();
    let h = hess_psi(&a, &PhasePoint::new(&[1.0, 0.0], &[1.0, 0.0], &[0.0]));
    // coordinates (x1, x2, ξ1, ξ2, t); ψ = t (x1 ξ2 - x2 ξ1)
    let mut want = DMatrix::zeros(5, 5);
    want[(4, 1)] = -1.0;
    want[(1, 4)] = -1.0;
    want[(4, 3)] = 1.0;
    want[(3, 4)] = 1.0;
    assert_eq!(h, want);
    let mut eig: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().cloned().collect();
    eig.sort_by(f64::total_cmp);
    let s = 2f64.sqrt();
    let expect = [-s, 0.0, 0.0, 0.0, s];
    for (e, w) in eig.iter().zip(expect) {
        assert!((e - w).abs() < 1e-14);
    }
}

#[test]
fn hessian_of_zero_point_is_zero() {
    for a in shipped() {
        let p = PhasePoint::new(&vec![0.0; a.n()], &vec![0.0; a.n()], &vec![0.0; a.d()]);
        assert_eq!(hess_psi(&a, &p).amax(), 0.0);
    }
}

#[test]
fn hessian_is_exactly_symmetric() {
    let mut r = rng(3);
    for a in shipped() {
        let h = hess_psi(&a, &random_point(&a, &mut r));
        assert_eq!(h.transpose(), h);
    }
}

#[test]
fn analytic_derivatives_match_differences() {
    let mut r = rng(4);
    for a in shipped() {
        let f = flat_psi(&a);
        for _ in 0..100 {
            let p = random_point(&a, &mut r);
            let z = p.to_flat();
            let g = grad_psi(&a, &p);
            let fd = fd_grad(&f, &z, 1e-5);
            assert!((&g - &fd).norm() <= 1e-6 * g.norm().max(1.0));
            let h = hess_psi(&a, &p);
            let dim = z.len();
            let fdh = DMatrix::from_fn(dim, dim, |i, j| {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[j] += 1e-5;
                zm[j] -= 1e-5;
                let gp = grad_psi(&a, &PhasePoint::from_flat(&zp, a.n()));
                let gm = grad_psi(&a, &PhasePoint::from_flat(&zm, a.n()));
                (gp[i] - gm[i]) / 2e-5
            });
            assert!((&h - &fdh).norm() <= 1e-6 * h.norm().max(1.0));
        }
    }
}

#[test]
fn criticality_of_zero_level_points() {
    let mut r = rng(5);
    for a in shipped() {
        let x = uniform(&mut r, a.n(), 1.0);
        let p = PhasePoint {
            x: x.clone(),
            xi: &x * 2.0,
            t: DVector::zeros(a.d()),
        };
        assert!(is_critical(&a, &p).critical);
    }
}

#[test]
fn off_zero_level_is_not_critical() {
    let rep = is_critical(&GroupAction::so2(), &PhasePoint::new(&[1.0, 0.0], &[0.0, 1.0], &[1.0]));
    assert!(!rep.critical);
    assert!(!rep.on_zero_level);
}

#[test]
fn so3_axial_point_is_critical() {
    let p = PhasePoint::new(&[0.0, 0.0, 1.0], &[0.0, 0.0, 2.0], &[0.0, 0.0, 0.7]);
    let rep = is_critical(&GroupAction::so3(), &p);
    assert!(rep.critical && rep.on_zero_level && rep.in_isotropy);
}
