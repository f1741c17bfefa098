mod common;

use common::*;
use moment_asymptotics::action::GroupAction;
use moment_asymptotics::amplitude::{bump as profile, Amplitude, AmplitudeKind, RadialFactor};
use moment_asymptotics::critical::{integrate_l0, SurfaceConfig, SurfaceMethod};
use moment_asymptotics::fourier::{radial_fourier_direct, RadialFourier};
use moment_asymptotics::oracle::{eval_i, eval_i_semianalytic_so2, Oracle, OracleConfig, OracleError, Reduction};
use std::f64::consts::PI;

fn so2() -> GroupAction {
    GroupAction::so2().orthonormalized()
}

fn full_tensor(min_nodes: usize) -> OracleConfig {
    OracleConfig {
        reduction: Reduction::FullTensor,
        min_nodes,
        ..OracleConfig::default()
    }
}

fn reduced(min_nodes: usize) -> OracleConfig {
    OracleConfig {
        min_nodes,
        ..OracleConfig::default()
    }
}

#[test]
fn amplitude_is_exactly_zero_outside_support() {
    let a = reference_amplitude();
    assert_eq!(a.eval(&[1.5, 0.0], &[1.0, 0.0], &[0.0]), 0.0);
    assert_eq!(a.eval(&[1.0, 0.0], &[1.0, 0.0], &[1.0]), 0.0);
    assert_eq!(a.eval(&[0.0, 0.0], &[1.0, 0.0], &[0.0]), 0.0);
}

#[test]
fn amplitude_values_at_centre_and_midpoint() {
    let mut a = reference_amplitude();
    a.scale = 3.0;
    assert_eq!(a.eval(&[1.0, 0.0], &[1.0, 0.0], &[0.0]), 3.0);
    let mid = a.eval(&[1.25, 0.0], &[1.0, 0.0], &[0.0]);
    assert!((mid - 3.0 * (1.0f64 - 1.0 / 0.75).exp()).abs() < 1e-15);
}

#[test]
fn zero_frequency_is_algebra_mass() {
    let f = RadialFactor::new(&[0.0], 1.0);
    let t = RadialFourier::new(AmplitudeKind::BumpProduct, &f, 10.0);
    let mass = integrate(|u| profile(u.abs()), -1.0, 1.0, 16, 20);
    assert!(rel_err(t.at_zero(), mass) < 1e-12);
}

#[test]
fn gaussian_transform_matches_fourier_pair_and_quadrature() {
    let w = 0.3;
    let f = RadialFactor::new(&[0.0], w);
    let t = RadialFourier::new(AmplitudeKind::GaussianProduct, &f, 0.0);
    for k in [0.0, 1.0, 4.0, 9.0] {
        let pair = (2.0 * PI).sqrt() * w * (-0.5 * w * w * k * k).exp();
        let quad = integrate(|u| (-(u * u) / (2.0 * w * w)).exp() * (k * u).cos(), -12.0 * w, 12.0 * w, 64, 20);
        assert!((t.eval(k).unwrap() - pair).abs() < 1e-10);
        assert!((quad - pair).abs() < 1e-10);
    }
}

#[test]
fn bump_table_matches_direct_quadrature() {
    let f = RadialFactor::new(&[0.0], 1.0);
    let t = RadialFourier::new(AmplitudeKind::BumpProduct, &f, 80.0);
    for k in [0.37, 3.1, 11.3, 27.9, 64.2] {
        let quad = integrate(|u| profile(u.abs()) * (k * u).cos(), -1.0, 1.0, 128, 20);
        assert!((t.eval(k).unwrap() - quad).abs() < 1e-8, "k = {k}");
        assert!((radial_fourier_direct(AmplitudeKind::BumpProduct, &f, k) - quad).abs() < 1e-8);
    }
}

#[test]
fn planar_bump_table_matches_direct_quadrature() {
    // the 2-D transform along the first axis
    let r = 0.8;
    let f = RadialFactor::new(&[0.0, 0.0], r);
    let t = RadialFourier::new(AmplitudeKind::BumpProduct, &f, 40.0);
    for k in [0.5, 6.0, 17.0, 33.0] {
        let quad = integrate(
            |a| integrate(|b| profile((a * a + b * b).sqrt() / r), -r, r, 16, 20) * (k * a).cos(),
            -r,
            r,
            64,
            20,
        );
        assert!((t.eval(k).unwrap() - quad).abs() < 1e-8, "k = {k}");
    }
}

#[test]
fn table_refuses_frequencies_beyond_range() {
    let t = RadialFourier::new(AmplitudeKind::BumpProduct, &RadialFactor::new(&[0.0], 1.0), 5.0);
    assert!(t.eval(t.k_max() * 1.01).is_err());
}

#[test]
fn zero_amplitude_gives_zero() {
    let mut a = reference_amplitude();
    a.scale = 0.0;
    assert_eq!(eval_i(&so2(), &a, 0.1, &OracleConfig::default()).unwrap().value.norm(), 0.0);
}

#[test]
fn reduced_and_full_tensor_agree() {
    for mu in [0.3, 0.1] {
        let r = eval_i(&so2(), &reference_amplitude(), mu, &reduced(48)).unwrap().value;
        let f = eval_i(&so2(), &reference_amplitude(), mu, &full_tensor(48)).unwrap().value;
        assert!((r - f).norm() <= 1e-6 * r.norm(), "μ = {mu}: {r} vs {f}");
    }
}

#[test]
fn full_tensor_refuses_large_dimension() {
    let a = GroupAction::so3().orthonormalized();
    let amp = bump(&[1.0, 0.0, 0.0], 0.5, &[1.0, 0.0, 0.0], 0.5, 3, 1.0);
    assert!(matches!(Oracle::new(&a, &amp, &full_tensor(32), 0.1), Err(OracleError::TooManyDimensions(9))));
}

#[test]
fn halving_mu_halves_the_integral() {
    let o = Oracle::new(&so2(), &reference_amplitude(), &OracleConfig::default(), 0.025).unwrap();
    for mu in [0.04, 0.05] {
        let ratio = o.eval(mu / 2.0).unwrap().value.norm() / o.eval(mu).unwrap().value.norm();
        assert!((ratio - 0.5).abs() <= 0.15 * 0.5, "ratio {ratio} at μ = {mu}");
    }
}

#[test]
fn integral_is_linear_in_the_amplitude() {
    let mut a = reference_amplitude();
    a.scale = 0.7;
    let mut b = reference_amplitude();
    b.scale = 1.9;
    let mut sum = reference_amplitude();
    sum.scale = 2.6;
    let cfg = OracleConfig::default();
    let ia = eval_i(&so2(), &a, 0.1, &cfg).unwrap().value;
    let ib = eval_i(&so2(), &b, 0.1, &cfg).unwrap().value;
    let is = eval_i(&so2(), &sum, 0.1, &cfg).unwrap().value;
    assert!((ia + ib - is).norm() <= 1e-12 * is.norm());
}

#[test]
fn covector_reflection_conjugates() {
    // the algebra bump is off-centre so that I has an imaginary part
    let a = Amplitude::bump_product(
        RadialFactor::new(&[1.0, 0.0], 0.5),
        RadialFactor::new(&[0.8, 0.3], 0.5),
        RadialFactor::new(&[0.4], 1.0),
    );
    let mut r = a.clone();
    r.xi.center = vec![-0.8, -0.3];
    let cfg = full_tensor(32);
    let i = eval_i(&so2(), &a, 0.2, &cfg).unwrap().value;
    let j = eval_i(&so2(), &r, 0.2, &cfg).unwrap().value;
    assert!(i.im.abs() > 1e-3 * i.norm());
    assert!((i.conj() - j).norm() <= 1e-12 * i.norm(), "{i} vs {j}");
}

#[test]
fn refinement_error_decreases_with_nodes() {
    let o = Oracle::new(&so2(), &reference_amplitude(), &OracleConfig::default(), 0.1).unwrap();
    let errs: Vec<f64> = [24usize, 32, 40, 48]
        .iter()
        .map(|&n| {
            let fine = o.eval_with_nodes(0.1, n).unwrap().0;
            let coarse = o.eval_with_nodes(0.1, ((n as f64) / 1.5).ceil() as usize).unwrap().0;
            (fine - coarse).norm()
        })
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] < w[0], "{errs:?}");
    }
}

fn gaussian_narrow() -> Amplitude {
    Amplitude {
        kind: AmplitudeKind::GaussianProduct,
        x: RadialFactor::new(&[1.0, 0.0], 0.1),
        xi: RadialFactor::new(&[1.0, 0.0], 0.1),
        alg: RadialFactor::new(&[0.0], 0.3),
        scale: 1.0,
    }
}

#[test]
fn semianalytic_reproduces_gaussian_integral() {
    let a = gaussian_narrow();
    let tensor = eval_i(&so2(), &a, 0.1, &OracleConfig::default()).unwrap().value;
    let semi = eval_i_semianalytic_so2(&so2(), &a, &[0.1], 64).unwrap().values[0].1;
    assert!((semi - tensor).norm() <= 1e-5 * tensor.norm(), "{semi} vs {tensor}");
}

#[test]
fn coarea_slope_matches_surface_integral() {
    let semi = eval_i_semianalytic_so2(&so2(), &reference_amplitude(), &[], 64).unwrap();
    let cfg = SurfaceConfig {
        method: SurfaceMethod::ChartGrid,
        ..SurfaceConfig::default()
    };
    let l0 = integrate_l0(&so2(), &reference_amplitude(), &cfg, 1).unwrap().l0;
    assert!(rel_err(semi.slope, 2.0 * PI * l0) <= 0.02);
}

#[test]
fn semianalytic_rejects_other_actions() {
    let a = GroupAction::so3();
    let amp = bump(&[1.0, 0.0, 0.0], 0.5, &[1.0, 0.0, 0.0], 0.5, 3, 1.0);
    assert!(matches!(eval_i_semianalytic_so2(&a, &amp, &[0.1], 32), Err(OracleError::NotPlaneRotation(_))));
}

#[test]
fn amplitude_off_zero_level_is_negligible() {
    // on the support x1 ξ2 - x2 ξ1 ≥ 1.2·1.7 - 0.3·0.3 > 0.5
    let a = bump(&[1.5, 0.0], 0.3, &[0.0, 2.0], 0.3, 1, 4.0);
    let i = eval_i(&so2(), &a, 0.05, &OracleConfig::default()).unwrap();
    assert!(i.value.norm() <= 1e-8 * a.mass(), "{} vs mass {}", i.value.norm(), a.mass());
    let semi = eval_i_semianalytic_so2(&so2(), &a, &[0.05], 64).unwrap().values[0].1;
    assert!(semi.norm() <= 1e-8 * a.mass());
}
