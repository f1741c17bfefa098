#![allow(dead_code)]

use moment_asymptotics::action::GroupAction;
use moment_asymptotics::amplitude::{Amplitude, RadialFactor};
use moment_asymptotics::phase::PhasePoint;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn shipped() -> Vec<GroupAction> {
    vec![
        GroupAction::so2().orthonormalized(),
        GroupAction::torus_t2().orthonormalized(),
        GroupAction::so3().orthonormalized(),
    ]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, k: usize, r: f64) -> DVector<f64> {
    DVector::from_fn(k, |_, _| rng.random_range(-r..r))
}

pub fn random_point(action: &GroupAction, rng: &mut ChaCha8Rng) -> PhasePoint {
    PhasePoint {
        x: uniform(rng, action.n(), 1.5),
        xi: uniform(rng, action.n(), 1.5),
        t: uniform(rng, action.d(), 1.5),
    }
}

pub fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(xs)
}

pub fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, rows[0].len(), |i, j| rows[i][j])
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Bump amplitude `a(x, ξ, t)` with the given centres and radii.
pub fn bump(x: &[f64], rx: f64, xi: &[f64], rxi: f64, d: usize, rt: f64) -> Amplitude {
    Amplitude::bump_product(
        RadialFactor::new(x, rx),
        RadialFactor::new(xi, rxi),
        RadialFactor::new(&vec![0.0; d], rt),
    )
}

/// The reference amplitude on the plane: centres (1, 0), radii 0.5, 0.5, 1.
pub fn reference_amplitude() -> Amplitude {
    bump(&[1.0, 0.0], 0.5, &[1.0, 0.0], 0.5, 1, 1.0)
}

/// Plain Gauss–Legendre nodes by Newton iteration on the Legendre recurrence.
pub fn gl(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (mut q0, mut q1) = (1.0, z);
                for k in 2..=n {
                    let q2 = ((2 * k - 1) as f64 * z * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (z * q1 - q0) / (z * z - 1.0);
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dq * dq);
                break;
            }
        }
    }
    (x, w)
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, n: usize) -> f64 {
    let (x, w) = gl(n);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * 0.5 * h * f(lo + 0.5 * h * (xi + 1.0));
        }
    }
    s
}
