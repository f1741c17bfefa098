//! Fourier transform of a radial factor on `R^d`, `b̂(k) = ∫ b(t) e^{i<t,k>} dt`.
//!
//! A radial function has a real, radial transform. For the bump it is the
//! one-dimensional cosine transform of the profile projected onto a line,
//! tabulated on a fine grid and read back by cubic Hermite interpolation.

use serde::{Deserialize, Serialize};

use crate::amplitude::{bump, sphere_area, AmplitudeKind, RadialFactor};
use crate::quadrature::{pairwise_sum, Rule};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FourierError {
    #[error("frequency {k} is beyond the tabulated range {k_max}")]
    OutOfRange { k: f64, k_max: f64 },
}

/// Grid spacing times radius.
const STEP_TIMES_RADIUS: f64 = 0.01;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialFourier {
    kind: AmplitudeKind,
    dim: usize,
    radius: f64,
    k_max: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

/// Nodes and weights of the projected profile on `[0, R]`.
fn projected_profile(dim: usize, radius: f64, rule: &Rule) -> Vec<f64> {
    let inner = Rule::composite(0.0, 1.0, 8, 24);
    rule.nodes
        .iter()
        .map(|&u| {
            let q = u / radius;
            if dim == 1 {
                return bump(q);
            }
            let top = (1.0 - q * q).max(0.0).sqrt();
            let area = sphere_area(dim - 1);
            let f = |s: f64| {
                let v = s * top;
                bump((q * q + v * v).sqrt()) * v.powi(dim as i32 - 2) * top
            };
            area * inner.integrate(f) * radius.powi(dim as i32 - 1)
        })
        .collect()
}

fn profile_rule(radius: f64, k_max: f64) -> Rule {
    let panels = ((k_max * radius / std::f64::consts::PI).ceil() as usize).max(16);
    Rule::composite(0.0, radius, panels, 16)
}

impl RadialFourier {
    /// Transform of `factor` (the centre is ignored) valid for `|k| <= k_max`.
    pub fn new(kind: AmplitudeKind, factor: &RadialFactor, k_max: f64) -> Self {
        let dim = factor.dim();
        let radius = factor.radius;
        if kind == AmplitudeKind::GaussianProduct {
            return RadialFourier {
                kind,
                dim,
                radius,
                k_max: f64::INFINITY,
                step: 0.0,
                values: Vec::new(),
                slopes: Vec::new(),
            };
        }
        let step = STEP_TIMES_RADIUS / radius;
        let count = (k_max / step).ceil() as usize + 2;
        let top = step * (count - 1) as f64;
        let rule = profile_rule(radius, top);
        let prof = projected_profile(dim, radius, &rule);
        let mut values = Vec::with_capacity(count);
        let mut slopes = Vec::with_capacity(count);
        let mut cterms = vec![0.0; rule.len()];
        let mut sterms = vec![0.0; rule.len()];
        for j in 0..count {
            let k = step * j as f64;
            for (i, (&u, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                let (s, c) = (k * u).sin_cos();
                cterms[i] = w * prof[i] * c;
                sterms[i] = -w * prof[i] * u * s;
            }
            values.push(2.0 * pairwise_sum(&cterms));
            slopes.push(2.0 * pairwise_sum(&sterms));
        }
        RadialFourier {
            kind,
            dim,
            radius,
            k_max: top,
            step,
            values,
            slopes,
        }
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    /// `b̂` at a frequency of norm `k`.
    pub fn eval(&self, k: f64) -> Result<f64, FourierError> {
        let k = k.abs();
        match self.kind {
            AmplitudeKind::GaussianProduct => {
                let w = self.radius;
                Ok((2.0 * std::f64::consts::PI).powf(self.dim as f64 / 2.0)
                    * w.powi(self.dim as i32)
                    * (-0.5 * w * w * k * k).exp())
            }
            AmplitudeKind::BumpProduct => {
                if k > self.k_max {
                    return Err(FourierError::OutOfRange { k, k_max: self.k_max });
                }
                let pos = k / self.step;
                let j = (pos.floor() as usize).min(self.values.len() - 2);
                let s = pos - j as f64;
                let h = self.step;
                let (y0, y1) = (self.values[j], self.values[j + 1]);
                let (m0, m1) = (self.slopes[j] * h, self.slopes[j + 1] * h);
                let s2 = s * s;
                let s3 = s2 * s;
                Ok((2.0 * s3 - 3.0 * s2 + 1.0) * y0
                    + (s3 - 2.0 * s2 + s) * m0
                    + (-2.0 * s3 + 3.0 * s2) * y1
                    + (s3 - s2) * m1)
            }
        }
    }

    /// Value at zero frequency, the mass of the factor.
    pub fn at_zero(&self) -> f64 {
        self.eval(0.0).expect("zero is always in range")
    }
}

/// Direct quadrature of the transform at one frequency, without the table.
pub fn radial_fourier_direct(kind: AmplitudeKind, factor: &RadialFactor, k: f64) -> f64 {
    let radius = factor.radius;
    match kind {
        AmplitudeKind::GaussianProduct => RadialFourier::new(kind, factor, 0.0).eval(k).expect("closed form"),
        AmplitudeKind::BumpProduct => {
            let rule = profile_rule(radius, 2.0 * k.abs() + 1.0);
            let prof = projected_profile(factor.dim(), radius, &rule);
            let terms: Vec<f64> = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .zip(&prof)
                .map(|((&u, &w), &p)| w * p * (k * u).cos())
                .collect();
            2.0 * pairwise_sum(&terms)
        }
    }
}
