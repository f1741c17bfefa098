//! Separable test amplitudes `a(x, ξ, t) = s · a_x(x) a_ξ(ξ) a_t(t)`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::quadrature::Rule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeKind {
    /// Compactly supported bumps `ρ(|v - c| / R)`, `ρ(r) = exp(1 - 1/(1 - r²))`.
    BumpProduct,
    /// Gaussians `exp(-|v - c|² / (2 w²))`, `radius` holding the width `w`.
    GaussianProduct,
}

/// One radial factor: a centre and a radius (or width).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialFactor {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    pub kind: AmplitudeKind,
    pub x: RadialFactor,
    pub xi: RadialFactor,
    pub alg: RadialFactor,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AmplitudeError {
    #[error("{block} centre has length {found}, expected {expected}")]
    Dimension {
        block: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("{block} radius must be positive")]
    Radius { block: &'static str },
}

/// Bump profile on `[0, 1)`, zero outside; equals 1 at the origin.
pub fn bump(r: f64) -> f64 {
    let r2 = r * r;
    if r2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r2)).exp()
    }
}

impl RadialFactor {
    pub fn new(center: &[f64], radius: f64) -> Self {
        RadialFactor {
            center: center.to_vec(),
            radius,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn dist(&self, v: &[f64]) -> f64 {
        self.center
            .iter()
            .zip(v)
            .map(|(c, x)| (x - c) * (x - c))
            .sum::<f64>()
            .sqrt()
    }

    pub fn eval(&self, kind: AmplitudeKind, v: &[f64]) -> f64 {
        let r = self.dist(v) / self.radius;
        match kind {
            AmplitudeKind::BumpProduct => bump(r),
            AmplitudeKind::GaussianProduct => (-0.5 * r * r).exp(),
        }
    }

    /// Half-width of the box treated as the support.
    pub fn reach(&self, kind: AmplitudeKind) -> f64 {
        match kind {
            AmplitudeKind::BumpProduct => self.radius,
            AmplitudeKind::GaussianProduct => 8.0 * self.radius,
        }
    }

    /// Integral of the factor over `R^k`.
    pub fn mass(&self, kind: AmplitudeKind) -> f64 {
        let k = self.dim();
        let sphere = sphere_area(k);
        let radial = match kind {
            AmplitudeKind::BumpProduct => Rule::composite(0.0, 1.0, 8, 24).integrate(|r| bump(r) * r.powi(k as i32 - 1)),
            AmplitudeKind::GaussianProduct => {
                return (2.0 * std::f64::consts::PI).powf(k as f64 / 2.0) * self.radius.powi(k as i32)
            }
        };
        sphere * radial * self.radius.powi(k as i32)
    }
}

/// Area of the unit sphere `S^{k-1}` in `R^k` (`2` for `k = 1`).
pub fn sphere_area(k: usize) -> f64 {
    let kf = k as f64;
    2.0 * std::f64::consts::PI.powf(kf / 2.0) / gamma_half_integer(kf / 2.0)
}

/// `Γ(s)` for `s` a positive multiple of one half.
fn gamma_half_integer(s: f64) -> f64 {
    let mut v = if (s.fract() - 0.5).abs() < 1e-12 {
        std::f64::consts::PI.sqrt()
    } else {
        1.0
    };
    let mut a = if (s.fract() - 0.5).abs() < 1e-12 { 0.5 } else { 1.0 };
    while a < s - 1e-12 {
        v *= a;
        a += 1.0;
    }
    v
}

impl Amplitude {
    pub fn bump_product(x: RadialFactor, xi: RadialFactor, alg: RadialFactor) -> Self {
        Amplitude {
            kind: AmplitudeKind::BumpProduct,
            x,
            xi,
            alg,
            scale: 1.0,
        }
    }

    /// Check block sizes against an action with `n` and `d`.
    pub fn check(&self, n: usize, d: usize) -> Result<(), AmplitudeError> {
        for (block, f, expected) in [("x", &self.x, n), ("xi", &self.xi, n), ("alg", &self.alg, d)] {
            if f.dim() != expected {
                return Err(AmplitudeError::Dimension {
                    block,
                    found: f.dim(),
                    expected,
                });
            }
            if !(f.radius > 0.0) {
                return Err(AmplitudeError::Radius { block });
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], xi: &[f64], t: &[f64]) -> f64 {
        self.scale * self.x.eval(self.kind, x) * self.xi.eval(self.kind, xi) * self.alg.eval(self.kind, t)
    }

    pub fn eval_vec(&self, x: &DVector<f64>, xi: &DVector<f64>, t: &DVector<f64>) -> f64 {
        self.eval(x.as_slice(), xi.as_slice(), t.as_slice())
    }

    /// `∫ |a|`.
    pub fn mass(&self) -> f64 {
        self.scale.abs() * self.x.mass(self.kind) * self.xi.mass(self.kind) * self.alg.mass(self.kind)
    }

    /// Per-coordinate bounds `(lo, hi)` of the support box in `(x, ξ, t)` order.
    pub fn support_box(&self) -> Vec<(f64, f64)> {
        let mut b = Vec::new();
        for f in [&self.x, &self.xi, &self.alg] {
            let r = f.reach(self.kind);
            b.extend(f.center.iter().map(|&c| (c - r, c + r)));
        }
        b
    }
}
