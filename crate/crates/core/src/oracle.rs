//! Direct evaluation of `I(μ) = ∫ a(x, ξ, t) e^{iψ/μ} dx dξ dt` by tensor
//! Gauss-Legendre quadrature.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::GroupAction;
use crate::amplitude::{Amplitude, AmplitudeError, AmplitudeKind};
use crate::fourier::{radial_fourier_direct, FourierError, RadialFourier};
use crate::quadrature::{pairwise_sum, pairwise_sum_complex, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// Quadrature over all of `(x, ξ, t)`.
    FullTensor,
    /// The `t`-integral done analytically through the transform of the algebra factor.
    FourierReduced,
}

impl Reduction {
    pub fn label(&self) -> &'static str {
        match self {
            Reduction::FullTensor => "full_tensor",
            Reduction::FourierReduced => "fourier_reduced",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub reduction: Reduction,
    pub min_nodes: usize,
    pub nodes_per_wavelength: f64,
    pub max_nodes: usize,
    /// Allowed disagreement between the two refinement levels, relative to `|I|`.
    pub rel_tol: f64,
    /// Absolute allowance, relative to `∫|a|`.
    pub abs_floor: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            reduction: Reduction::FourierReduced,
            min_nodes: 32,
            nodes_per_wavelength: 8.0,
            max_nodes: 400,
            rel_tol: 1e-4,
            abs_floor: 1e-10,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum OracleError {
    #[error("full tensor quadrature needs 2n + d <= 5, got {0}")]
    TooManyDimensions(usize),
    #[error("the reduced method needs an algebra factor centred at the origin")]
    NotRadial,
    #[error("refinement disagreement {disagreement:.3e} exceeds tolerance {allowed:.3e} at mu = {mu}")]
    Accuracy { mu: f64, disagreement: f64, allowed: f64 },
    #[error("mu must be positive, got {0}")]
    BadMu(f64),
    #[error("semianalytic reference needs a plane rotation action with a radial algebra factor: {0}")]
    NotPlaneRotation(&'static str),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Amplitude(#[from] AmplitudeError),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleValue {
    pub mu: f64,
    pub value: Complex64,
    pub err_estimate: f64,
    pub method: Reduction,
    pub nodes: usize,
}

/// Weighted tensor grid over one block, keeping only nodes where the factor is nonzero.
struct BlockGrid {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl BlockGrid {
    fn new(amp: &Amplitude, which: usize, nodes: usize) -> Self {
        let f = [&amp.x, &amp.xi, &amp.alg][which];
        let dim = f.dim();
        let reach = f.reach(amp.kind);
        let rules: Vec<Rule> = f
            .center
            .iter()
            .map(|&c| {
                if amp.kind == AmplitudeKind::GaussianProduct {
                    Rule::composite(c - reach, c + reach, 4, nodes.div_ceil(4))
                } else {
                    Rule::interval(c - reach, c + reach, nodes)
                }
            })
            .collect();
        let count: usize = rules.iter().map(|r| r.len()).product();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut p = vec![0.0; dim];
        for idx in 0..count {
            let mut rem = idx;
            let mut w = 1.0;
            for k in (0..dim).rev() {
                let r = &rules[k];
                let i = rem % r.len();
                rem /= r.len();
                p[k] = r.nodes[i];
                w *= r.weights[i];
            }
            let v = f.eval(amp.kind, &p);
            if v != 0.0 {
                points.extend_from_slice(&p);
                weights.push(w * v);
            }
        }
        BlockGrid { dim, points, weights }
    }

    fn len(&self) -> usize {
        self.weights.len()
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

/// Evaluator bound to an action, an amplitude and the smallest `μ` of interest.
pub struct Oracle {
    action: GroupAction,
    amplitude: Amplitude,
    config: OracleConfig,
    fourier: Option<RadialFourier>,
    sup_m: f64,
    sup_grad: f64,
    diam: f64,
}

fn op_norm(m: &nalgebra::DMatrix<f64>) -> f64 {
    crate::linalg::singular_values(m).iter().cloned().fold(0.0, f64::max)
}

impl Oracle {
    pub fn new(action: &GroupAction, amplitude: &Amplitude, config: &OracleConfig, mu_min: f64) -> Result<Self, OracleError> {
        amplitude.check(action.n(), action.d())?;
        if !(mu_min > 0.0) {
            return Err(OracleError::BadMu(mu_min));
        }
        let dims = 2 * action.n() + action.d();
        if config.reduction == Reduction::FullTensor && dims > 5 {
            return Err(OracleError::TooManyDimensions(dims));
        }
        let xmax = amplitude.x.center.iter().map(|c| c * c).sum::<f64>().sqrt() + amplitude.x.reach(amplitude.kind);
        let ximax = amplitude.xi.center.iter().map(|c| c * c).sum::<f64>().sqrt() + amplitude.xi.reach(amplitude.kind);
        let gen_norm = action.generators().iter().map(|g| op_norm(g).powi(2)).sum::<f64>().sqrt();
        let sup_m = gen_norm * xmax * ximax;
        let tmax = amplitude.alg.center.iter().map(|c| c * c).sum::<f64>().sqrt() + amplitude.alg.reach(amplitude.kind);
        let sup_grad = gen_norm * tmax * xmax.max(ximax);
        let diam = 2.0 * amplitude.x.reach(amplitude.kind).max(amplitude.xi.reach(amplitude.kind));
        let fourier = if config.reduction == Reduction::FourierReduced {
            if amplitude.alg.center.iter().any(|&c| c != 0.0) {
                return Err(OracleError::NotRadial);
            }
            Some(RadialFourier::new(amplitude.kind, &amplitude.alg, 1.05 * sup_m / mu_min))
        } else {
            None
        };
        Ok(Oracle {
            action: action.clone(),
            amplitude: amplitude.clone(),
            config: config.clone(),
            fourier,
            sup_m,
            sup_grad,
            diam,
        })
    }

    /// Nodes per dimension used at `μ`.
    pub fn nodes_for(&self, mu: f64) -> usize {
        let fmax = self.sup_m.max(self.sup_grad) / mu;
        let wanted = (self.config.nodes_per_wavelength * self.diam * fmax / (2.0 * std::f64::consts::PI)).ceil() as usize;
        wanted.max(self.config.min_nodes).min(self.config.max_nodes)
    }

    /// `I(μ)` at the rule size for `μ`, checked against a rule with two thirds the nodes.
    pub fn eval(&self, mu: f64) -> Result<OracleValue, OracleError> {
        if !(mu > 0.0) {
            return Err(OracleError::BadMu(mu));
        }
        let fine = self.nodes_for(mu);
        let coarse = ((fine as f64) / 1.5).ceil() as usize;
        let (vf, scale) = self.eval_with_nodes(mu, fine)?;
        let (vc, _) = self.eval_with_nodes(mu, coarse)?;
        let disagreement = (vf - vc).norm();
        let allowed = self.config.rel_tol * vf.norm() + self.config.abs_floor * scale;
        if disagreement > allowed {
            return Err(OracleError::Accuracy { mu, disagreement, allowed });
        }
        Ok(OracleValue {
            mu,
            value: vf,
            err_estimate: disagreement,
            method: self.config.reduction,
            nodes: fine,
        })
    }

    /// Value with a fixed node count, plus `∫|a|` as the absolute scale.
    pub fn eval_with_nodes(&self, mu: f64, nodes: usize) -> Result<(Complex64, f64), OracleError> {
        let amp = &self.amplitude;
        let xs = BlockGrid::new(amp, 0, nodes);
        let xis = BlockGrid::new(amp, 1, nodes);
        let n = self.action.n();
        let d = self.action.d();
        let gens: Vec<Vec<f64>> = self
            .action
            .generators()
            .iter()
            .map(|g| g.iter().cloned().collect())
            .collect();
        let orbit = |x: &[f64]| -> Vec<f64> {
            // Row k holds X_k x.
            let mut u = vec![0.0; d * n];
            for k in 0..d {
                let g = &gens[k];
                for i in 0..n {
                    let mut s = 0.0;
                    for j in 0..n {
                        s += g[i + j * n] * x[j];
                    }
                    u[k * n + i] = s;
                }
            }
            u
        };
        let mass = amp.mass();
        match self.config.reduction {
            Reduction::FourierReduced => {
                let table = self.fourier.as_ref().expect("table built for reduced method");
                let partial: Result<Vec<f64>, FourierError> = (0..xs.len())
                    .into_par_iter()
                    .map(|i| {
                        let u = orbit(xs.point(i));
                        let mut acc = 0.0;
                        let mut comp = 0.0;
                        for j in 0..xis.len() {
                            let xi = xis.point(j);
                            let mut k2 = 0.0;
                            for k in 0..d {
                                let mut m = 0.0;
                                for l in 0..n {
                                    m += u[k * n + l] * xi[l];
                                }
                                k2 += m * m;
                            }
                            let term = xis.weights[j] * table.eval(k2.sqrt() / mu)?;
                            let t = acc + term;
                            if acc.abs() >= term.abs() {
                                comp += (acc - t) + term;
                            } else {
                                comp += (term - t) + acc;
                            }
                            acc = t;
                        }
                        Ok(xs.weights[i] * (acc + comp))
                    })
                    .collect();
                Ok((Complex64::new(amp.scale * pairwise_sum(&partial?), 0.0), mass))
            }
            Reduction::FullTensor => {
                let ts = BlockGrid::new(amp, 2, nodes);
                let partial: Vec<Complex64> = (0..xs.len())
                    .into_par_iter()
                    .map(|i| {
                        let u = orbit(xs.point(i));
                        let mut inner = Vec::with_capacity(xis.len());
                        let mut m = vec![0.0; d];
                        for j in 0..xis.len() {
                            let xi = xis.point(j);
                            for k in 0..d {
                                m[k] = (0..n).map(|l| u[k * n + l] * xi[l]).sum::<f64>() / mu;
                            }
                            let mut re = 0.0;
                            let mut im = 0.0;
                            for q in 0..ts.len() {
                                let t = ts.point(q);
                                let ph: f64 = (0..d).map(|k| t[k] * m[k]).sum();
                                let (s, c) = ph.sin_cos();
                                re += ts.weights[q] * c;
                                im += ts.weights[q] * s;
                            }
                            inner.push(Complex64::new(re, im) * xis.weights[j]);
                        }
                        pairwise_sum_complex(&inner) * xs.weights[i]
                    })
                    .collect();
                Ok((pairwise_sum_complex(&partial) * amp.scale, mass))
            }
        }
    }
}

/// One-shot evaluation of `I(μ)`.
pub fn eval_i(action: &GroupAction, amplitude: &Amplitude, mu: f64, config: &OracleConfig) -> Result<OracleValue, OracleError> {
    Oracle::new(action, amplitude, config, mu)?.eval(mu)
}

/// Plane rotation reference: values of `I(μ)` and the small-`μ` slope.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SemiAnalytic {
    pub values: Vec<(f64, Complex64)>,
    /// `lim I(μ)/μ`.
    pub slope: f64,
    /// Level-set function `A(0)` of `ω = x_1 ξ_2 - x_2 ξ_1`.
    pub level_density_at_zero: f64,
}

/// For `X = λJ` on `R^2`, `I(μ) = ∫ A(s) b̂(λ s / μ) ds` where
/// `A(s) = ∫ a_x a_ξ` over the level set `ω = s` in polar coordinates
/// `x = r(cos θ, sin θ)`, `ξ = a x̂ + (s/r) x̂^⊥`.
pub fn eval_i_semianalytic_so2(action: &GroupAction, amplitude: &Amplitude, mus: &[f64], nodes: usize) -> Result<SemiAnalytic, OracleError> {
    if action.n() != 2 || action.d() != 1 {
        return Err(OracleError::NotPlaneRotation("action is not one generator on the plane"));
    }
    let g = &action.generators()[0];
    let lambda = g[(1, 0)];
    if g[(0, 0)].abs() > 1e-14 || g[(1, 1)].abs() > 1e-14 || (g[(0, 1)] + lambda).abs() > 1e-14 || lambda == 0.0 {
        return Err(OracleError::NotPlaneRotation("generator is not a multiple of a rotation"));
    }
    if amplitude.alg.center[0] != 0.0 {
        return Err(OracleError::NotPlaneRotation("algebra factor is not centred at zero"));
    }
    amplitude.check(2, 1)?;
    if let Some(&bad) = mus.iter().find(|&&m| !(m > 0.0)) {
        return Err(OracleError::BadMu(bad));
    }
    let ax = &amplitude.x;
    let axi = &amplitude.xi;
    let x0 = DVector::from_column_slice(&ax.center);
    let xi0 = DVector::from_column_slice(&axi.center);
    let kind = amplitude.kind;
    // gaussian factors are cut at their reach
    let (rx, rxi) = (ax.reach(kind), axi.reach(kind));
    let xn = x0.norm();
    let theta0 = x0[1].atan2(x0[0]);
    let (tlo, thi) = if xn > rx {
        let half = (rx / xn).asin();
        (theta0 - half, theta0 + half)
    } else {
        (-std::f64::consts::PI, std::f64::consts::PI)
    };
    let panels = nodes.div_ceil(16).max(1);
    let theta_rule = Rule::composite(tlo, thi, panels, 16);
    let unit = Rule::composite(-1.0, 1.0, panels, 16);

    let density = |s: f64| -> f64 {
        let per_theta: Vec<f64> = theta_rule
            .nodes
            .iter()
            .zip(&theta_rule.weights)
            .map(|(&th, &wth)| {
                let (sn, cs) = th.sin_cos();
                let r0 = x0[0] * cs + x0[1] * sn;
                let h2 = xn * xn - r0 * r0;
                if h2 >= rx * rx {
                    return 0.0;
                }
                let half = (rx * rx - h2).sqrt();
                let (rlo, rhi) = ((r0 - half).max(0.0), r0 + half);
                if rhi <= rlo {
                    return 0.0;
                }
                let a0 = xi0[0] * cs + xi0[1] * sn;
                let b0 = -xi0[0] * sn + xi0[1] * cs;
                let mut acc = Vec::with_capacity(unit.len());
                for (&u, &wu) in unit.nodes.iter().zip(&unit.weights) {
                    let r = 0.5 * (rlo + rhi) + 0.5 * (rhi - rlo) * u;
                    let wr = 0.5 * (rhi - rlo) * wu;
                    if r <= 0.0 {
                        continue;
                    }
                    let b = s / r;
                    let db = b - b0;
                    if db.abs() >= rxi {
                        continue;
                    }
                    let ax_val = ax.eval(kind, &[r * cs, r * sn]);
                    let chord = (rxi * rxi - db * db).sqrt();
                    let mut inner = 0.0;
                    for (&v, &wv) in unit.nodes.iter().zip(&unit.weights) {
                        let a = a0 + chord * v;
                        let xi = [a * cs - b * sn, a * sn + b * cs];
                        inner += wv * chord * axi.eval(kind, &xi);
                    }
                    acc.push(wr * ax_val * inner);
                }
                wth * pairwise_sum(&acc)
            })
            .collect();
        pairwise_sum(&per_theta)
    };

    let smax = (xn + rx) * (xi0.norm() + rxi);
    let mu_min = mus.iter().cloned().fold(f64::INFINITY, f64::min);
    let wavelengths = 2.0 * smax * lambda.abs() * amplitude.alg.reach(kind) / (2.0 * std::f64::consts::PI * mu_min.min(1.0));
    let s_panels = ((wavelengths.ceil() as usize) * 2).max(panels * 2);
    let s_rule = Rule::composite(-smax, smax, s_panels, 16);
    let dens: Vec<f64> = s_rule.nodes.par_iter().map(|&s| density(s)).collect();
    let b0 = amplitude.alg.eval(kind, &[0.0]);
    let a_zero = density(0.0);
    let values = mus
        .iter()
        .map(|&mu| {
            let terms: Vec<f64> = s_rule
                .nodes
                .iter()
                .zip(&s_rule.weights)
                .zip(&dens)
                .map(|((&s, &w), &a)| {
                    if a == 0.0 {
                        0.0
                    } else {
                        w * a * radial_fourier_direct(kind, &amplitude.alg, lambda * s / mu)
                    }
                })
                .collect();
            (mu, Complex64::new(amplitude.scale * pairwise_sum(&terms), 0.0))
        })
        .collect();
    Ok(SemiAnalytic {
        values,
        slope: amplitude.scale * 2.0 * std::f64::consts::PI * b0 * a_zero / lambda.abs(),
        level_density_at_zero: amplitude.scale * a_zero,
    })
}
