//! α-charts of the second blow-up: the distinguished projective coordinate is
//! an algebra direction, and the weak transform has no critical points.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certify::point_rng;
use super::chart::sinc;
use super::tree::IsotropyBranch;
use super::ResolutionError;
use crate::amplitude::{bump, AmplitudeKind, RadialFactor};
use crate::fit::fit_exponent;
use crate::fourier::RadialFourier;
use crate::quadrature::{pairwise_sum, Rule};

/// A point of the α-chart at level two. The algebra coordinate of level two
/// is `e_ρ + α'`, and the normal fibre coordinate is `θ ∈ R^{c²}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaChartPoint {
    pub tau: [f64; 2],
    pub s: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub alpha1: Vec<f64>,
    pub alpha_rest: Vec<f64>,
    pub beta: Vec<f64>,
    pub xi: DVector<f64>,
}

fn applicable(branch: &IsotropyBranch) -> Result<(), ResolutionError> {
    if branch.depth() != 2 || branch.levels[1].a_frame.is_empty() {
        return Err(ResolutionError::NotApplicable(format!("{} has no α-chart", branch.label())));
    }
    Ok(())
}

impl IsotropyBranch {
    /// Coefficients of the level-two algebra element `e_ρ + α'`.
    fn alpha_direction(&self, rest: &[f64]) -> Vec<f64> {
        let mut a = vec![1.0];
        a.extend_from_slice(rest);
        a
    }

    /// `θV` and the point `y = cos(τ₂|θ|)p² + sin(τ₂|θ|)θ̂V`, plus `sinc(τ₂|θ|)`.
    fn alpha_y(&self, p: &AlphaChartPoint) -> (DVector<f64>, DVector<f64>, f64) {
        let l2 = &self.levels[1];
        let mut tv = DVector::zeros(self.action.n());
        for (f, c) in l2.normal.iter().zip(&p.theta) {
            tv.axpy(*c, f, 1.0);
        }
        let r = p.theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        let sc = sinc(p.tau[1] * r);
        let p2 = self.base_point(1, &p.s[1]);
        let y = p2 * (p.tau[1] * r).cos() + &tv * (p.tau[1] * sc);
        (tv, y, sc)
    }

    /// `(x, X)` of an α-chart point.
    pub fn alpha_chart_to_ambient(&self, p: &AlphaChartPoint) -> (DVector<f64>, DVector<f64>) {
        let (_, y, _) = self.alpha_y(p);
        let x = self.base_point(0, &p.s[0]) + y * p.tau[0];
        let t = self.a_coeff(0, &p.alpha1) * (p.tau[0] * p.tau[1])
            + self.a_coeff(1, &self.alpha_direction(&p.alpha_rest)) * p.tau[1]
            + self.b_coeff(&p.beta);
        (x, t)
    }

    /// `∂_ξ ψ̃^wk`, independent of `ξ` since the weak transform is linear in it.
    pub fn alpha_xi_gradient(&self, p: &AlphaChartPoint) -> DVector<f64> {
        let (tv, y, sc) = self.alpha_y(p);
        let a1 = self.a_coeff(0, &p.alpha1);
        let a2 = self.a_coeff(1, &self.alpha_direction(&p.alpha_rest));
        let p1 = self.base_point(0, &p.s[0]);
        self.apply(&a1, &p1) + self.apply(&a1, &y) * p.tau[0] + self.apply(&a2, &y) + self.apply(&self.b_coeff(&p.beta), &tv) * sc
    }

    pub fn alpha_weak_transform(&self, p: &AlphaChartPoint) -> f64 {
        self.alpha_xi_gradient(p).dot(&p.xi)
    }

    fn random_alpha_point(&self, rng: &mut impl Rng) -> AlphaChartPoint {
        let mut u = |k: usize, r: f64| -> Vec<f64> { (0..k).map(|_| rng.random_range(-r..r)).collect() };
        let t = u(2, self.t_max);
        AlphaChartPoint {
            tau: [t[0], t[1]],
            s: self.levels.iter().map(|l| u(l.base_dirs.len(), 0.5)).collect(),
            theta: u(self.levels[1].normal.len(), 1.0),
            alpha1: u(self.levels[0].a_frame.len(), 1.0),
            alpha_rest: u(self.levels[1].a_frame.len() - 1, 0.5),
            beta: u(self.levels[1].b_frame.len(), 1.0),
            xi: DVector::from_vec(u(self.action.n(), 1.0)),
        }
    }

    /// A random α-chart point in the sample box, for tests.
    pub fn sample_alpha_point(&self, seed: u64, index: u64) -> Result<AlphaChartPoint, ResolutionError> {
        applicable(self)?;
        Ok(self.random_alpha_point(&mut point_rng(seed, index)))
    }
}

/// Minimum of `‖∂_ξ ψ̃^wk‖` over random points of the compact α-chart box
/// `|τ| < T`, `|s| ≤ 0.5`, `|θ_i| ≤ 1`, `|α'_i| ≤ 0.5`, `|β_i| ≤ 1`.
pub fn check_alpha_chart_nonstationary(branch: &IsotropyBranch, samples: usize, seed: u64) -> Result<f64, ResolutionError> {
    applicable(branch)?;
    let min = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = branch.random_alpha_point(&mut point_rng(seed ^ 0xa1fa, i));
            branch.alpha_xi_gradient(&p).norm()
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(min)
}

/// Desk-scale `Ĩ(μ)` on an α-chart: bump cut-offs in `τ`, `θ`, `β` and `ξ`,
/// the Jacobian weight `Π|τ_j|^{c_j + Σ d_r − 1}`, base coordinates and `α¹`
/// fixed at 0. The `ξ` integral is done exactly through the radial transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlphaDecayConfig {
    pub mus: Vec<f64>,
    pub theta_radius: f64,
    pub alpha_radius: f64,
    pub beta_radius: f64,
    pub xi_radius: f64,
    pub nodes: usize,
}

impl Default for AlphaDecayConfig {
    fn default() -> Self {
        let (hi, lo, k) = (0.1f64, 0.02f64, 6);
        let mus = (0..k).map(|i| hi * (lo / hi).powf(i as f64 / (k - 1) as f64)).collect();
        AlphaDecayConfig {
            mus,
            theta_radius: 0.6,
            alpha_radius: 0.5,
            beta_radius: 1.0,
            xi_radius: 4.0,
            nodes: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaDecay {
    pub mus: Vec<f64>,
    pub values: Vec<f64>,
    pub exponent: f64,
    pub min_grad: f64,
}

/// Tensor rule on a box of the given dimension, returning node vectors,
/// weights already multiplied by a radial bump of radius `r`.
fn ball_rule(dim: usize, r: f64, n: usize) -> Vec<(Vec<f64>, f64)> {
    let line = Rule::interval(-r, r, n);
    let mut out = vec![(Vec::new(), 1.0)];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(out.len() * n);
        for (v, w) in &out {
            for (&u, &wu) in line.nodes.iter().zip(&line.weights) {
                let mut v2 = v.clone();
                v2.push(u);
                next.push((v2, w * wu));
            }
        }
        out = next;
    }
    out.into_iter()
        .filter_map(|(v, w)| {
            let q = v.iter().map(|a| a * a).sum::<f64>().sqrt() / r;
            let b = bump(q);
            (b > 0.0).then_some((v, w * b))
        })
        .collect()
}

pub fn alpha_chart_decay(branch: &IsotropyBranch, cfg: &AlphaDecayConfig) -> Result<AlphaDecay, ResolutionError> {
    applicable(branch)?;
    let t = branch.t_max;
    let e = branch.jacobian_exponents();
    let tau_rule = Rule::on_breaks(&[-t, 0.0, t], cfg.nodes);
    let tau_nodes: Vec<(f64, f64)> = tau_rule
        .nodes
        .iter()
        .zip(&tau_rule.weights)
        .map(|(&u, &w)| (u, w * bump(u / t)))
        .filter(|(_, w)| *w > 0.0)
        .collect();
    let theta = ball_rule(branch.levels[1].normal.len(), cfg.theta_radius, cfg.nodes);
    let alpha = ball_rule(branch.levels[1].a_frame.len() - 1, cfg.alpha_radius, cfg.nodes);
    let beta = ball_rule(branch.levels[1].b_frame.len(), cfg.beta_radius, cfg.nodes);
    let n = branch.action.n();
    let s = branch.levels.iter().map(|l| vec![0.0; l.base_dirs.len()]).collect::<Vec<_>>();
    let alpha1 = vec![0.0; branch.levels[0].a_frame.len()];

    // visit every node of the parameter grid with its weight and |∂_ξ ψ̃^wk|
    let visit_slab = |t1: f64, w1: f64, f: &mut dyn FnMut(f64, f64)| {
        for &(t2, w2) in &tau_nodes {
            let jac = t1.abs().powi(e[0] as i32) * t2.abs().powi(e[1] as i32);
            for (th, wt) in &theta {
                for (al, wa) in &alpha {
                    for (be, wb) in &beta {
                        let p = AlphaChartPoint {
                            tau: [t1, t2],
                            s: s.clone(),
                            theta: th.clone(),
                            alpha1: alpha1.clone(),
                            alpha_rest: al.clone(),
                            beta: be.clone(),
                            xi: DVector::zeros(n),
                        };
                        f(w1 * w2 * wt * wa * wb * jac, branch.alpha_xi_gradient(&p).norm());
                    }
                }
            }
        }
    };
    let (min_grad, max_grad) = tau_nodes
        .par_iter()
        .map(|&(t1, w1)| {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            visit_slab(t1, w1, &mut |_, g| {
                lo = lo.min(g);
                hi = hi.max(g);
            });
            (lo, hi)
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    let mu_min = cfg.mus.iter().cloned().fold(f64::INFINITY, f64::min);
    let factor = RadialFactor::new(&vec![0.0; n], cfg.xi_radius);
    let table = RadialFourier::new(AmplitudeKind::BumpProduct, &factor, 1.01 * max_grad / mu_min);
    let slabs: Vec<Vec<f64>> = tau_nodes
        .par_iter()
        .map(|&(t1, w1)| {
            let mut terms: Vec<Vec<f64>> = vec![Vec::new(); cfg.mus.len()];
            visit_slab(t1, w1, &mut |w, g| {
                for (k, &mu) in cfg.mus.iter().enumerate() {
                    terms[k].push(w * table.eval(g / mu).expect("table covers max |w|/μ"));
                }
            });
            terms.iter().map(|t| pairwise_sum(t)).collect()
        })
        .collect();
    let values: Vec<f64> = (0..cfg.mus.len())
        .map(|k| pairwise_sum(&slabs.iter().map(|s| s[k]).collect::<Vec<_>>()))
        .collect();
    let complex: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let exponent = fit_exponent(&cfg.mus, &complex).map_err(|e| ResolutionError::NotApplicable(e.to_string()))?;
    Ok(AlphaDecay {
        mus: cfg.mus.clone(),
        values,
        exponent,
        min_grad,
    })
}
