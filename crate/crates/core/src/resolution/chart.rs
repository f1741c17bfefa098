//! θ-chart coordinates, the composed blow-up map and the weak transform.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::tree::IsotropyBranch;

/// Sizes of the coordinate groups of a θ-chart, in flat order
/// `[σ, s¹, s², θ, α¹, α², β, ξ]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartLayout {
    pub depth: usize,
    pub s_dims: Vec<usize>,
    pub theta_dim: usize,
    pub alpha_dims: Vec<usize>,
    pub beta_dim: usize,
    pub n: usize,
}

impl ChartLayout {
    /// Number of coordinates that map to `(x, X)`.
    pub fn ambient_dim(&self) -> usize {
        self.depth + self.s_dims.iter().sum::<usize>() + self.theta_dim + self.alpha_dims.iter().sum::<usize>() + self.beta_dim
    }

    /// Total chart dimension including `ξ`.
    pub fn dim(&self) -> usize {
        self.ambient_dim() + self.n
    }

    /// Offset of the `ξ` block in the flat vector.
    pub fn xi_offset(&self) -> usize {
        self.ambient_dim()
    }

    pub fn alpha_offset(&self, level: usize) -> usize {
        self.depth + self.s_dims.iter().sum::<usize>() + self.theta_dim + self.alpha_dims[..level].iter().sum::<usize>()
    }

    pub fn beta_offset(&self) -> usize {
        self.ambient_dim() - self.beta_dim
    }
}

/// A point of a θ-chart. Radial coordinates are stored as `σ`; the blow-up
/// radii are `τ = δ(σ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionChartPoint {
    pub sigma: Vec<f64>,
    pub s: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    pub xi: DVector<f64>,
}

impl ResolutionChartPoint {
    pub fn zeros(layout: &ChartLayout) -> Self {
        ResolutionChartPoint {
            sigma: vec![0.0; layout.depth],
            s: layout.s_dims.iter().map(|&k| vec![0.0; k]).collect(),
            theta: vec![0.0; layout.theta_dim],
            alpha: layout.alpha_dims.iter().map(|&k| vec![0.0; k]).collect(),
            beta: vec![0.0; layout.beta_dim],
            xi: DVector::zeros(layout.n),
        }
    }

    pub fn tau(&self) -> Vec<f64> {
        delta_substitution(&self.sigma)
    }

    pub fn to_flat(&self) -> DVector<f64> {
        let mut v: Vec<f64> = self.sigma.clone();
        self.s.iter().for_each(|s| v.extend_from_slice(s));
        v.extend_from_slice(&self.theta);
        self.alpha.iter().for_each(|a| v.extend_from_slice(a));
        v.extend_from_slice(&self.beta);
        v.extend(self.xi.iter());
        DVector::from_vec(v)
    }

    pub fn from_flat(layout: &ChartLayout, z: &DVector<f64>) -> Self {
        let mut k = 0;
        let mut take = |m: usize| {
            let out = z.as_slice()[k..k + m].to_vec();
            k += m;
            out
        };
        let sigma = take(layout.depth);
        let s = layout.s_dims.iter().map(|&m| take(m)).collect();
        let theta = take(layout.theta_dim);
        let alpha = layout.alpha_dims.iter().map(|&m| take(m)).collect();
        let beta = take(layout.beta_dim);
        let xi = DVector::from_vec(take(layout.n));
        ResolutionChartPoint {
            sigma,
            s,
            theta,
            alpha,
            beta,
            xi,
        }
    }
}

/// Composition of the two radial substitutions: `(σ₁, σ₂) ↦ σ₁(1, σ₂)`
/// followed by `(a, b) ↦ b(a, 1)`, i.e. `τ = (σ₁²σ₂, σ₁σ₂)`.
pub fn delta_substitution(sigma: &[f64]) -> Vec<f64> {
    match sigma.len() {
        2 => vec![sigma[0] * sigma[0] * sigma[1], sigma[0] * sigma[1]],
        _ => sigma.to_vec(),
    }
}

/// `det Dδ(σ)`; equals `σ₁²σ₂` at depth two.
pub fn delta_jacobian_det(sigma: &[f64]) -> f64 {
    match sigma.len() {
        2 => sigma[0] * sigma[0] * sigma[1],
        _ => 1.0,
    }
}

/// `sin(x)/x`, with its series near 0.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn combine(frame: &[DVector<f64>], coeffs: &[f64], d: usize) -> DVector<f64> {
    let mut out = DVector::zeros(d);
    for (f, c) in frame.iter().zip(coeffs) {
        out.axpy(*c, f, 1.0);
    }
    out
}

impl IsotropyBranch {
    pub fn layout(&self) -> ChartLayout {
        let last = self.levels.last().expect("branch has a level");
        ChartLayout {
            depth: self.depth(),
            s_dims: self.levels.iter().map(|l| l.base_dirs.len()).collect(),
            theta_dim: last.normal.len().saturating_sub(1),
            alpha_dims: self.levels.iter().map(|l| l.a_frame.len()).collect(),
            beta_dim: last.b_frame.len(),
            n: self.action.n(),
        }
    }

    pub fn chart_dim(&self) -> usize {
        self.layout().dim()
    }

    /// Base point of level `j` at base coordinates `s`.
    pub fn base_point(&self, j: usize, s: &[f64]) -> DVector<f64> {
        let l = &self.levels[j];
        let mut p = l.centre.clone();
        for (d, c) in l.base_dirs.iter().zip(s) {
            p.axpy(*c, d, 1.0);
        }
        if l.on_sphere {
            let np = p.norm();
            p / np
        } else {
            p
        }
    }

    /// Unit vector `(V_ρ + Σ_{i≠ρ} θ_i V_i)/sqrt(1 + |θ|²)` of the last normal fibre.
    pub fn v_tilde(&self, theta: &[f64]) -> DVector<f64> {
        let frame = &self.levels.last().expect("branch has a level").normal;
        let mut v = frame[self.rho].clone();
        let mut it = theta.iter();
        for (i, f) in frame.iter().enumerate() {
            if i == self.rho {
                continue;
            }
            v.axpy(*it.next().expect("theta length"), f, 1.0);
        }
        let r = (1.0 + theta.iter().map(|t| t * t).sum::<f64>()).sqrt();
        v / r
    }

    /// Algebra element `A^{(j)}(α)` as a coefficient vector.
    pub fn a_coeff(&self, j: usize, alpha: &[f64]) -> DVector<f64> {
        combine(&self.levels[j].a_frame, alpha, self.action.d())
    }

    /// Algebra element `B(β)` of the last level as a coefficient vector.
    pub fn b_coeff(&self, beta: &[f64]) -> DVector<f64> {
        combine(&self.levels.last().expect("branch has a level").b_frame, beta, self.action.d())
    }

    /// `Y v` for the coefficient vector `t`.
    pub(crate) fn apply(&self, t: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for (g, c) in self.action.generators().iter().zip(t.iter()) {
            if *c != 0.0 {
                out.gemv(*c, g, v, 1.0);
            }
        }
        out
    }

    /// Points `x^{(j…N)}` of the chain: the full point first, then the
    /// deeper partial points.
    pub fn sub_points(&self, tau: &[f64], c: &ResolutionChartPoint) -> Vec<DVector<f64>> {
        let p1 = self.base_point(0, &c.s[0]);
        let v = self.v_tilde(&c.theta);
        match self.depth() {
            1 => vec![&p1 + &v * tau[0]],
            _ => {
                let p2 = self.base_point(1, &c.s[1]);
                let y = &p2 * tau[1].cos() + &v * tau[1].sin();
                vec![&p1 + &y * tau[0], y]
            }
        }
    }
}

/// `(x, X)` at explicit radii `τ`, with `X` as a coefficient vector.
pub fn chart_to_ambient_tau(branch: &IsotropyBranch, tau: &[f64], c: &ResolutionChartPoint) -> (DVector<f64>, DVector<f64>) {
    let x = branch.sub_points(tau, c).swap_remove(0);
    let b = branch.b_coeff(&c.beta);
    let t = match branch.depth() {
        1 => branch.a_coeff(0, &c.alpha[0]) * tau[0] + b,
        _ => branch.a_coeff(0, &c.alpha[0]) * (tau[0] * tau[1]) + branch.a_coeff(1, &c.alpha[1]) * tau[1] + b,
    };
    (x, t)
}

/// `(x, X)` of a chart point, with `τ = δ(σ)`.
pub fn chart_to_ambient(branch: &IsotropyBranch, c: &ResolutionChartPoint) -> (DVector<f64>, DVector<f64>) {
    chart_to_ambient_tau(branch, &c.tau(), c)
}

/// The weak transform at explicit radii `τ`, from its closed form.
pub fn weak_transform_tau(branch: &IsotropyBranch, tau: &[f64], c: &ResolutionChartPoint) -> f64 {
    let xi = &c.xi;
    let p1 = branch.base_point(0, &c.s[0]);
    let v = branch.v_tilde(&c.theta);
    let a1 = branch.a_coeff(0, &c.alpha[0]);
    let bv = branch.apply(&branch.b_coeff(&c.beta), &v);
    match branch.depth() {
        1 => (branch.apply(&a1, &p1) + &bv).dot(xi) + tau[0] * branch.apply(&a1, &v).dot(xi),
        _ => {
            let a2 = branch.a_coeff(1, &c.alpha[1]);
            let p2 = branch.base_point(1, &c.s[1]);
            let (sn, cs) = tau[1].sin_cos();
            let y = &p2 * cs + &v * sn;
            let a2p2 = branch.apply(&a2, &p2);
            let main = (branch.apply(&a1, &p1) + &a2p2 + &bv).dot(xi);
            let corr1 = tau[0] * branch.apply(&a1, &y).dot(xi);
            let corr2 = (a2p2 * (cs - 1.0) + branch.apply(&a2, &v) * sn).dot(xi);
            let corr3 = (sinc(tau[1]) - 1.0) * bv.dot(xi);
            main + corr1 + corr2 + corr3
        }
    }
}

/// The weak transform `ψ̃^wk`, with `τ = δ(σ)`.
pub fn weak_transform(branch: &IsotropyBranch, c: &ResolutionChartPoint) -> f64 {
    weak_transform_tau(branch, &c.tau(), c)
}
