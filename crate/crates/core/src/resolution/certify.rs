//! Pointwise certificates for a branch: factorization, the critical-set
//! conditions, transversal nondegeneracy and the exponent bookkeeping.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::alpha::{alpha_chart_decay, check_alpha_chart_nonstationary, AlphaDecay, AlphaDecayConfig};
use super::chart::{chart_to_ambient_tau, delta_jacobian_det, delta_substitution, weak_transform, ChartLayout, ResolutionChartPoint};
use super::tree::{IsotropyBranch, LevelData};
use super::ResolutionError;
use crate::action::StratumSignature;
use crate::fd;
use crate::fit::line_fit;
use crate::linalg;
use crate::phase::{psi, PhasePoint};
use crate::tol::{CONDITION_TOL, FD_KERNEL_REL_TOL};

/// Bound on `|ψ∘ζ − Πτ·ψ̃^wk|` relative to `(1+|x|)(1+|ξ|)(1+|X|)`.
pub const FACTORIZATION_TOL: f64 = 1e-11;
/// Agreement required between the bordered matrix and the finite-difference Hessian.
pub const BORDERED_TOL: f64 = 1e-6;
/// Allowed gap between fitted and predicted Jacobian exponents.
pub const EXPONENT_TOL: f64 = 1e-3;

/// The α-chart model integral must decay at least this much faster than `μ^κ`.
pub const ALPHA_DECAY_MARGIN: f64 = 0.8;

const GRAD_STEP: f64 = 1e-3;
const HESS_STEP: f64 = 1e-4;
const JAC_STEP: f64 = 1e-6;
const PERTURBATION: f64 = 1e-3;

pub(crate) fn point_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, k: usize, r: f64) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(-r..r)).collect()
}

/// A random θ-chart point; about one point in ten has a vanishing `σ`.
pub(crate) fn random_chart_point(branch: &IsotropyBranch, rng: &mut ChaCha8Rng) -> ResolutionChartPoint {
    let layout = branch.layout();
    let mut sigma = uniform(rng, layout.depth, branch.t_max);
    if rng.random_bool(0.1) {
        let k = rng.random_range(0..layout.depth);
        sigma[k] = 0.0;
    }
    ResolutionChartPoint {
        sigma,
        s: layout.s_dims.iter().map(|&k| uniform(rng, k, 0.5)).collect(),
        theta: uniform(rng, layout.theta_dim, 1.0),
        alpha: layout.alpha_dims.iter().map(|&k| uniform(rng, k, 1.0)).collect(),
        beta: uniform(rng, layout.beta_dim, 1.0),
        xi: DVector::from_vec(uniform(rng, layout.n, 1.0)),
    }
}

/// Spanning sets of `E^{(j)} = g_{p^{(j)}}^⊥ · x^{(j…N)}` per level.
fn e_spaces(branch: &IsotropyBranch, tau: &[f64], c: &ResolutionChartPoint) -> Vec<Vec<DVector<f64>>> {
    let subs = branch.sub_points(tau, c);
    branch
        .levels
        .iter()
        .zip(&subs)
        .map(|(l, x)| l.a_frame.iter().map(|a| branch.apply(a, x)).collect())
        .collect()
}

/// Spanning set of `F = g_{p^{(N)}} · ṽ`.
fn f_space(branch: &IsotropyBranch, c: &ResolutionChartPoint) -> Vec<DVector<f64>> {
    let v = branch.v_tilde(&c.theta);
    let last = branch.levels.last().expect("branch has a level");
    last.b_frame.iter().map(|b| branch.apply(b, &v)).collect()
}

/// Matrix whose columns are `B_r ṽ`.
fn b_v_matrix(branch: &IsotropyBranch, c: &ResolutionChartPoint) -> DMatrix<f64> {
    linalg::columns_matrix(&f_space(branch, c), branch.action.n())
}

fn weak_flat<'a>(branch: &'a IsotropyBranch, layout: &ChartLayout) -> impl Fn(&DVector<f64>) -> f64 + 'a {
    let layout = layout.clone();
    move |z| weak_transform(branch, &ResolutionChartPoint::from_flat(&layout, z))
}

struct FactorizationScan {
    max_residual: f64,
    worst_ratio: f64,
    worst_point: Vec<f64>,
}

fn scan_factorization(branch: &IsotropyBranch, count: usize, seed: u64) -> FactorizationScan {
    let rows: Vec<(f64, f64, Vec<f64>)> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = point_rng(seed, i);
            let c = random_chart_point(branch, &mut rng);
            let tau = c.tau();
            let (x, t) = chart_to_ambient_tau(branch, &tau, &c);
            let scale = (1.0 + x.norm()) * (1.0 + c.xi.norm()) * (1.0 + t.norm());
            let lhs = psi(&branch.action, &PhasePoint { x, xi: c.xi.clone(), t });
            let rhs = tau.iter().product::<f64>() * weak_transform(branch, &c);
            let r = (lhs - rhs).abs();
            (r, r / scale, c.to_flat().as_slice().to_vec())
        })
        .collect();
    let mut scan = FactorizationScan {
        max_residual: 0.0,
        worst_ratio: 0.0,
        worst_point: Vec::new(),
    };
    for (r, ratio, p) in rows {
        scan.max_residual = scan.max_residual.max(r);
        if ratio > scan.worst_ratio || scan.worst_point.is_empty() {
            scan.worst_ratio = ratio;
            scan.worst_point = p;
        }
    }
    scan
}

/// Max over random chart points of `|ψ∘ζ − Πτ·ψ̃^wk|`.
pub fn check_factorization(branch: &IsotropyBranch, sample_count: usize, seed: u64) -> Result<f64, ResolutionError> {
    let scan = scan_factorization(branch, sample_count, seed);
    if scan.worst_ratio > FACTORIZATION_TOL {
        return Err(ResolutionError::Factorization {
            residual: scan.max_residual,
            bound: FACTORIZATION_TOL,
            point: scan.worst_point,
        });
    }
    Ok(scan.max_residual)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub grad_zero: bool,
    pub cond_i: bool,
    pub cond_ii: bool,
    pub cond_iii: bool,
    pub grad_norm: f64,
}

impl ConditionRecord {
    /// `grad_zero ⟺ (I ∧ II ∧ III)`.
    pub fn consistent(&self) -> bool {
        self.grad_zero == (self.cond_i && self.cond_ii && self.cond_iii)
    }
}

pub fn check_theorem1_conditions(branch: &IsotropyBranch, c: &ResolutionChartPoint) -> ConditionRecord {
    let layout = branch.layout();
    let grad = fd::gradient(weak_flat(branch, &layout), &c.to_flat(), GRAD_STEP);
    let grad_norm = grad.norm();
    let tol = CONDITION_TOL * (1.0 + c.xi.norm());
    let tau = c.tau();
    let v = branch.v_tilde(&c.theta);
    let bv = branch.apply(&branch.b_coeff(&c.beta), &v);
    let cond_i = c.alpha.iter().flatten().all(|a| a.abs() <= CONDITION_TOL) && bv.norm() <= CONDITION_TOL;
    let cond_ii = e_spaces(branch, &tau, c).iter().flatten().all(|e| e.dot(&c.xi).abs() <= tol);
    let cond_iii = f_space(branch, c).iter().all(|f| f.dot(&c.xi).abs() <= tol);
    ConditionRecord {
        grad_zero: grad_norm <= CONDITION_TOL,
        cond_i,
        cond_ii,
        cond_iii,
        grad_norm,
    }
}

/// A critical point of the weak transform built from the conditions: `α = 0`,
/// `β` with `B(β)ṽ = 0`, and `ξ ⊥ E ∪ F`. With `zero_sigma` every `σ` is 0;
/// otherwise some points get one vanishing `σ`.
pub fn critical_witness(branch: &IsotropyBranch, rng: &mut ChaCha8Rng, zero_sigma: bool) -> ResolutionChartPoint {
    let mut c = random_chart_point(branch, rng);
    if zero_sigma {
        c.sigma.iter_mut().for_each(|s| *s = 0.0);
    } else if rng.random_bool(0.3) {
        let k = rng.random_range(0..c.sigma.len());
        c.sigma[k] = 0.0;
    }
    c.alpha.iter_mut().flatten().for_each(|a| *a = 0.0);
    let ker = linalg::null_space(&b_v_matrix(branch, &c));
    let mut beta = DVector::zeros(c.beta.len());
    for k in &ker {
        beta.axpy(rng.random_range(-1.0..1.0), k, 1.0);
    }
    c.beta = beta.as_slice().to_vec();
    let tau = c.tau();
    let mut span: Vec<DVector<f64>> = e_spaces(branch, &tau, &c).into_iter().flatten().collect();
    span.extend(f_space(branch, &c));
    let basis = linalg::gram_schmidt(&span, 1e-10);
    c.xi = &c.xi - linalg::project(&c.xi, &basis);
    c
}

/// Small perturbations of a critical witness that each break one condition.
pub fn perturbed_witnesses(branch: &IsotropyBranch, c: &ResolutionChartPoint) -> Vec<(&'static str, ResolutionChartPoint)> {
    let mut out = Vec::new();
    if let Some(j) = c.alpha.iter().position(|a| !a.is_empty()) {
        let mut p = c.clone();
        p.alpha[j][0] += PERTURBATION;
        out.push(("alpha", p));
    }
    let f = linalg::gram_schmidt(&f_space(branch, c), 1e-10);
    if let Some(f0) = f.first() {
        let mut p = c.clone();
        p.xi += f0 * PERTURBATION;
        out.push(("xi_along_f", p));
    }
    let e: Vec<DVector<f64>> = e_spaces(branch, &c.tau(), c).into_iter().flatten().collect();
    let e = linalg::gram_schmidt(&e, 1e-10);
    if let Some(e0) = e.first() {
        let mut p = c.clone();
        p.xi += e0 * PERTURBATION;
        out.push(("xi_along_e", p));
    }
    let ker = linalg::null_space(&b_v_matrix(branch, c));
    if let Some(u) = linalg::orthogonal_complement(&ker, c.beta.len()).first() {
        let mut p = c.clone();
        p.beta.iter_mut().zip(u.iter()).for_each(|(b, du)| *b += PERTURBATION * du);
        out.push(("beta", p));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub kernel_dim: usize,
    pub expected_dim: usize,
    pub nonzero_min_abs: f64,
    /// Max gap between the bordered matrix and the Hessian block, at `τ = 0` only.
    pub bordered_residual: Option<f64>,
}

fn hessian_kernel(h: &DMatrix<f64>) -> (usize, f64) {
    let (vals, _) = linalg::sorted_symmetric_eigen(h);
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let thr = FD_KERNEL_REL_TOL * top;
    let kernel = vals.iter().filter(|v| v.abs() <= thr).count();
    let nonzero = vals.iter().filter(|v| v.abs() > thr).fold(f64::INFINITY, |m, v| m.min(v.abs()));
    (kernel, nonzero)
}

/// The exact Hessian block in `(α, β, ξ)` at `τ = 0`: `[ξ_r, α_s] = (A_s p)_r`,
/// `[ξ_r, β_s] = (B_s ṽ)_r`, zero elsewhere. Returned with its flat indices.
fn bordered_matrix(branch: &IsotropyBranch, c: &ResolutionChartPoint) -> (Vec<usize>, DMatrix<f64>) {
    let layout = branch.layout();
    let n = layout.n;
    let mut idx: Vec<usize> = Vec::new();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let zeros = vec![0.0; layout.depth];
    let subs = branch.sub_points(&zeros, c);
    for (j, l) in branch.levels.iter().enumerate() {
        let off = layout.alpha_offset(j);
        for (s, a) in l.a_frame.iter().enumerate() {
            idx.push(off + s);
            cols.push(branch.apply(a, &subs[j]));
        }
    }
    let off = layout.beta_offset();
    for (s, f) in f_space(branch, c).into_iter().enumerate() {
        idx.push(off + s);
        cols.push(f);
    }
    let k = idx.len();
    let xo = layout.xi_offset();
    idx.extend(xo..xo + n);
    let mut m = DMatrix::zeros(k + n, k + n);
    for (s, col) in cols.iter().enumerate() {
        for r in 0..n {
            m[(k + r, s)] = col[r];
            m[(s, k + r)] = col[r];
        }
    }
    (idx, m)
}

pub fn check_transversal_nondegeneracy(branch: &IsotropyBranch, c: &ResolutionChartPoint) -> Result<KernelReport, ResolutionError> {
    let rec = check_theorem1_conditions(branch, c);
    if !rec.grad_zero {
        return Err(ResolutionError::NotCritical { grad_norm: rec.grad_norm });
    }
    let layout = branch.layout();
    let h = fd::hessian(weak_flat(branch, &layout), &c.to_flat(), HESS_STEP);
    let (kernel_dim, nonzero_min_abs) = hessian_kernel(&h);
    let expected_dim = layout.dim() - 2 * branch.kappa;
    let bordered_residual = if c.sigma.iter().all(|s| *s == 0.0) {
        let (idx, m) = bordered_matrix(branch, c);
        let mut gap = 0.0f64;
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                gap = gap.max((h[(i, j)] - m[(a, b)]).abs());
            }
        }
        Some(gap)
    } else {
        None
    };
    let report = KernelReport {
        kernel_dim,
        expected_dim,
        nonzero_min_abs,
        bordered_residual,
    };
    if kernel_dim != expected_dim {
        return Err(ResolutionError::KernelMismatch {
            found: kernel_dim,
            expected: expected_dim,
        });
    }
    Ok(report)
}

/// `Σ_j dim E^{(j)} + dim F = κ` at random base configurations with `τ = 0`.
pub fn check_kappa_decomposition(branch: &IsotropyBranch, samples: usize, seed: u64) -> bool {
    let n = branch.action.n();
    (0..samples as u64).into_par_iter().all(|i| {
        let mut rng = point_rng(seed, i);
        let mut c = random_chart_point(branch, &mut rng);
        c.sigma.iter_mut().for_each(|s| *s = 0.0);
        let tau = c.tau();
        let e: usize = e_spaces(branch, &tau, &c)
            .iter()
            .map(|e| if e.is_empty() { 0 } else { linalg::numerical_rank(&linalg::columns_matrix(e, n)) })
            .sum();
        let f = f_space(branch, &c);
        let f = if f.is_empty() { 0 } else { linalg::numerical_rank(&linalg::columns_matrix(&f, n)) };
        e + f == branch.kappa
    })
}

/// `(τ, s, θ, α, β) ↦ (x, X)` on flat ambient coordinates.
fn ambient_map(branch: &IsotropyBranch, layout: &ChartLayout, z: &DVector<f64>) -> DVector<f64> {
    let mut full = z.as_slice().to_vec();
    full.extend(std::iter::repeat_n(0.0, layout.n));
    let c = ResolutionChartPoint::from_flat(layout, &DVector::from_vec(full));
    let (x, t) = chart_to_ambient_tau(branch, &c.sigma, &c);
    let mut out = x.as_slice().to_vec();
    out.extend(t.iter());
    DVector::from_vec(out)
}

fn reference_ambient(layout: &ChartLayout) -> DVector<f64> {
    let mut z = vec![0.5; layout.depth];
    z.extend(std::iter::repeat_n(0.1, layout.s_dims.iter().sum()));
    z.extend(std::iter::repeat_n(0.2, layout.theta_dim));
    z.extend(std::iter::repeat_n(0.3, layout.alpha_dims.iter().sum()));
    z.extend(std::iter::repeat_n(0.4, layout.beta_dim));
    DVector::from_vec(z)
}

fn abs_det_tau(branch: &IsotropyBranch, layout: &ChartLayout, z: &DVector<f64>) -> f64 {
    fd::jacobian(|w| ambient_map(branch, layout, w), z, JAC_STEP).determinant().abs()
}

/// Power-law exponent of `|det D(chart_to_ambient)|` as `τ_j → 0`.
pub fn check_jacobian_exponent(branch: &IsotropyBranch, level: usize) -> f64 {
    let layout = branch.layout();
    let base = reference_ambient(&layout);
    let taus = [1e-2, 1e-3, 1e-4];
    let (lx, ly): (Vec<f64>, Vec<f64>) = taus
        .iter()
        .map(|&t| {
            let mut z = base.clone();
            z[level] = t;
            (t.ln(), abs_det_tau(branch, &layout, &z).ln())
        })
        .unzip();
    line_fit(&lx, &ly).1
}

/// Predicted `σ_k` exponents of `|det D(chart_to_ambient∘δ)|`.
pub fn predicted_sigma_exponents(branch: &IsotropyBranch) -> Vec<i64> {
    let e = branch.jacobian_exponents();
    match branch.depth() {
        // τ₁ = σ₁²σ₂, τ₂ = σ₁σ₂, det Dδ = σ₁²σ₂
        2 => vec![2 * e[0] + e[1] + 2, e[0] + e[1] + 1],
        _ => e,
    }
}

/// Fitted `σ_k` exponents of `|det D_τ(δ(σ))|·|det Dδ(σ)|` along `σ_k → 0`.
pub fn check_sigma_exponents(branch: &IsotropyBranch) -> Vec<f64> {
    let layout = branch.layout();
    let base = reference_ambient(&layout);
    let sig = [1e-2, 1e-3, 1e-4];
    (0..layout.depth)
        .map(|k| {
            let (lx, ly): (Vec<f64>, Vec<f64>) = sig
                .iter()
                .map(|&s| {
                    let mut sigma = vec![0.5; layout.depth];
                    sigma[k] = s;
                    let mut z = base.clone();
                    for (i, t) in delta_substitution(&sigma).into_iter().enumerate() {
                        z[i] = t;
                    }
                    let det = abs_det_tau(branch, &layout, &z) * delta_jacobian_det(&sigma).abs();
                    (s.ln(), det.ln())
                })
                .unzip();
            line_fit(&lx, &ly).1
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyOptions {
    pub factorization_samples: usize,
    pub theorem1_points: usize,
    pub theorem2_points: usize,
    pub kappa_samples: usize,
    pub alpha_samples: usize,
    pub seed: u64,
    /// Also integrate the α-chart model integral when the branch has an α-chart.
    pub alpha_decay: Option<AlphaDecayConfig>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            factorization_samples: 10_000,
            theorem1_points: 1000,
            theorem2_points: 100,
            kappa_samples: 100,
            alpha_samples: 10_000,
            seed: 0,
            alpha_decay: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub branch: String,
    pub chain: Vec<StratumSignature>,
    pub numerical_data: Vec<LevelData>,
    pub kappa: usize,
    pub chart_dim: usize,
    pub factorization_residual: f64,
    pub factorization_pass: bool,
    pub theorem1_pass: bool,
    pub theorem1_points: usize,
    pub theorem1_discrepancies: usize,
    /// Distinct Hessian kernel dimensions seen at critical points.
    pub theorem2_kernel_dims: Vec<usize>,
    pub expected_kernel_dim: usize,
    pub min_nonzero_eigenvalue: f64,
    pub bordered_residual: f64,
    pub theorem2_pass: bool,
    pub kappa_decomposition_pass: bool,
    pub jacobian_exponents: Vec<f64>,
    pub predicted_jacobian_exponents: Vec<i64>,
    pub sigma_exponents: Vec<f64>,
    pub predicted_sigma_exponents: Vec<i64>,
    pub exponents_pass: bool,
    pub lemma3_pass: bool,
    pub alpha_chart_min_grad: Option<f64>,
    pub alpha_decay: Option<AlphaDecay>,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.factorization_pass
            && self.theorem1_pass
            && self.theorem2_pass
            && self.kappa_decomposition_pass
            && self.exponents_pass
            && self.lemma3_pass
            && self.alpha_chart_min_grad.is_none_or(|g| g > 0.0)
            && self.alpha_decay.as_ref().is_none_or(|d| d.exponent >= self.kappa as f64 + ALPHA_DECAY_MARGIN)
    }
}

struct Theorem1Row {
    discrepancies: usize,
    kernel: Option<(usize, f64)>,
}

fn theorem1_row(branch: &IsotropyBranch, seed: u64, i: u64) -> Theorem1Row {
    let mut rng = point_rng(seed, i);
    let c = critical_witness(branch, &mut rng, false);
    let rec = check_theorem1_conditions(branch, &c);
    let mut discrepancies = usize::from(!rec.consistent() || !rec.grad_zero);
    for (_, p) in perturbed_witnesses(branch, &c) {
        let r = check_theorem1_conditions(branch, &p);
        discrepancies += usize::from(!r.consistent() || r.grad_zero);
    }
    let kernel = rec.grad_zero.then(|| {
        let h = fd::hessian(weak_flat(branch, &branch.layout()), &c.to_flat(), HESS_STEP);
        hessian_kernel(&h)
    });
    Theorem1Row { discrepancies, kernel }
}

/// Run every check on one branch.
pub fn certify_branch(branch: &IsotropyBranch, opts: &CertifyOptions) -> Certificate {
    let layout = branch.layout();
    let expected = layout.dim() - 2 * branch.kappa;
    let fac = scan_factorization(branch, opts.factorization_samples, opts.seed);

    let rows: Vec<Theorem1Row> = (0..opts.theorem1_points as u64)
        .into_par_iter()
        .map(|i| theorem1_row(branch, opts.seed ^ 0x7431, i))
        .collect();
    let theorem1_discrepancies: usize = rows.iter().map(|r| r.discrepancies).sum();
    let mut dims: Vec<usize> = rows.iter().filter_map(|r| r.kernel.map(|k| k.0)).collect();
    let mut min_nonzero = rows.iter().filter_map(|r| r.kernel.map(|k| k.1)).fold(f64::INFINITY, f64::min);

    let t2: Vec<Result<KernelReport, ResolutionError>> = (0..opts.theorem2_points as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = point_rng(opts.seed ^ 0x7432, i);
            let c = critical_witness(branch, &mut rng, true);
            check_transversal_nondegeneracy(branch, &c)
        })
        .collect();
    let mut bordered = 0.0f64;
    let mut t2_ok = true;
    for r in &t2 {
        match r {
            Ok(k) => {
                dims.push(k.kernel_dim);
                min_nonzero = min_nonzero.min(k.nonzero_min_abs);
                bordered = bordered.max(k.bordered_residual.unwrap_or(f64::INFINITY));
            }
            Err(ResolutionError::KernelMismatch { found, .. }) => {
                dims.push(*found);
                t2_ok = false;
            }
            Err(_) => t2_ok = false,
        }
    }
    dims.sort_unstable();
    dims.dedup();

    let jacobian_exponents: Vec<f64> = (0..branch.depth()).map(|j| check_jacobian_exponent(branch, j)).collect();
    let predicted = branch.jacobian_exponents();
    let sigma_exponents = check_sigma_exponents(branch);
    let predicted_sigma = predicted_sigma_exponents(branch);
    let close = |f: &[f64], p: &[i64]| f.iter().zip(p).all(|(f, p)| (f - *p as f64).abs() <= EXPONENT_TOL);
    let exponents_pass = close(&jacobian_exponents, &predicted) && close(&sigma_exponents, &predicted_sigma);

    let alpha_chart_min_grad = check_alpha_chart_nonstationary(branch, opts.alpha_samples, opts.seed).ok();
    let alpha_decay = match (&opts.alpha_decay, alpha_chart_min_grad) {
        (Some(cfg), Some(_)) => alpha_chart_decay(branch, cfg).ok(),
        _ => None,
    };

    Certificate {
        branch: branch.label(),
        chain: branch.chain.clone(),
        numerical_data: branch.numerical_data(),
        kappa: branch.kappa,
        chart_dim: layout.dim(),
        factorization_residual: fac.max_residual,
        factorization_pass: fac.worst_ratio <= FACTORIZATION_TOL,
        theorem1_pass: theorem1_discrepancies == 0,
        theorem1_points: opts.theorem1_points,
        theorem1_discrepancies,
        theorem2_pass: t2_ok && dims == vec![expected] && bordered <= BORDERED_TOL,
        theorem2_kernel_dims: dims,
        expected_kernel_dim: expected,
        min_nonzero_eigenvalue: min_nonzero,
        bordered_residual: bordered,
        kappa_decomposition_pass: check_kappa_decomposition(branch, opts.kappa_samples, opts.seed),
        jacobian_exponents,
        predicted_jacobian_exponents: predicted,
        sigma_exponents,
        predicted_sigma_exponents: predicted_sigma,
        exponents_pass,
        lemma3_pass: branch.lemma3().iter().all(|&b| b),
        alpha_chart_min_grad,
        alpha_decay,
        notes: branch.notes.clone(),
    }
}
