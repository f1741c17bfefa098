//! The critical set `{m = 0, X x = 0, X ξ = 0}`, its transversal Hessian and
//! the leading coefficient `L0 = ∫ a / |det Hess_⊥ ψ|^{1/2}` over its regular part.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::GroupAction;
use crate::amplitude::{Amplitude, AmplitudeError, AmplitudeKind};
use crate::linalg;
use crate::phase::{hess_psi, moment_map, PhasePoint};
use crate::quadrature::{pairwise_sum, Rule};
use crate::tol::KERNEL_REL_TOL;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CriticalError {
    #[error("Hessian kernel has dimension {found}, expected {expected}: the critical set is not clean here")]
    NotClean { found: usize, expected: usize },
    #[error("projection did not converge (residual {0:.3e})")]
    NoConvergence(f64),
    #[error("projected point lies on or near a singular stratum (isotropy dim {isotropy_dim}, margin {margin:.3e})")]
    SingularStratum { isotropy_dim: usize, margin: f64 },
    #[error("(x, ξ) is off the zero level of the moment map (|m| = {0:.3e})")]
    OffZeroLevel(f64),
    #[error("chart grid needs a single plane rotation")]
    ChartGridUnsupported,
    #[error("no slab samples were accepted")]
    NoSamples,
    #[error(transparent)]
    Amplitude(#[from] AmplitudeError),
}

/// Transversal Hessian data at a critical point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransversalHessian {
    pub tangent_dim: usize,
    pub nonzero_spectrum: Vec<f64>,
    pub det_abs: f64,
    pub signature: i64,
}

/// A regular critical point with its transversal data and a quadrature weight.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CritSample {
    pub point: PhasePoint,
    pub tangent_dim: usize,
    pub nonzero_spectrum: Vec<f64>,
    pub transversal_det_abs: f64,
    pub signature: i64,
    pub weight: f64,
}

/// Principal orbit dimension, estimated from 64 pseudorandom directions.
pub fn kappa(action: &GroupAction) -> usize {
    action.principal_orbit_dimension(64, 0)
}

/// `(x, ξ)` has principal isotropy, i.e. `dim g_(x,ξ) = d − κ`.
pub fn is_regular(action: &GroupAction, x: &DVector<f64>, xi: &DVector<f64>, kappa: usize) -> Result<bool, CriticalError> {
    let m = moment_map(action, x, xi).norm();
    if m > 1e-8 {
        return Err(CriticalError::OffZeroLevel(m));
    }
    Ok(action.isotropy_algebra_pair(x, xi).dim() + kappa == action.d())
}

/// Spectrum of the full Hessian split into kernel and nonzero part.
pub fn transversal_hessian(action: &GroupAction, p: &PhasePoint, kappa: usize) -> Result<TransversalHessian, CriticalError> {
    let h = hess_psi(action, p);
    let (vals, _) = linalg::sorted_symmetric_eigen(&h);
    let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let thr = KERNEL_REL_TOL * max;
    let nonzero: Vec<f64> = vals.iter().cloned().filter(|v| v.abs() > thr).collect();
    let tangent_dim = vals.len() - nonzero.len();
    let expected = vals.len() - 2 * kappa;
    if tangent_dim != expected {
        return Err(CriticalError::NotClean {
            found: tangent_dim,
            expected,
        });
    }
    let det_abs = nonzero.iter().map(|v| v.abs()).product();
    let signature = nonzero.iter().map(|v| if *v > 0.0 { 1 } else { -1 }).sum();
    Ok(TransversalHessian {
        tangent_dim,
        nonzero_spectrum: nonzero,
        det_abs,
        signature,
    })
}

/// `(m; X x; X ξ)` at `z = (x, ξ, t)`.
pub fn residual(action: &GroupAction, z: &DVector<f64>) -> DVector<f64> {
    let n = action.n();
    let d = action.d();
    let p = PhasePoint::from_flat(z, n);
    let xm = action.element(p.t.as_slice());
    let mut r = DVector::zeros(d + 2 * n);
    r.rows_mut(0, d).copy_from(&moment_map(action, &p.x, &p.xi));
    r.rows_mut(d, n).copy_from(&(&xm * &p.x));
    r.rows_mut(d + n, n).copy_from(&(&xm * &p.xi));
    r
}

pub fn residual_jacobian(action: &GroupAction, z: &DVector<f64>) -> DMatrix<f64> {
    let n = action.n();
    let d = action.d();
    let p = PhasePoint::from_flat(z, n);
    let xm = action.element(p.t.as_slice());
    let mut j = DMatrix::zeros(d + 2 * n, 2 * n + d);
    for (k, g) in action.generators().iter().enumerate() {
        let gtxi = g.transpose() * &p.xi;
        let gx = g * &p.x;
        let gxi = g * &p.xi;
        for i in 0..n {
            j[(k, i)] = gtxi[i];
            j[(k, n + i)] = gx[i];
            j[(d + i, 2 * n + k)] = gx[i];
            j[(d + n + i, 2 * n + k)] = gxi[i];
        }
    }
    j.view_mut((d, 0), (n, n)).copy_from(&xm);
    j.view_mut((d + n, n), (n, n)).copy_from(&xm);
    j
}

/// Smallest singular value of the residual Jacobian below which a point is
/// treated as lying on a singular stratum.
pub const SINGULAR_MARGIN: f64 = 1e-2;

/// Projection onto the critical set in two stages: Newton on `m = 0` in
/// `(x, ξ)` with the radial direction removed (the moment map is quadratic,
/// so a plain minimum-norm step just shrinks the point), then orthogonal
/// projection of `t` onto the common isotropy algebra of `(x, ξ)`.
///
/// Fails when the limit is (close to) a point with more than the principal
/// isotropy.
pub fn project_to_crit(action: &GroupAction, seed: &PhasePoint, kappa: usize) -> Result<PhasePoint, CriticalError> {
    let n = action.n();
    let d = action.d();
    let mut w = DVector::zeros(2 * n);
    w.rows_mut(0, n).copy_from(&seed.x);
    w.rows_mut(n, n).copy_from(&seed.xi);
    let scale = 1.0 + w.norm_squared();
    let m_of = |w: &DVector<f64>| moment_map(action, &w.rows(0, n).into_owned(), &w.rows(n, n).into_owned());
    let mut m = m_of(&w);
    for _ in 0..60 {
        if m.norm() <= 1e-15 * scale {
            break;
        }
        let mut j = DMatrix::zeros(d, 2 * n);
        let x = w.rows(0, n).into_owned();
        let xi = w.rows(n, n).into_owned();
        for (k, g) in action.generators().iter().enumerate() {
            let gtxi = g.transpose() * &xi;
            let gx = g * &x;
            for i in 0..n {
                j[(k, i)] = gtxi[i];
                j[(k, n + i)] = gx[i];
            }
        }
        let wn = w.norm();
        if wn > 0.0 {
            let u = &w / wn;
            let ju = &j * &u;
            j -= ju * u.transpose();
        }
        let step = linalg::pinv_solve(&j, &m);
        w -= step;
        m = m_of(&w);
    }
    if m.norm() > 1e-12 * scale {
        return Err(CriticalError::NoConvergence(m.norm()));
    }
    let x = w.rows(0, n).into_owned();
    let xi = w.rows(n, n).into_owned();
    let iso_basis = action.isotropy_algebra_pair(&x, &xi).basis;
    let t = linalg::project(&seed.t, &iso_basis);
    let p = PhasePoint { x, xi, t };
    let z = p.to_flat();
    let iso = iso_basis.len();
    let sv = {
        let mut s: Vec<f64> = linalg::singular_values(&residual_jacobian(action, &z)).iter().cloned().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s.get(2 * kappa - 1).cloned().unwrap_or(0.0)
    };
    if iso != action.d() - kappa || sv < SINGULAR_MARGIN {
        return Err(CriticalError::SingularStratum {
            isotropy_dim: iso,
            margin: sv,
        });
    }
    Ok(p)
}

/// Project and attach transversal data; the weight is `a / sqrt|det|`.
pub fn crit_sample(action: &GroupAction, amplitude: &Amplitude, seed: &PhasePoint, kappa: usize) -> Result<CritSample, CriticalError> {
    let p = project_to_crit(action, seed, kappa)?;
    let th = transversal_hessian(action, &p, kappa)?;
    let weight = amplitude.eval_vec(&p.x, &p.xi, &p.t) / th.det_abs.sqrt();
    Ok(CritSample {
        point: p,
        tangent_dim: th.tangent_dim,
        nonzero_spectrum: th.nonzero_spectrum,
        transversal_det_abs: th.det_abs,
        signature: th.signature,
        weight,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceMethod {
    SlabMonteCarlo,
    ChartGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurfaceConfig {
    pub method: SurfaceMethod,
    pub eps_slab: f64,
    pub budget: u64,
    /// Extra slab widths reported as a convergence sweep.
    pub eps_sweep: Vec<f64>,
    pub grid_nodes: usize,
    pub shards: usize,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig {
            method: SurfaceMethod::SlabMonteCarlo,
            eps_slab: 2e-2,
            budget: 2_000_000,
            eps_sweep: Vec::new(),
            grid_nodes: 64,
            shards: 64,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub l0: f64,
    pub stderr_estimate: f64,
    pub n_accepted: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct L0Estimate {
    pub l0: f64,
    pub stderr_estimate: f64,
    pub method: SurfaceMethod,
    pub n_accepted: u64,
    pub contamination_fraction: f64,
    pub eps_sweep: Vec<SweepPoint>,
    pub flags: Vec<String>,
}

/// Volume of the unit ball in `R^k`.
fn ball_volume(k: usize) -> f64 {
    crate::amplitude::sphere_area(k) / k as f64
}

/// Integrate `a / |det|^{1/2}` over the regular critical set.
pub fn integrate_l0(action: &GroupAction, amplitude: &Amplitude, config: &SurfaceConfig, seed: u64) -> Result<L0Estimate, CriticalError> {
    amplitude.check(action.n(), action.d())?;
    let mut flags = Vec::new();
    if amplitude.kind == AmplitudeKind::GaussianProduct {
        flags.push("gaussian amplitude: support truncated to a box".to_string());
    }
    let mut est = match config.method {
        SurfaceMethod::ChartGrid => chart_grid(action, amplitude, config.grid_nodes)?,
        SurfaceMethod::SlabMonteCarlo => {
            let k = kappa(action);
            let sel = SlabSelector::new(action, amplitude, k)?;
            let main = sel.run(amplitude, config.eps_slab, config.budget, config.shards, seed)?;
            let mut sweep = Vec::new();
            for &eps in &config.eps_sweep {
                let r = sel.run(amplitude, eps, config.budget, config.shards, seed)?;
                sweep.push(SweepPoint {
                    eps,
                    l0: r.l0,
                    stderr_estimate: r.stderr_estimate,
                    n_accepted: r.n_accepted,
                });
            }
            L0Estimate { eps_sweep: sweep, ..main }
        }
    };
    est.flags.extend(flags);
    Ok(est)
}

/// Slab Monte Carlo state: chosen defining functions and the sampling box.
struct SlabSelector {
    action: GroupAction,
    kappa: usize,
    rows: Vec<usize>,
    bounds: Vec<(f64, f64)>,
}

impl SlabSelector {
    fn new(action: &GroupAction, amplitude: &Amplitude, kappa: usize) -> Result<Self, CriticalError> {
        let centre = PhasePoint::new(&amplitude.x.center, &amplitude.xi.center, &amplitude.alg.center);
        let reference = project_to_crit(action, &centre, kappa)?;
        let j = residual_jacobian(action, &reference.to_flat());
        Ok(SlabSelector {
            action: action.clone(),
            kappa,
            rows: pivoted_rows(&j, 2 * kappa),
            bounds: amplitude.support_box(),
        })
    }

    fn run(&self, amplitude: &Amplitude, eps: f64, budget: u64, shards: usize, seed: u64) -> Result<L0Estimate, CriticalError> {
        let dim = self.bounds.len();
        let box_vol: f64 = self.bounds.iter().map(|(a, b)| b - a).product();
        let shards = shards.max(1) as u64;
        let per = budget / shards;
        let total = per * shards;
        let ball = ball_volume(2 * self.kappa) * eps.powi(2 * self.kappa as i32);
        let results: Vec<(f64, f64, u64, u64)> = (0..shards)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(s);
                let mut sum = 0.0;
                let mut sum2 = 0.0;
                let mut acc = 0u64;
                let mut bad = 0u64;
                let mut z = DVector::zeros(dim);
                for _ in 0..per {
                    for (i, (a, b)) in self.bounds.iter().enumerate() {
                        z[i] = a + (b - a) * rng.random::<f64>();
                    }
                    let r = residual(&self.action, &z);
                    let f2: f64 = self.rows.iter().map(|&i| r[i] * r[i]).sum();
                    if f2 >= eps * eps {
                        continue;
                    }
                    acc += 1;
                    let jac = residual_jacobian(&self.action, &z).select_rows(self.rows.iter());
                    let jf = (&jac * jac.transpose()).determinant().max(0.0).sqrt();
                    let seed_pt = PhasePoint::from_flat(&z, self.action.n());
                    match crit_sample(&self.action, amplitude, &seed_pt, self.kappa) {
                        Ok(c) => {
                            let w = jf * c.weight;
                            sum += w;
                            sum2 += w * w;
                        }
                        Err(_) => bad += 1,
                    }
                }
                (sum, sum2, acc, bad)
            })
            .collect();
        let sums: Vec<f64> = results.iter().map(|r| r.0).collect();
        let sums2: Vec<f64> = results.iter().map(|r| r.1).collect();
        let accepted: u64 = results.iter().map(|r| r.2).sum();
        let bad: u64 = results.iter().map(|r| r.3).sum();
        if accepted == 0 {
            return Err(CriticalError::NoSamples);
        }
        let nf = total as f64;
        let mean = pairwise_sum(&sums) / nf;
        let var = (pairwise_sum(&sums2) / nf - mean * mean).max(0.0);
        let factor = box_vol / ball;
        Ok(L0Estimate {
            l0: factor * mean,
            stderr_estimate: factor * (var / nf).sqrt(),
            method: SurfaceMethod::SlabMonteCarlo,
            n_accepted: accepted,
            contamination_fraction: bad as f64 / accepted as f64,
            eps_sweep: Vec::new(),
            flags: Vec::new(),
        })
    }
}

/// Greedy pivoted selection of `k` well-conditioned rows.
pub fn pivoted_rows(j: &DMatrix<f64>, k: usize) -> Vec<usize> {
    let mut rows: Vec<DVector<f64>> = (0..j.nrows()).map(|i| j.row(i).transpose()).collect();
    let mut chosen = Vec::new();
    for _ in 0..k.min(rows.len()) {
        let mut best = None;
        let mut best_norm = 0.0;
        for (i, r) in rows.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let nr = r.norm();
            if nr > best_norm * (1.0 + 1e-12) {
                best_norm = nr;
                best = Some(i);
            }
        }
        let Some(b) = best else { break };
        chosen.push(b);
        let q = rows[b].clone() / best_norm;
        for r in rows.iter_mut() {
            let c = q.dot(r);
            r.axpy(-c, &q, 1.0);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Plane rotations: integrate over `(r, θ, s) -> (r x̂, s x̂, 0)` with surface
/// element `sqrt(r² + s²)`, comparing against a rule with two thirds the nodes.
fn chart_grid(action: &GroupAction, amplitude: &Amplitude, nodes: usize) -> Result<L0Estimate, CriticalError> {
    if action.n() != 2 || action.d() != 1 {
        return Err(CriticalError::ChartGridUnsupported);
    }
    let fine = chart_grid_value(action, amplitude, nodes)?;
    let coarse = chart_grid_value(action, amplitude, ((nodes as f64) / 1.5).ceil() as usize)?;
    let mut flags = Vec::new();
    if amplitude.kind == AmplitudeKind::GaussianProduct {
        flags.push("gaussian amplitude: support truncated to a box".to_string());
    }
    Ok(L0Estimate {
        l0: fine,
        stderr_estimate: (fine - coarse).abs(),
        method: SurfaceMethod::ChartGrid,
        n_accepted: 0,
        contamination_fraction: 0.0,
        eps_sweep: Vec::new(),
        flags,
    })
}

fn chart_grid_value(action: &GroupAction, amplitude: &Amplitude, nodes: usize) -> Result<f64, CriticalError> {
    let kind = amplitude.kind;
    let (x0, rx) = (&amplitude.x.center, amplitude.x.reach(kind));
    let (xi0, rxi) = (&amplitude.xi.center, amplitude.xi.reach(kind));
    let xn = (x0[0] * x0[0] + x0[1] * x0[1]).sqrt();
    let th0 = x0[1].atan2(x0[0]);
    let (tlo, thi) = if kind == AmplitudeKind::BumpProduct && xn > rx {
        let h = (rx / xn).asin();
        (th0 - h, th0 + h)
    } else {
        (-std::f64::consts::PI, std::f64::consts::PI)
    };
    let panels = nodes.div_ceil(16).max(1);
    let th_rule = Rule::composite(tlo, thi, panels, 16);
    let unit = Rule::composite(-1.0, 1.0, panels, 16);
    let t0 = vec![0.0; 1];
    let chord = |c: f64, h2: f64, r: f64| -> Option<(f64, f64)> {
        if h2 >= r * r {
            None
        } else {
            let half = (r * r - h2).sqrt();
            Some((c - half, c + half))
        }
    };
    let terms: Result<Vec<f64>, CriticalError> = th_rule
        .nodes
        .par_iter()
        .zip(th_rule.weights.par_iter())
        .map(|(&th, &wth)| {
            let (sn, cs) = th.sin_cos();
            let r0 = x0[0] * cs + x0[1] * sn;
            let Some((rlo, rhi)) = chord(r0, xn * xn - r0 * r0, rx) else {
                return Ok(0.0);
            };
            let rlo = rlo.max(0.0);
            if rhi <= rlo {
                return Ok(0.0);
            }
            let s0 = xi0[0] * cs + xi0[1] * sn;
            let xin2 = xi0[0] * xi0[0] + xi0[1] * xi0[1];
            let Some((slo, shi)) = chord(s0, xin2 - s0 * s0, rxi) else {
                return Ok(0.0);
            };
            let mut acc = Vec::new();
            for (&u, &wu) in unit.nodes.iter().zip(&unit.weights) {
                let r = 0.5 * (rlo + rhi) + 0.5 * (rhi - rlo) * u;
                let wr = 0.5 * (rhi - rlo) * wu;
                for (&v, &wv) in unit.nodes.iter().zip(&unit.weights) {
                    let s = 0.5 * (slo + shi) + 0.5 * (shi - slo) * v;
                    let ws = 0.5 * (shi - slo) * wv;
                    let p = PhasePoint::new(&[r * cs, r * sn], &[s * cs, s * sn], &t0);
                    let a = amplitude.eval_vec(&p.x, &p.xi, &p.t);
                    if a == 0.0 {
                        continue;
                    }
                    let th = transversal_hessian(action, &p, 1)?;
                    acc.push(wr * ws * a * (r * r + s * s).sqrt() / th.det_abs.sqrt());
                }
            }
            Ok(wth * pairwise_sum(&acc))
        })
        .collect();
    Ok(pairwise_sum(&terms?))
}

/// Critical samples seeded uniformly in the amplitude support box.
pub fn sample_crit(action: &GroupAction, amplitude: &Amplitude, count: usize, seed: u64) -> Vec<Result<CritSample, CriticalError>> {
    let k = kappa(action);
    let bounds = amplitude.support_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z = DVector::from_iterator(bounds.len(), bounds.iter().map(|(a, b)| a + (b - a) * rng.random::<f64>()));
            crit_sample(action, amplitude, &PhasePoint::from_flat(&z, action.n()), k)
        })
        .collect()
}
