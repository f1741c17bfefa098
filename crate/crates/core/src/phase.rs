//! The phase `ψ(x, ξ, t) = <X x, ξ>` with `X = Σ t_i X_i`, its derivatives and
//! the criticality predicate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::action::GroupAction;
use crate::tol::CRIT_REL_TOL;

/// A point of `R^n x R^n x g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: DVector<f64>,
    pub xi: DVector<f64>,
    pub t: DVector<f64>,
}

impl PhasePoint {
    pub fn new(x: &[f64], xi: &[f64], t: &[f64]) -> Self {
        PhasePoint {
            x: DVector::from_column_slice(x),
            xi: DVector::from_column_slice(xi),
            t: DVector::from_column_slice(t),
        }
    }

    /// Pack as `(x, ξ, t)`.
    pub fn to_flat(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.x.len() + self.xi.len() + self.t.len());
        let n = self.x.len();
        v.rows_mut(0, n).copy_from(&self.x);
        v.rows_mut(n, n).copy_from(&self.xi);
        v.rows_mut(2 * n, self.t.len()).copy_from(&self.t);
        v
    }

    pub fn from_flat(z: &DVector<f64>, n: usize) -> Self {
        let d = z.len() - 2 * n;
        PhasePoint {
            x: z.rows(0, n).into_owned(),
            xi: z.rows(n, n).into_owned(),
            t: z.rows(2 * n, d).into_owned(),
        }
    }

    pub fn norms(&self) -> (f64, f64, f64) {
        (self.x.norm(), self.xi.norm(), self.t.norm())
    }
}

/// `m_i(x, ξ) = <X_i x, ξ>`.
pub fn moment_map(action: &GroupAction, x: &DVector<f64>, xi: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(action.d(), action.generators().iter().map(|g| (g * x).dot(xi)))
}

pub fn psi(action: &GroupAction, p: &PhasePoint) -> f64 {
    p.t.dot(&moment_map(action, &p.x, &p.xi))
}

/// Gradient in the order `(x, ξ, t)`: `(X^T ξ, X x, m)`.
pub fn grad_psi(action: &GroupAction, p: &PhasePoint) -> DVector<f64> {
    let n = action.n();
    let d = action.d();
    let xm = action.element(p.t.as_slice());
    let mut g = DVector::zeros(2 * n + d);
    g.rows_mut(0, n).copy_from(&(xm.transpose() * &p.xi));
    g.rows_mut(n, n).copy_from(&(&xm * &p.x));
    g.rows_mut(2 * n, d).copy_from(&moment_map(action, &p.x, &p.xi));
    g
}

/// Hessian in the order `(x, ξ, t)`.
///
/// Blocks: `∂x_i∂ξ_j = X_ji`, `∂x_i∂t_k = <X_k e_i, ξ>`, `∂ξ_i∂t_k = (X_k x)_i`.
pub fn hess_psi(action: &GroupAction, p: &PhasePoint) -> DMatrix<f64> {
    let n = action.n();
    let d = action.d();
    let xm = action.element(p.t.as_slice());
    let mut h = DMatrix::zeros(2 * n + d, 2 * n + d);
    let xt = xm.transpose();
    h.view_mut((0, n), (n, n)).copy_from(&xt);
    h.view_mut((n, 0), (n, n)).copy_from(&xm);
    for (k, g) in action.generators().iter().enumerate() {
        let gx = g * &p.x;
        let gtxi = g.transpose() * &p.xi;
        for i in 0..n {
            h[(i, 2 * n + k)] = gtxi[i];
            h[(2 * n + k, i)] = gtxi[i];
            h[(n + i, 2 * n + k)] = gx[i];
            h[(2 * n + k, n + i)] = gx[i];
        }
    }
    h
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalityReport {
    pub critical: bool,
    pub grad_norm: f64,
    /// Tolerance after scaling by the size of the point.
    pub tol: f64,
    /// `m = 0`.
    pub on_zero_level: bool,
    /// `X x = 0` and `X ξ = 0`.
    pub in_isotropy: bool,
}

/// Criticality with the default relative tolerance.
pub fn is_critical(action: &GroupAction, p: &PhasePoint) -> CriticalityReport {
    is_critical_with_tol(action, p, CRIT_REL_TOL)
}

pub fn is_critical_with_tol(action: &GroupAction, p: &PhasePoint, rel_tol: f64) -> CriticalityReport {
    let (nx, nxi, nt) = p.norms();
    let tol = rel_tol * (1.0 + nx) * (1.0 + nxi) * (1.0 + nt);
    let grad = grad_psi(action, p);
    let xm = action.element(p.t.as_slice());
    let m = moment_map(action, &p.x, &p.xi);
    let on_zero_level = m.norm() <= tol;
    let in_isotropy = (&xm * &p.x).norm() <= tol && (&xm * &p.xi).norm() <= tol;
    CriticalityReport {
        critical: grad.norm() <= tol,
        grad_norm: grad.norm(),
        tol,
        on_zero_level,
        in_isotropy,
    }
}
