//! Central finite differences with one Richardson step.

use nalgebra::{DMatrix, DVector};

/// Gradient by central differences, refined with Richardson extrapolation.
pub fn gradient(f: impl Fn(&DVector<f64>) -> f64, z: &DVector<f64>, h: f64) -> DVector<f64> {
    let n = z.len();
    let mut g = DVector::zeros(n);
    let mut w = z.clone();
    let diff = |i: usize, h: f64, w: &mut DVector<f64>| {
        let orig = w[i];
        w[i] = orig + h;
        let fp = f(w);
        w[i] = orig - h;
        let fm = f(w);
        w[i] = orig;
        (fp - fm) / (2.0 * h)
    };
    for i in 0..n {
        let d1 = diff(i, h, &mut w);
        let d2 = diff(i, 0.5 * h, &mut w);
        g[i] = (4.0 * d2 - d1) / 3.0;
    }
    g
}

/// Hessian by central differences, refined with Richardson extrapolation.
pub fn hessian(f: impl Fn(&DVector<f64>) -> f64, z: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let est = |h: f64| -> DMatrix<f64> {
        let n = z.len();
        let mut m = DMatrix::zeros(n, n);
        let mut w = z.clone();
        let f0 = f(&w);
        for i in 0..n {
            let zi = w[i];
            w[i] = zi + h;
            let fp = f(&w);
            w[i] = zi - h;
            let fm = f(&w);
            w[i] = zi;
            m[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in (i + 1)..n {
                let zj = w[j];
                let corner = |si: f64, sj: f64, w: &mut DVector<f64>| {
                    w[i] = zi + si * h;
                    w[j] = zj + sj * h;
                    let v = f(w);
                    w[i] = zi;
                    w[j] = zj;
                    v
                };
                let v = (corner(1.0, 1.0, &mut w) - corner(1.0, -1.0, &mut w) - corner(-1.0, 1.0, &mut w)
                    + corner(-1.0, -1.0, &mut w))
                    / (4.0 * h * h);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    };
    let a = est(h);
    let b = est(0.5 * h);
    (b * 4.0 - a) / 3.0
}

/// Jacobian of a vector map by central differences with Richardson refinement.
pub fn jacobian(f: impl Fn(&DVector<f64>) -> DVector<f64>, z: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let m = f(z).len();
    let n = z.len();
    let mut j = DMatrix::zeros(m, n);
    let mut w = z.clone();
    for i in 0..n {
        let orig = w[i];
        let col = |h: f64, w: &mut DVector<f64>| {
            w[i] = orig + h;
            let fp = f(w);
            w[i] = orig - h;
            let fm = f(w);
            w[i] = orig;
            (fp - fm) / (2.0 * h)
        };
        let c1 = col(h, &mut w);
        let c2 = col(0.5 * h, &mut w);
        j.column_mut(i).copy_from(&((c2 * 4.0 - c1) / 3.0));
    }
    j
}
