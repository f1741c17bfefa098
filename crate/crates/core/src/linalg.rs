//! Small dense linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::tol::RANK_REL_TOL;

/// Threshold below which a singular value is treated as zero.
pub fn rank_threshold(largest: f64) -> f64 {
    RANK_REL_TOL * largest.max(1.0)
}

/// Full SVD of `m`, padding with zero rows so that `V` is square.
fn full_svd(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    (svd.singular_values, svd.v_t.expect("v_t requested"))
}

pub fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(0);
    }
    m.clone().svd(false, false).singular_values
}

pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values(m);
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let thr = rank_threshold(smax);
    s.iter().filter(|&&v| v > thr).count()
}

/// Orthonormal basis of the kernel of `m` (vectors of length `m.ncols()`).
pub fn null_space(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let c = m.ncols();
    if c == 0 {
        return Vec::new();
    }
    if m.nrows() == 0 {
        return (0..c).map(|i| unit(c, i)).collect();
    }
    let (s, vt) = full_svd(m);
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let thr = rank_threshold(smax);
    let mut out = Vec::new();
    for i in 0..c {
        let sv = if i < s.len() { s[i] } else { 0.0 };
        if sv <= thr {
            out.push(canonical_sign(vt.row(i).transpose()));
        }
    }
    out
}

/// Orthonormal basis of the column space of `m`.
pub fn column_space(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let thr = rank_threshold(smax);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > thr)
        .map(|(i, _)| canonical_sign(u.column(i).into_owned()))
        .collect()
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` in `R^dim`.
pub fn orthogonal_complement(basis: &[DVector<f64>], dim: usize) -> Vec<DVector<f64>> {
    if basis.is_empty() {
        return (0..dim).map(|i| unit(dim, i)).collect();
    }
    null_space(&rows_matrix(basis, dim))
}

/// Matrix whose rows are the given vectors.
pub fn rows_matrix(vs: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(vs.len(), dim);
    for (i, v) in vs.iter().enumerate() {
        m.row_mut(i).copy_from(&v.transpose());
    }
    m
}

/// Matrix whose columns are the given vectors.
pub fn columns_matrix(vs: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, vs.len());
    for (i, v) in vs.iter().enumerate() {
        m.column_mut(i).copy_from(v);
    }
    m
}

/// Modified Gram-Schmidt; vectors whose residual falls below `tol` are dropped.
pub fn gram_schmidt(vs: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let nrm = w.norm();
        if nrm > tol {
            out.push(w / nrm);
        }
    }
    out
}

/// Orthogonal projection of `v` onto the span of the orthonormal `basis`.
pub fn project(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for q in basis {
        out.axpy(q.dot(v), q, 1.0);
    }
    out
}

/// Does `span(sub)` lie in `span(basis)` (orthonormal) up to `tol`?
pub fn span_contained(sub: &[DVector<f64>], basis: &[DVector<f64>], tol: f64) -> bool {
    sub.iter().all(|v| (v - project(v, basis)).norm() <= tol * v.norm().max(1.0))
}

pub fn unit(dim: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[i] = 1.0;
    v
}

/// Flip the sign so that the entry of largest magnitude is positive.
pub fn canonical_sign(v: DVector<f64>) -> DVector<f64> {
    let mut best = 0usize;
    for i in 0..v.len() {
        if v[i].abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        -v
    } else {
        v
    }
}

/// Symmetric eigen-decomposition with eigenvalues sorted ascending.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(m.nrows(), idx.len());
    for (k, &i) in idx.iter().enumerate() {
        vecs.column_mut(k).copy_from(&eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Moore-Penrose pseudo-inverse applied to `b`, with the crate rank threshold.
pub fn pinv_solve(m: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let thr = rank_threshold(smax);
    svd.solve(b, thr).expect("svd factors computed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix_is_complete() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let ns = null_space(&m);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((m.clone() * v).norm() < 1e-14);
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn complement_dimensions_add_up() {
        let b = vec![DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]) / 2f64.sqrt()];
        let c = orthogonal_complement(&b, 4);
        assert_eq!(c.len(), 3);
        for v in &c {
            assert!(v.dot(&b[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_ignores_tiny_singular_values() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-12]);
        assert_eq!(numerical_rank(&m), 1);
    }
}
