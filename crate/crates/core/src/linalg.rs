//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::SymmetricEigen;

use crate::{Matrix, Vector};

/// Orthonormalizes `vectors` by modified Gram-Schmidt, dropping any vector
/// whose residual norm falls below `tol`.
pub fn orthonormalize(vectors: &[Vector], tol: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        // two passes keep the basis orthogonal to machine precision
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w -= q * c;
            }
        }
        let norm = w.norm();
        if norm > tol {
            out.push(w / norm);
        }
    }
    out
}

/// Orthonormal basis of the orthogonal complement of `span` in `R^dim`.
pub fn complement(span: &[Vector], dim: usize) -> Vec<Vector> {
    let mut all: Vec<Vector> = orthonormalize(span, 1e-12);
    let k = all.len();
    for i in 0..dim {
        all.push(Vector::from_fn(dim, |r, _| if r == i { 1.0 } else { 0.0 }));
    }
    orthonormalize(&all, 1e-8).split_off(k)
}

/// Matrix whose columns are the given vectors.
pub fn columns(vectors: &[Vector], dim: usize) -> Matrix {
    if vectors.is_empty() {
        return Matrix::zeros(dim, 0);
    }
    Matrix::from_columns(vectors)
}

/// Orthogonal projector onto the span of an orthonormal family.
pub fn projector(basis: &[Vector], dim: usize) -> Matrix {
    let q = columns(basis, dim);
    &q * q.transpose()
}

/// Eigenvalues and eigenvectors of a symmetric matrix, sorted ascending.
pub fn sorted_eigen(m: &Matrix) -> (Vec<f64>, Vec<Vector>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = idx
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (values, vectors)
}

/// Groups sorted values into `(value, multiplicity)` clusters. Consecutive
/// values closer than `gap` share a cluster; the cluster value is the mean.
pub fn cluster(sorted: &[f64], gap: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut members: Vec<f64> = Vec::new();
    for &v in sorted {
        if let Some(&last) = members.last() {
            if v - last >= gap {
                out.push((mean(&members), members.len()));
                members.clear();
            }
        }
        members.push(v);
    }
    if !members.is_empty() {
        out.push((mean(&members), members.len()));
    }
    out
}

/// Cluster representative; round-off around zero is reported as exact zero.
pub(crate) fn mean(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    if m.abs() < 1e-14 {
        0.0
    } else {
        m
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Orthonormal bases of the range of `m` and of its kernel, splitting the
/// singular values at `threshold`.
pub fn range_and_kernel(m: &Matrix, threshold: f64) -> (Vec<Vector>, Vec<Vector>) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors");
    let v_t = svd.v_t.expect("right singular vectors");
    let mut range = Vec::new();
    let mut kept_rows = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > threshold {
            range.push(u.column(i).into_owned());
            kept_rows.push(v_t.row(i).transpose());
        }
    }
    let kernel = complement(&kept_rows, m.ncols());
    (range, kernel)
}

/// Moore-Penrose pseudo-inverse with singular values below `threshold`
/// treated as zero.
pub fn pseudo_inverse(m: &Matrix, threshold: f64) -> Matrix {
    m.clone()
        .pseudo_inverse(threshold)
        .expect("threshold is nonnegative")
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
