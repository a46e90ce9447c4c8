//! Dense eigen/singular value helpers with deterministic ordering.

use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending, eigenvectors as
/// columns in the same order with their first significant entry made positive.
pub fn symmetric_eigen_ascending(sym: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = sym.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        fix_sign(col.as_mut_slice());
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// Flips `v` so that its first entry above a relative threshold is positive.
pub fn fix_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return;
    }
    if let Some(lead) = v.iter().find(|x| x.abs() > 1e-9 * scale) {
        if *lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Singular values in non-increasing order, padded with zeros to `len`.
pub fn singular_values_desc(a: &DMatrix<f64>, len: usize) -> Vec<f64> {
    let mut values: Vec<f64> = if a.nrows() == 0 || a.ncols() == 0 {
        Vec::new()
    } else {
        a.clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect()
    };
    values.sort_by(|a, b| b.total_cmp(a));
    values.resize(len.max(values.len()), 0.0);
    values.truncate(len);
    values
}

/// Largest absolute entry.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Orthonormal basis (columns) of the orthogonal complement of `r` in `ℝᵏ`,
/// built from the Householder reflector sending `r/|r|` to the last basis vector.
pub fn complement_basis(r: &[f64]) -> DMatrix<f64> {
    let k = r.len();
    let h = householder_to_last(r);
    // Rows 0..k-1 of H span r⊥; as columns of Hᵀ = H.
    h.columns(0, k - 1).into_owned()
}

/// Symmetric orthogonal `H` with `H·(r/|r|) = e_last`. Identity when `r` is zero
/// or already aligned with `e_last`.
pub fn householder_to_last(r: &[f64]) -> DMatrix<f64> {
    let k = r.len();
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut h = DMatrix::identity(k, k);
    if norm == 0.0 {
        return h;
    }
    let mut u: Vec<f64> = r.iter().map(|x| x / norm).collect();
    u[k - 1] -= 1.0;
    let uu: f64 = u.iter().map(|x| x * x).sum();
    if uu <= 1e-30 {
        return h;
    }
    for i in 0..k {
        for j in 0..k {
            h[(i, j)] -= 2.0 * u[i] * u[j] / uu;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_with_sign_convention() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (vals, vecs) = symmetric_eigen_ascending(m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        assert!(vecs[(0, 0)] > 0.0 && vecs[(0, 1)] > 0.0);
    }

    #[test]
    fn singular_values_padding() {
        let a = DMatrix::from_row_slice(1, 3, &[3.0, 0.0, 4.0]);
        assert_eq!(singular_values_desc(&a, 3), vec![5.0, 0.0, 0.0]);
        assert_eq!(singular_values_desc(&a, 1), vec![5.0]);
    }

    #[test]
    fn householder_maps_to_last_axis() {
        for r in [vec![1.0, 2.0, 3.0], vec![0.0, 0.0, 2.0], vec![0.0, 0.0, -1.0], vec![5.0]] {
            let h = householder_to_last(&r);
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            let out = &h * nalgebra::DVector::from_vec(r.clone());
            let k = r.len();
            for i in 0..k - 1 {
                assert!(out[i].abs() < 1e-12);
            }
            assert!((out[k - 1] - norm).abs() < 1e-12);
            assert!(max_abs_diff(&(&h * h.transpose()), &DMatrix::identity(k, k)) < 1e-12);
        }
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let r = [0.3, -1.0, 2.0, 0.5];
        let b = complement_basis(&r);
        assert_eq!(b.ncols(), 3);
        let rv = DMatrix::from_column_slice(4, 1, &r);
        assert!(max_abs(&(b.transpose() * rv)) < 1e-12);
        assert!(max_abs_diff(&(b.transpose() * &b), &DMatrix::identity(3, 3)) < 1e-12);
    }
}
