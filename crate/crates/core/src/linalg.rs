//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SVD};

/// Orthonormal basis of the numerical column space of `a`, keeping singular
/// directions with `σ > rel_tol · σ_max`, together with all singular values
/// in decreasing order.
pub fn column_space(a: &DMatrix<f64>, rel_tol: f64) -> (DMatrix<f64>, Vec<f64>) {
    let svd = SVD::new(a.clone(), true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_tol * smax)
        .collect();
    let mut basis = DMatrix::zeros(a.nrows(), keep.len());
    for (col, &i) in keep.iter().enumerate() {
        basis.set_column(col, &u.column(i));
    }
    (basis, sigma)
}

/// `‖v - Q Qᵀ v‖ / ‖v‖` for an orthonormal `Q`; zero vectors give zero.
pub fn relative_residual(q: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let norm = v.norm();
    if norm == 0.0 {
        return 0.0;
    }
    // Two passes keep the residual accurate when it is tiny.
    let mut r = v - q * (q.transpose() * v);
    r -= q * (q.transpose() * &r);
    r.norm() / norm
}

/// Least-squares solution of `a x ≈ b` through the SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = SVD::new(a.clone(), true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-13 * a.nrows().max(a.ncols()) as f64;
    svd.solve(b, eps).expect("both factors computed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstsq_recovers_exact_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 2.0]);
        let x = DVector::from_vec(vec![2.0, -1.0]);
        let b = &a * &x;
        let got = lstsq(&a, &b);
        assert!((got - x).norm() < 1e-14);
    }

    #[test]
    fn column_space_drops_dependent_columns() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        let (q, sigma) = column_space(&a, 1e-10);
        assert_eq!(q.ncols(), 2);
        assert_eq!(sigma.len(), 3);
        let v = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        assert!((relative_residual(&q, &v) - 1.0).abs() < 1e-14);
    }
}
