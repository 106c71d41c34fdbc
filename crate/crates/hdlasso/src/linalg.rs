//! Small dense linear algebra bridge.
//!
//! Data lives in `ndarray`; factorizations run through `nalgebra`. This
//! module keeps the conversions in one place so numeric modules stay free
//! of back-and-forth copies.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};

pub(crate) fn to_dmatrix(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Eigenvalues of a symmetric matrix, unordered.
pub(crate) fn symmetric_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    to_dmatrix(a).symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Solves `A x = b` for square `A` by LU with partial pivoting.
pub(crate) fn solve_linear(a: &Array2<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let lu = to_dmatrix(a).lu();
    let rhs = DVector::from_column_slice(b);
    lu.solve(&rhs).map(|x| x.iter().copied().collect())
}

/// Least squares `min |y - X b|_2` via SVD, returning the minimum-norm
/// solution for rank-deficient designs.
pub(crate) fn least_squares(x: &Array2<f64>, y: &Array1<f64>) -> Option<Vec<f64>> {
    let svd = to_dmatrix(x).svd(true, true);
    let rhs = DVector::from_iterator(y.len(), y.iter().copied());
    svd.solve(&rhs, 1e-12).ok().map(|b| b.iter().copied().collect())
}

/// Exact spectral radius via a dense eigensolver; meant for modest sizes.
pub(crate) fn spectral_radius_exact(a: &Array2<f64>) -> f64 {
    to_dmatrix(a)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Upper bound on the spectral radius via normalized repeated squaring:
/// `rho(A) <= |A^(2^k)|_F^(1/2^k)`, tightening as `k` grows. The bound is
/// rigorous in exact arithmetic, so `bound < 1` certifies stability.
pub(crate) fn spectral_radius_upper(a: &Array2<f64>, doublings: usize) -> f64 {
    let mut m = a.clone();
    let mut log_bound = 0.0f64;
    let mut weight = 1.0f64;
    for _ in 0..=doublings {
        let f = m.iter().map(|v| v * v).sum::<f64>().sqrt();
        if f == 0.0 {
            return 0.0;
        }
        log_bound += weight * f.ln();
        if log_bound / weight.max(1e-300) < -500.0 {
            // Far inside the unit disk already; avoid underflow.
            break;
        }
        weight *= 0.5;
        m.mapv_inplace(|v| v / f);
        m = m.dot(&m);
    }
    log_bound.exp()
}
