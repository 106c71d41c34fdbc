//! Regression containers and the covariance conventions shared by every
//! estimator in the crate.
//!
//! The sample covariance here is the uncentered second moment
//!
//! ```text
//!     S = (1/n) X'X
//! ```
//!
//! with no column centering and no (n-1) correction. All downstream
//! quantities (restricted eigenvalues, irrepresentable checks, rate
//! calculators) assume this convention, so it lives in one place.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// A fixed design/response pair `(X, y)` with `n` rows and `p` columns.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    y: Array1<f64>,
    x: Array2<f64>,
}

impl RegressionProblem {
    /// Validates shapes and finiteness. `y.len()` must equal `X.nrows()`,
    /// both dimensions must be positive, and every entry must be finite.
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidInput(format!(
                "design matrix must be non-empty, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        if y.len() != x.nrows() {
            return Err(Error::InvalidInput(format!(
                "response length {} does not match {} design rows",
                y.len(),
                x.nrows()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response vector".into()));
        }
        Ok(Self { y, x })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }
}

/// A coefficient vector together with its exact nonzero support.
///
/// The support is derived, never stored independently, so it cannot drift
/// out of sync with the values.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    values: Vec<f64>,
}

impl Coefficients {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(p: usize) -> Self {
        Self { values: vec![0.0; p] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Indices with exactly nonzero entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    /// Elementwise sign pattern in {-1, 0, +1}.
    pub fn signs(&self) -> Vec<i8> {
        self.values
            .iter()
            .map(|v| {
                if *v > 0.0 {
                    1
                } else if *v < 0.0 {
                    -1
                } else {
                    0
                }
            })
            .collect()
    }
}

/// Symmetric `p x p` covariance with helpers used by the diagnostics.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    m: Array2<f64>,
}

impl CovarianceMatrix {
    /// Accepts a square matrix, symmetrizing tiny asymmetries and rejecting
    /// ones beyond `1e-8` relative to the largest entry.
    pub fn new(m: Array2<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "covariance must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("covariance matrix".into()));
        }
        let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let p = m.nrows();
        let mut sym = m.clone();
        for j in 0..p {
            for k in (j + 1)..p {
                let gap = (m[[j, k]] - m[[k, j]]).abs();
                if gap > 1e-8 * scale {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({j},{k}): {} vs {}",
                        m[[j, k]],
                        m[[k, j]]
                    )));
                }
                let avg = 0.5 * (m[[j, k]] + m[[k, j]]);
                sym[[j, k]] = avg;
                sym[[k, j]] = avg;
            }
        }
        Ok(Self { m: sym })
    }

    pub fn p(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.m
    }

    /// Smallest eigenvalue, computed by a symmetric eigensolver.
    pub fn min_eigenvalue(&self) -> f64 {
        crate::linalg::symmetric_eigenvalues(&self.m)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Positive semidefinite up to `tol` on the smallest eigenvalue.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Principal submatrix on `idx` (indices ascending, no duplicates).
    pub fn submatrix(&self, idx: &[usize]) -> Array2<f64> {
        let k = idx.len();
        let mut out = Array2::zeros((k, k));
        for (a, &ja) in idx.iter().enumerate() {
            for (b, &jb) in idx.iter().enumerate() {
                out[[a, b]] = self.m[[ja, jb]];
            }
        }
        out
    }
}

/// Uncentered sample covariance `(1/n) X'X`.
///
/// Summation is sequential over rows in ascending index order, so reruns
/// are bit-identical.
pub fn sample_covariance(x: &Array2<f64>) -> Result<CovarianceMatrix> {
    let n = x.nrows();
    let p = x.ncols();
    if n == 0 || p == 0 {
        return Err(Error::InvalidInput("empty design matrix".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("design matrix".into()));
    }
    let nf = n as f64;
    let mut m = Array2::zeros((p, p));
    for j in 0..p {
        for k in j..p {
            let mut s = 0.0;
            for i in 0..n {
                s += x[[i, j]] * x[[i, k]];
            }
            let v = s / nf;
            m[[j, k]] = v;
            m[[k, j]] = v;
        }
    }
    CovarianceMatrix::new(m)
}

/// The l_q norm of a vector for `q` in `[1, inf]`; `q = f64::INFINITY`
/// gives the max norm. Entries are rescaled by the largest magnitude
/// before powering, so large `q` does not overflow.
pub fn vector_norm(v: &[f64], q: f64) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::InvalidInput("norm of an empty vector".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("vector for norm".into()));
    }
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidInput(format!(
            "norm order must be in [1, inf], got {q}"
        )));
    }
    let max = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if max == 0.0 {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return Ok(max);
    }
    let mut s = 0.0;
    for x in v {
        s += (x.abs() / max).powf(q);
    }
    Ok(max * s.powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    // Independent of the implementation: accumulate over column pairs with
    // the row loop outermost.
    fn covariance_oracle(x: &Array2<f64>) -> Array2<f64> {
        let (n, p) = (x.nrows(), x.ncols());
        let mut m = Array2::zeros((p, p));
        for i in 0..n {
            for j in 0..p {
                for k in 0..p {
                    m[[j, k]] += x[[i, j]] * x[[i, k]] / n as f64;
                }
            }
        }
        m
    }

    #[test]
    fn covariance_matches_brute_force() {
        let x = array![[1.0, 2.0, -1.0], [0.5, -0.25, 3.0], [2.0, 1.0, 0.0], [-1.0, 0.5, 1.5]];
        let got = sample_covariance(&x).unwrap();
        let want = covariance_oracle(&x);
        for j in 0..3 {
            for k in 0..3 {
                assert!((got.as_array()[[j, k]] - want[[j, k]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn covariance_has_no_centering() {
        // Constant column: uncentered moment is c^2, centered would be 0.
        let x = array![[3.0], [3.0], [3.0]];
        let got = sample_covariance(&x).unwrap();
        assert!((got.as_array()[[0, 0]] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn covariance_is_psd() {
        let x = array![[1.0, 2.0], [-3.0, 0.5], [0.25, 4.0], [1.5, -2.0], [0.0, 1.0]];
        let s = sample_covariance(&x).unwrap();
        assert!(s.is_psd(1e-10));
    }

    #[test]
    fn norm_orders_agree_with_hand_values() {
        let v = [3.0, -4.0];
        assert!((vector_norm(&v, 1.0).unwrap() - 7.0).abs() < 1e-12);
        assert!((vector_norm(&v, 2.0).unwrap() - 5.0).abs() < 1e-12);
        assert!((vector_norm(&v, f64::INFINITY).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn norm_rejects_bad_orders_and_empty() {
        assert!(vector_norm(&[1.0], 0.5).is_err());
        assert!(vector_norm(&[1.0], f64::NAN).is_err());
        assert!(vector_norm(&[], 2.0).is_err());
    }

    #[test]
    fn norm_of_zero_vector_is_zero_for_all_orders() {
        for q in [1.0, 2.0, 7.5, f64::INFINITY] {
            assert_eq!(vector_norm(&[0.0, 0.0, 0.0], q).unwrap(), 0.0);
        }
    }

    #[test]
    fn support_tracks_exact_zeros() {
        let c = Coefficients::new(vec![0.0, 1.5, 0.0, -2.0, 1e-300]);
        assert_eq!(c.support(), vec![1, 3, 4]);
        assert_eq!(c.support_size(), 3);
        assert_eq!(c.signs(), vec![0, 1, 0, -1, 1]);
    }

    #[test]
    fn problem_rejects_shape_mismatch_and_nan() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        assert!(RegressionProblem::new(x.clone(), array![1.0]).is_err());
        assert!(RegressionProblem::new(array![[f64::NAN]], array![1.0]).is_err());
        assert!(RegressionProblem::new(x, array![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn covariance_rejects_asymmetry() {
        let m = array![[1.0, 0.5], [0.2, 1.0]];
        assert!(CovarianceMatrix::new(m).is_err());
    }
}
