//! Finite-order linear processes `x_t = sum_l A_l eps_{t-l}`.

use ndarray::Array2;

use super::InnovationLaw;
use crate::error::{Error, Result};
use crate::problem::CovarianceMatrix;

/// Coefficients `A_0..A_L`. Construction drops trailing lags whose largest
/// row norm falls below `1e-8` of the lag-0 counterpart, so a spec built
/// from a decaying family is truncated at negligible loss.
#[derive(Debug, Clone)]
pub struct LinearProcessSpec {
    coeffs: Vec<Array2<f64>>,
    law: InnovationLaw,
}

impl LinearProcessSpec {
    pub fn new(coeffs: Vec<Array2<f64>>, law: InnovationLaw) -> Result<Self> {
        law.validate()?;
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("linear process needs at least A_0".into()));
        }
        let p = coeffs[0].nrows();
        for (l, a) in coeffs.iter().enumerate() {
            if a.nrows() != p || a.ncols() != p {
                return Err(Error::InvalidInput(format!(
                    "lag {l} matrix is {}x{}, expected {p}x{p}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("linear process lag {l} matrix")));
            }
        }
        let head = max_row_norm(&coeffs[0]);
        if head == 0.0 {
            return Err(Error::InvalidInput("lag-0 matrix is identically zero".into()));
        }
        let mut keep = coeffs.len();
        while keep > 1 && max_row_norm(&coeffs[keep - 1]) < 1e-8 * head {
            keep -= 1;
        }
        let mut coeffs = coeffs;
        coeffs.truncate(keep);
        Ok(Self { coeffs, law })
    }

    pub fn p(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn max_lag(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Array2<f64>] {
        &self.coeffs
    }

    pub fn law(&self) -> InnovationLaw {
        self.law
    }

    /// Row norm `|A_{l, j.}|_2` of lag `l`, coordinate `j`; the exact
    /// per-coordinate dependence profile of the process.
    pub fn row_norm(&self, l: usize, j: usize) -> f64 {
        if l >= self.coeffs.len() {
            return 0.0;
        }
        self.coeffs[l].row(j).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub(super) fn run(&self, eps: &Array2<f64>) -> Array2<f64> {
        let total = eps.nrows();
        let p = self.p();
        let mut x = Array2::zeros((total, p));
        for t in 0..total {
            for (l, a) in self.coeffs.iter().enumerate() {
                if t < l {
                    break;
                }
                let src = t - l;
                for j in 0..p {
                    let mut acc = 0.0;
                    for k in 0..p {
                        let c = a[[j, k]];
                        if c != 0.0 {
                            acc += c * eps[[src, k]];
                        }
                    }
                    x[[t, j]] += acc;
                }
            }
        }
        x
    }

    /// `Var(eps) * sum_l A_l A_l'`; exact for i.i.d. innovations.
    pub fn population_covariance(&self) -> Result<CovarianceMatrix> {
        let p = self.p();
        let v = self.law.variance();
        let mut s = Array2::zeros((p, p));
        for a in &self.coeffs {
            for j in 0..p {
                for k in 0..p {
                    let mut acc = 0.0;
                    for c in 0..p {
                        acc += a[[j, c]] * a[[k, c]];
                    }
                    s[[j, k]] += v * acc;
                }
            }
        }
        CovarianceMatrix::new(s)
    }
}

fn max_row_norm(a: &Array2<f64>) -> f64 {
    (0..a.nrows())
        .map(|j| a.row(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}
