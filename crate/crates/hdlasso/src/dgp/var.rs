//! Vector autoregressions with stationarity enforced at construction.

use ndarray::{s, Array2};
use rand::Rng;

use super::InnovationLaw;
use crate::error::{Error, Result};
use crate::linalg::{spectral_radius_exact, spectral_radius_upper};
use crate::problem::CovarianceMatrix;

/// VAR(m): `x_t = A_1 x_{t-1} + ... + A_m x_{t-m} + eps_t`.
///
/// Construction fails unless the companion matrix has spectral radius
/// strictly below 1, so a `VarSpec` value is always a stationary model.
#[derive(Debug, Clone)]
pub struct VarSpec {
    coeffs: Vec<Array2<f64>>,
    law: InnovationLaw,
}

impl VarSpec {
    /// Validates shapes and runs the generic stability check. Exact
    /// eigenvalues are used when the companion is small; otherwise a
    /// rigorous norm-of-powers upper bound certifies stability.
    pub fn new(coeffs: Vec<Array2<f64>>, law: InnovationLaw) -> Result<Self> {
        law.validate()?;
        let p = Self::validate_shapes(&coeffs)?;
        let m = coeffs.len();
        let dim = m * p;
        let radius_below_one = if dim <= 400 {
            spectral_radius_exact(&companion(&coeffs)) < 1.0
        } else {
            let c = companion(&coeffs);
            // Tighten until the bound certifies either side confidently.
            let mut ok = false;
            for doublings in [8, 12, 16] {
                if spectral_radius_upper(&c, doublings) < 1.0 {
                    ok = true;
                    break;
                }
            }
            ok
        };
        if !radius_below_one {
            return Err(Error::UnstableProcess(
                "companion spectral radius is not below 1".into(),
            ));
        }
        Ok(Self { coeffs, law })
    }

    /// Assembles a block-diagonal VAR from per-block coefficient stacks
    /// (`blocks[b][lag]`), checking stability block by block. A block
    /// companion is small, so the check is exact even when the assembled
    /// process is large.
    pub fn from_blocks(blocks: &[Vec<Array2<f64>>], law: InnovationLaw) -> Result<Self> {
        law.validate()?;
        if blocks.is_empty() {
            return Err(Error::InvalidInput("no blocks supplied".into()));
        }
        let m = blocks[0].len();
        let mut p = 0usize;
        for (b, stack) in blocks.iter().enumerate() {
            if stack.len() != m {
                return Err(Error::InvalidInput(format!(
                    "block {b} has {} lags, expected {m}",
                    stack.len()
                )));
            }
            let bp = Self::validate_shapes(stack)?;
            if spectral_radius_exact(&companion(stack)) >= 1.0 {
                return Err(Error::UnstableProcess(format!(
                    "block {b} companion spectral radius is not below 1"
                )));
            }
            p += bp;
        }
        let mut coeffs = vec![Array2::zeros((p, p)); m];
        let mut offset = 0usize;
        for stack in blocks {
            let bp = stack[0].nrows();
            for (lag, a) in stack.iter().enumerate() {
                coeffs[lag]
                    .slice_mut(s![offset..offset + bp, offset..offset + bp])
                    .assign(a);
            }
            offset += bp;
        }
        Ok(Self { coeffs, law })
    }

    fn validate_shapes(coeffs: &[Array2<f64>]) -> Result<usize> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("VAR needs at least one lag matrix".into()));
        }
        let p = coeffs[0].nrows();
        for (l, a) in coeffs.iter().enumerate() {
            if a.nrows() != p || a.ncols() != p {
                return Err(Error::InvalidInput(format!(
                    "lag {} matrix is {}x{}, expected {p}x{p}",
                    l + 1,
                    a.nrows(),
                    a.ncols()
                )));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("VAR lag {} matrix", l + 1)));
            }
        }
        Ok(p)
    }

    pub fn p(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Array2<f64>] {
        &self.coeffs
    }

    pub fn law(&self) -> InnovationLaw {
        self.law
    }

    /// Runs the recursion over a full innovation panel with zero initial
    /// conditions; callers discard the burn-in prefix. Coefficient rows
    /// are pre-compressed to their nonzeros, which makes the block
    /// families cheap at large `p`.
    pub(super) fn run(&self, eps: &Array2<f64>) -> Array2<f64> {
        let total = eps.nrows();
        let p = self.p();
        let sparse: Vec<Vec<Vec<(usize, f64)>>> = self
            .coeffs
            .iter()
            .map(|a| {
                (0..p)
                    .map(|j| {
                        (0..p)
                            .filter(|&k| a[[j, k]] != 0.0)
                            .map(|k| (k, a[[j, k]]))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut x = Array2::zeros((total, p));
        for t in 0..total {
            for j in 0..p {
                x[[t, j]] = eps[[t, j]];
            }
            for (lag, rows) in sparse.iter().enumerate() {
                if t <= lag {
                    continue;
                }
                let src = t - lag - 1;
                for j in 0..p {
                    let mut acc = 0.0;
                    for &(k, c) in &rows[j] {
                        acc += c * x[[src, k]];
                    }
                    x[[t, j]] += acc;
                }
            }
        }
        x
    }
}

/// Simulates `len` observations after a 500-step burn-in.
pub fn simulate_var<R: Rng>(spec: &VarSpec, len: usize, rng: &mut R) -> Array2<f64> {
    super::ProcessSpec::Var(spec.clone()).simulate(len, rng)
}

fn companion(coeffs: &[Array2<f64>]) -> Array2<f64> {
    let p = coeffs[0].nrows();
    let m = coeffs.len();
    let dim = m * p;
    let mut c = Array2::zeros((dim, dim));
    for (lag, a) in coeffs.iter().enumerate() {
        c.slice_mut(s![0..p, lag * p..(lag + 1) * p]).assign(a);
    }
    for r in p..dim {
        c[[r, r - p]] = 1.0;
    }
    c
}

/// Stationary covariance of the VAR by companion-form Lyapunov doubling:
/// with `S = sum_k C^k Q (C^k)'`, iterate `S <- S + C_k S C_k'`,
/// `C_k <- C_k^2` until the increment is negligible. The innovation
/// covariance is `law.variance() * I`.
pub fn population_covariance(spec: &VarSpec) -> Result<CovarianceMatrix> {
    let p = spec.p();
    let m = spec.order();
    let dim = m * p;
    let v = spec.law().variance();
    let mut s_mat = Array2::zeros((dim, dim));
    for j in 0..p {
        s_mat[[j, j]] = v;
    }
    let mut ck = companion(spec.coeffs());
    for _ in 0..60 {
        let incr = ck.dot(&s_mat).dot(&ck.t());
        let scale = s_mat.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let gain = incr.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        s_mat += &incr;
        if gain <= 1e-15 * scale.max(1e-300) {
            break;
        }
        ck = ck.dot(&ck);
    }
    CovarianceMatrix::new(s_mat.slice(s![0..p, 0..p]).to_owned())
}
