//! GARCH(1,1) noise: `e_t = sqrt(h_t) eta_t` with
//! `h_t = pi0 + pi1 e_{t-1}^2 + pi2 h_{t-1}`.

use ndarray::Array2;
use rand::Rng;

use super::InnovationLaw;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Garch11Spec {
    pi0: f64,
    pi1: f64,
    pi2: f64,
    law: InnovationLaw,
}

impl Garch11Spec {
    /// Requires `pi0 > 0`, `pi1, pi2 >= 0`, and `pi1 + pi2 < 1` so the
    /// unconditional variance exists.
    pub fn new(pi0: f64, pi1: f64, pi2: f64, law: InnovationLaw) -> Result<Self> {
        law.validate()?;
        if !(pi0.is_finite() && pi1.is_finite() && pi2.is_finite()) {
            return Err(Error::NonFinite("GARCH parameters".into()));
        }
        if pi0 <= 0.0 || pi1 < 0.0 || pi2 < 0.0 {
            return Err(Error::InvalidInput(format!(
                "GARCH needs pi0 > 0 and pi1, pi2 >= 0, got ({pi0}, {pi1}, {pi2})"
            )));
        }
        if pi1 + pi2 >= 1.0 {
            return Err(Error::UnstableProcess(format!(
                "GARCH persistence pi1 + pi2 = {} is not below 1",
                pi1 + pi2
            )));
        }
        Ok(Self { pi0, pi1, pi2, law })
    }

    pub fn law(&self) -> InnovationLaw {
        self.law
    }

    pub fn params(&self) -> (f64, f64, f64) {
        (self.pi0, self.pi1, self.pi2)
    }

    /// `pi0 / (1 - pi1 - pi2)` scaled by the innovation variance.
    pub fn unconditional_variance(&self) -> f64 {
        self.law.variance() * self.pi0 / (1.0 - self.pi1 - self.pi2)
    }

    /// Runs the variance recursion over an innovation panel (single
    /// column), `h` initialized at its stationary mean.
    pub(super) fn run(&self, eps: &Array2<f64>) -> Array2<f64> {
        let total = eps.nrows();
        let mut out = Array2::zeros((total, 1));
        let mut h = self.pi0 / (1.0 - self.pi1 - self.pi2);
        let mut prev_e2 = h * self.law.variance();
        for t in 0..total {
            if t > 0 {
                h = self.pi0 + self.pi1 * prev_e2 + self.pi2 * h;
            }
            let e = h.sqrt() * eps[[t, 0]];
            prev_e2 = e * e;
            out[[t, 0]] = e;
        }
        out
    }
}

/// Simulates `len` observations after a 500-step burn-in.
pub fn simulate_garch11<R: Rng>(spec: &Garch11Spec, len: usize, rng: &mut R) -> Vec<f64> {
    let path = super::ProcessSpec::Garch11(spec.clone()).simulate(len, rng);
    path.column(0).to_vec()
}
