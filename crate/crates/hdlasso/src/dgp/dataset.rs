//! The autoregressive simulation design
//!
//! ```text
//!     y_i = phi y_{i-1} + beta' x_{i-1, 1..s} + e_i,    phi = 0.6
//! ```
//!
//! where `x` follows one of the block VAR families and `e` is i.i.d.
//! Student t(5). Innovations are rescaled to unit variance by default;
//! set `unit_variance: false` to use raw t(5) draws (variance 5/3).
//! Estimators see the `p + 1` regressors `(y_{i-1}, x_{i-1,1..p})`.

use std::io::Write;

use ndarray::{Array1, Array2};

use super::models::{model_beta, model_var_spec, AlmonVariant};
use super::{InnovationLaw, ProcessSpec};
use crate::error::{Error, Result};
use crate::problem::{Coefficients, RegressionProblem};
use crate::rng::stream_rng;

/// Which covariate process and coefficient family to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelId {
    /// VAR(4) covariates, alternating-sign coefficients.
    M1,
    /// VAR(1) covariates, alternating-sign coefficients.
    M2,
    /// VAR(4) covariates, grouped exponential lag weights.
    M3,
    /// VAR(1) covariates, grouped exponential lag weights.
    M4,
}

impl ModelId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelId::M1 => "m1",
            ModelId::M2 => "m2",
            ModelId::M3 => "m3",
            ModelId::M4 => "m4",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(ModelId::M1),
            "m2" => Ok(ModelId::M2),
            "m3" => Ok(ModelId::M3),
            "m4" => Ok(ModelId::M4),
            other => Err(Error::InvalidInput(format!("unknown model id '{other}'"))),
        }
    }

    /// Stable numeric id used in deterministic seed derivation.
    pub(crate) fn tag(&self) -> u64 {
        match self {
            ModelId::M1 => 1,
            ModelId::M2 => 2,
            ModelId::M3 => 3,
            ModelId::M4 => 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub model: ModelId,
    /// Estimation sample size.
    pub n: usize,
    /// Covariate dimension (excluding the lagged response).
    pub p: usize,
    /// Number of active covariates.
    pub s: usize,
    /// Extra observations reserved for forecast evaluation.
    pub holdout: usize,
    pub seed: u64,
    /// Rescale the t(5) innovations to unit variance (default true).
    pub unit_variance: bool,
    /// Denominator convention for the grouped lag weights.
    pub almon: AlmonVariant,
}

impl DatasetSpec {
    pub fn new(model: ModelId, n: usize, p: usize, s: usize, seed: u64) -> Self {
        Self {
            model,
            n,
            p,
            s,
            holdout: 10,
            seed,
            unit_variance: true,
            almon: AlmonVariant::default(),
        }
    }
}

/// A simulated sample, stored in regression alignment: row `t` holds the
/// response `y` at time `t+1` together with its regressors `y_t` and
/// `x_t`. The first `n` rows are the estimation sample; the remaining
/// `holdout` rows are reserved for forecast evaluation.
#[derive(Debug, Clone)]
pub struct SimulatedDataset {
    pub model: ModelId,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub holdout: usize,
    pub seed: u64,
    y: Vec<f64>,
    y_lag: Vec<f64>,
    x_lag: Array2<f64>,
    truth_phi: f64,
    truth_beta: Coefficients,
}

/// Steps discarded while the response recursion forgets its zero start.
const RESPONSE_WARMUP: usize = 100;

const PHI: f64 = 0.6;

pub fn simulate_dataset(spec: &DatasetSpec) -> Result<SimulatedDataset> {
    if spec.n < 2 {
        return Err(Error::InvalidInput(format!("need n >= 2, got {}", spec.n)));
    }
    let beta = model_beta(spec.model, spec.p, spec.s, spec.almon)?;
    let law = if spec.unit_variance {
        InnovationLaw::UnitStudentT { df: 5.0 }
    } else {
        InnovationLaw::StudentT { df: 5.0 }
    };
    let var = model_var_spec(spec.model, spec.p, law)?;
    let total = spec.n + spec.holdout;
    let horizon = RESPONSE_WARMUP + total;

    let mut x_rng = stream_rng(spec.seed, &[spec.model.tag(), 1]);
    // x_t recorded for t = 0..horizon-1, each the regressor of y_{t+1}.
    let x = ProcessSpec::Var(var).simulate(horizon, &mut x_rng);

    let mut e_rng = stream_rng(spec.seed, &[spec.model.tag(), 2]);
    let mut y_path = Vec::with_capacity(horizon + 1);
    y_path.push(0.0);
    for t in 0..horizon {
        let mut z = PHI * y_path[t];
        for (j, b) in beta.iter().enumerate().take(spec.s) {
            z += b * x[[t, j]];
        }
        z += law.sample(&mut e_rng);
        y_path.push(z);
    }

    // Keep the last `total` aligned rows.
    let start = horizon - total;
    let mut y = Vec::with_capacity(total);
    let mut y_lag = Vec::with_capacity(total);
    let mut x_lag = Array2::zeros((total, spec.p));
    for (row, t) in (start..horizon).enumerate() {
        y.push(y_path[t + 1]);
        y_lag.push(y_path[t]);
        for j in 0..spec.p {
            x_lag[[row, j]] = x[[t, j]];
        }
    }

    Ok(SimulatedDataset {
        model: spec.model,
        n: spec.n,
        p: spec.p,
        s: spec.s,
        holdout: spec.holdout,
        seed: spec.seed,
        y,
        y_lag,
        x_lag,
        truth_phi: PHI,
        truth_beta: Coefficients::new(beta),
    })
}

impl SimulatedDataset {
    pub fn truth_phi(&self) -> f64 {
        self.truth_phi
    }

    pub fn truth_beta(&self) -> &Coefficients {
        &self.truth_beta
    }

    /// `(phi; beta)` stacked, the parameter vector estimators target.
    pub fn truth_stacked(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.p + 1);
        v.push(self.truth_phi);
        v.extend_from_slice(self.truth_beta.values());
        v
    }

    pub fn responses(&self) -> &[f64] {
        &self.y
    }

    pub fn lagged_responses(&self) -> &[f64] {
        &self.y_lag
    }

    pub fn lagged_covariates(&self) -> &Array2<f64> {
        &self.x_lag
    }

    /// Design over rows `lo..hi` with `p + 1` columns, the lagged response
    /// first.
    fn design_rows(&self, lo: usize, hi: usize) -> RegressionProblem {
        let rows = hi - lo;
        let mut x = Array2::zeros((rows, self.p + 1));
        for r in 0..rows {
            x[[r, 0]] = self.y_lag[lo + r];
            for j in 0..self.p {
                x[[r, j + 1]] = self.x_lag[[lo + r, j]];
            }
        }
        let y = Array1::from_iter(self.y[lo..hi].iter().copied());
        RegressionProblem::new(x, y).expect("simulated data is finite by construction")
    }

    /// The estimation sample (first `n` rows).
    pub fn estimation_problem(&self) -> RegressionProblem {
        self.design_rows(0, self.n)
    }

    /// Holdout row `k` (0-based, `k < holdout`) as
    /// `(y, y_lag, x_lag row)`; regressors are realized values, so
    /// forecasts made from them are one-step-ahead.
    pub fn holdout_row(&self, k: usize) -> (f64, f64, Vec<f64>) {
        let t = self.n + k;
        (self.y[t], self.y_lag[t], self.x_lag.row(t).to_vec())
    }

    /// Writes the aligned sample as CSV: header
    /// `y,y_lag,x1..xp`, one row per observation (estimation rows first,
    /// then holdout).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = String::from("y,y_lag");
        for j in 1..=self.p {
            header.push_str(&format!(",x{j}"));
        }
        writeln!(w, "{header}")?;
        for t in 0..self.y.len() {
            let mut line = format!("{:.17e},{:.17e}", self.y[t], self.y_lag[t]);
            for j in 0..self.p {
                line.push_str(&format!(",{:.17e}", self.x_lag[[t, j]]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Writes the generating parameters as CSV: `param,value` rows for
    /// `phi` and each `beta_j`.
    pub fn write_truth_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "param,value")?;
        writeln!(w, "phi,{:.17e}", self.truth_phi)?;
        for (j, b) in self.truth_beta.values().iter().enumerate() {
            writeln!(w, "beta{},{:.17e}", j + 1, b)?;
        }
        Ok(())
    }
}
