//! Data-generating processes: stationary multivariate simulators with a
//! shared innovation interface, the two block-structured coefficient
//! families used throughout the experiments, lag-polynomial weight
//! construction, and the autoregressive dataset assembler.
//!
//! Every simulator is driven by an explicit rng stream, burns in before
//! recording, and supports coupled simulation (re-running with one
//! innovation replaced) for dependence measurement.

mod dataset;
mod garch;
mod linear;
mod models;
mod var;

pub use dataset::{simulate_dataset, DatasetSpec, ModelId, SimulatedDataset};
pub use garch::{simulate_garch11, Garch11Spec};
pub use linear::LinearProcessSpec;
pub use models::{almon_weights, build_model_matrices, model_beta, model_var_spec, AlmonVariant};
pub use var::{population_covariance, simulate_var, VarSpec};

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StudentT};

use crate::error::{Error, Result};

/// Marginal law of the i.i.d. innovation draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnovationLaw {
    /// Standard normal.
    Normal,
    /// Student t with `df` degrees of freedom, used as drawn; its variance
    /// is `df/(df-2)`.
    StudentT { df: f64 },
    /// Student t rescaled to unit variance. Requires `df > 2`.
    UnitStudentT { df: f64 },
}

impl InnovationLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            InnovationLaw::Normal => Ok(()),
            InnovationLaw::StudentT { df } | InnovationLaw::UnitStudentT { df } => {
                if !df.is_finite() || *df <= 2.0 {
                    Err(Error::InvalidInput(format!(
                        "Student t innovations need df > 2 for a finite variance, got {df}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            InnovationLaw::Normal | InnovationLaw::UnitStudentT { .. } => 1.0,
            InnovationLaw::StudentT { df } => df / (df - 2.0),
        }
    }

    /// Largest `q` with a finite `q`-th absolute moment; exclusive bound
    /// for the Student laws, infinite for the normal.
    pub fn moment_order_bound(&self) -> f64 {
        match self {
            InnovationLaw::Normal => f64::INFINITY,
            InnovationLaw::StudentT { df } | InnovationLaw::UnitStudentT { df } => *df,
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            InnovationLaw::Normal => {
                rand_distr::StandardNormal.sample(rng)
            }
            InnovationLaw::StudentT { df } => StudentT::new(*df).unwrap().sample(rng),
            InnovationLaw::UnitStudentT { df } => {
                let raw: f64 = StudentT::new(*df).unwrap().sample(rng);
                raw / (df / (df - 2.0)).sqrt()
            }
        }
    }
}

/// A stationary process that can be simulated forward and re-simulated
/// with the time-0 innovation replaced.
#[derive(Debug, Clone)]
pub enum ProcessSpec {
    /// Independent draws, one per coordinate.
    Iid { p: usize, law: InnovationLaw },
    Var(VarSpec),
    LinearProcess(LinearProcessSpec),
    /// Scalar conditionally heteroskedastic noise.
    Garch11(Garch11Spec),
}

impl ProcessSpec {
    pub fn dimension(&self) -> usize {
        match self {
            ProcessSpec::Iid { p, .. } => *p,
            ProcessSpec::Var(v) => v.p(),
            ProcessSpec::LinearProcess(l) => l.p(),
            ProcessSpec::Garch11(_) => 1,
        }
    }

    pub fn law(&self) -> InnovationLaw {
        match self {
            ProcessSpec::Iid { law, .. } => *law,
            ProcessSpec::Var(v) => v.law(),
            ProcessSpec::LinearProcess(l) => l.law(),
            ProcessSpec::Garch11(g) => g.law(),
        }
    }

    /// Innovation history consumed before time 0 is recorded.
    pub fn history(&self) -> usize {
        match self {
            ProcessSpec::Iid { .. } => 0,
            ProcessSpec::Var(_) | ProcessSpec::Garch11(_) => 500,
            ProcessSpec::LinearProcess(l) => l.max_lag(),
        }
    }

    /// Innovation dimension per time step (equals the process dimension
    /// except for the scalar recursions).
    fn innovation_dim(&self) -> usize {
        self.dimension()
    }

    /// Simulates `len` post-burn-in observations.
    pub fn simulate<R: Rng>(&self, len: usize, rng: &mut R) -> Array2<f64> {
        let total = self.history() + len;
        let eps = self.draw_innovations(total, rng);
        let path = self.run(&eps);
        path.slice(ndarray::s![self.history().., ..]).to_owned()
    }

    /// Simulates a coupled pair sharing every innovation except time 0's,
    /// returning rows `0..=i_max` of both trajectories.
    pub fn simulate_coupled<R: Rng>(&self, i_max: usize, rng: &mut R) -> (Array2<f64>, Array2<f64>) {
        let hist = self.history();
        let total = hist + i_max + 1;
        let mut eps = self.draw_innovations(total, rng);
        let replacement: Vec<f64> =
            (0..self.innovation_dim()).map(|_| self.law().sample(rng)).collect();
        let base = self.run(&eps);
        for (j, v) in replacement.iter().enumerate() {
            eps[[hist, j]] = *v;
        }
        let coupled = self.run(&eps);
        (
            base.slice(ndarray::s![hist.., ..]).to_owned(),
            coupled.slice(ndarray::s![hist.., ..]).to_owned(),
        )
    }

    fn draw_innovations<R: Rng>(&self, total: usize, rng: &mut R) -> Array2<f64> {
        let d = self.innovation_dim();
        let law = self.law();
        let mut eps = Array2::zeros((total, d));
        for t in 0..total {
            for j in 0..d {
                eps[[t, j]] = law.sample(rng);
            }
        }
        eps
    }

    /// Deterministic map from an innovation panel to the process path.
    fn run(&self, eps: &Array2<f64>) -> Array2<f64> {
        match self {
            ProcessSpec::Iid { .. } => eps.clone(),
            ProcessSpec::Var(v) => v.run(eps),
            ProcessSpec::LinearProcess(l) => l.run(eps),
            ProcessSpec::Garch11(g) => g.run(eps),
        }
    }

    /// Stationary covariance of the process where it has a closed form.
    pub fn population_covariance(&self) -> Result<crate::problem::CovarianceMatrix> {
        match self {
            ProcessSpec::Iid { p, law } => {
                law.validate()?;
                let v = law.variance();
                crate::problem::CovarianceMatrix::new(Array2::from_diag_elem(*p, v))
            }
            ProcessSpec::Var(vs) => population_covariance(vs),
            ProcessSpec::LinearProcess(l) => l.population_covariance(),
            ProcessSpec::Garch11(g) => {
                crate::problem::CovarianceMatrix::new(Array2::from_elem((1, 1), g.unconditional_variance()))
            }
        }
    }
}
