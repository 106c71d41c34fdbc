//! Run configurations: serde mirrors of the library's option types,
//! kept as plain strings and numbers so a manifest snapshot stays
//! human-readable. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use hdlasso::dgp::{
    model_var_spec, AlmonVariant, Garch11Spec, InnovationLaw, LinearProcessSpec, ModelId,
    ProcessSpec, VarSpec,
};
use hdlasso::experiments::{EstimatorKind, ExperimentConfig};
use hdlasso::mixedfreq::{
    Frequency, NowcastEstimator, NowcastMode, QuarterId, RollingOptions, SeriesSpec,
    Transformation,
};
use hdlasso::{CovarianceMatrix, Error, Result};

fn default_true() -> bool {
    true
}

fn default_holdout() -> usize {
    10
}

fn default_lambda_grid() -> usize {
    50
}

pub fn parse_almon(s: &str) -> Result<AlmonVariant> {
    match s {
        "as_printed" => Ok(AlmonVariant::AsPrinted),
        "matched" => Ok(AlmonVariant::Matched),
        other => Err(Error::InvalidInput(format!(
            "unknown almon variant '{other}' (expected as_printed or matched)"
        ))),
    }
}

fn parse_law(law: &str, df: Option<f64>) -> Result<InnovationLaw> {
    let need_df = || {
        df.ok_or_else(|| Error::InvalidInput(format!("law '{law}' needs a df value")))
    };
    match law {
        "normal" => Ok(InnovationLaw::Normal),
        "student_t" => Ok(InnovationLaw::StudentT { df: need_df()? }),
        "unit_student_t" => Ok(InnovationLaw::UnitStudentT { df: need_df()? }),
        other => Err(Error::InvalidInput(format!(
            "unknown innovation law '{other}' (expected normal, student_t, or unit_student_t)"
        ))),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub model: String,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    #[serde(default = "default_holdout")]
    pub holdout: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub unit_variance: bool,
    #[serde(default = "SimulateConfig::default_almon")]
    pub almon: String,
}

impl SimulateConfig {
    fn default_almon() -> String {
        "as_printed".into()
    }

    pub fn to_spec(&self) -> Result<hdlasso::dgp::DatasetSpec> {
        let mut spec = hdlasso::dgp::DatasetSpec::new(
            ModelId::parse(&self.model)?,
            self.n,
            self.p,
            self.s,
            self.seed,
        );
        spec.holdout = self.holdout;
        spec.unit_variance = self.unit_variance;
        spec.almon = parse_almon(&self.almon)?;
        Ok(spec)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentCliConfig {
    pub model: String,
    #[serde(default = "ExperimentCliConfig::default_n_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "ExperimentCliConfig::default_p_grid")]
    pub p_grid: Vec<usize>,
    #[serde(default = "ExperimentCliConfig::default_s_grid")]
    pub s_grid: Vec<usize>,
    #[serde(default = "ExperimentCliConfig::default_mc_reps")]
    pub mc_reps: usize,
    #[serde(default = "default_holdout")]
    pub holdout: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "ExperimentCliConfig::default_estimators")]
    pub estimators: Vec<String>,
    #[serde(default = "default_true")]
    pub unit_variance: bool,
    #[serde(default = "SimulateConfig::default_almon")]
    pub almon: String,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: usize,
    #[serde(default = "default_true")]
    pub evaluate_conditions: bool,
}

impl ExperimentCliConfig {
    fn default_n_grid() -> Vec<usize> {
        vec![50, 100, 200]
    }

    fn default_p_grid() -> Vec<usize> {
        vec![100, 200, 400]
    }

    fn default_s_grid() -> Vec<usize> {
        vec![5, 10, 20]
    }

    fn default_mc_reps() -> usize {
        200
    }

    fn default_estimators() -> Vec<String> {
        vec!["lasso_bic".into(), "midas".into()]
    }

    pub fn to_config(&self) -> Result<ExperimentConfig> {
        let estimators = self
            .estimators
            .iter()
            .map(|s| match s.as_str() {
                "lasso_bic" => Ok(EstimatorKind::LassoBic),
                "midas" => Ok(EstimatorKind::Midas),
                other => Err(Error::InvalidInput(format!(
                    "unknown estimator '{other}' (expected lasso_bic or midas)"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExperimentConfig {
            model: ModelId::parse(&self.model)?,
            n_grid: self.n_grid.clone(),
            p_grid: self.p_grid.clone(),
            s_grid: self.s_grid.clone(),
            mc_reps: self.mc_reps,
            holdout: self.holdout,
            seed: self.seed,
            estimators,
            unit_variance: self.unit_variance,
            almon: parse_almon(&self.almon)?,
            lambda_grid: self.lambda_grid,
            evaluate_conditions: self.evaluate_conditions,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesEntry {
    pub name: String,
    /// CSV path, resolved against the config file's directory.
    pub file: String,
    pub frequency: String,
    #[serde(default = "SeriesEntry::default_transformation")]
    pub transformation: String,
    pub days_per_month: Option<usize>,
    #[serde(default)]
    pub weekly_mean: bool,
}

impl SeriesEntry {
    fn default_transformation() -> String {
        "none".into()
    }

    fn to_spec(&self, base: &Path) -> Result<SeriesSpec> {
        let frequency = match self.frequency.as_str() {
            "quarterly" => Frequency::Quarterly,
            "monthly" => Frequency::Monthly,
            "daily" => Frequency::Daily,
            other => {
                return Err(Error::InvalidInput(format!(
                    "series {}: unknown frequency '{other}'",
                    self.name
                )))
            }
        };
        let transformation = match self.transformation.as_str() {
            "none" => Transformation::None,
            "diff" => Transformation::Diff,
            "logdiff" => Transformation::LogDiff,
            other => {
                return Err(Error::InvalidInput(format!(
                    "series {}: unknown transformation '{other}'",
                    self.name
                )))
            }
        };
        if frequency == Frequency::Daily && self.days_per_month.is_none() {
            return Err(Error::InvalidInput(format!(
                "series {}: daily data needs days_per_month",
                self.name
            )));
        }
        if frequency != Frequency::Daily && (self.days_per_month.is_some() || self.weekly_mean) {
            return Err(Error::InvalidInput(format!(
                "series {}: days_per_month and weekly_mean apply to daily data only",
                self.name
            )));
        }
        Ok(SeriesSpec {
            name: self.name.clone(),
            file: base.join(&self.file),
            frequency,
            transformation,
            days_per_month: self.days_per_month,
            weekly_mean: self.weekly_mean,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NowcastConfig {
    pub mode: String,
    #[serde(default = "NowcastConfig::default_estimators")]
    pub estimators: Vec<String>,
    /// First and last predicted quarters, e.g. "2013Q2", inclusive.
    pub first_origin: String,
    pub last_origin: String,
    #[serde(default = "NowcastConfig::default_max_ar")]
    pub max_ar: usize,
    #[serde(default = "NowcastConfig::default_lag_quarters")]
    pub lag_quarters: Vec<usize>,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: usize,
    pub series: Vec<SeriesEntry>,
}

impl NowcastConfig {
    fn default_estimators() -> Vec<String> {
        vec!["ar_ols".into(), "ar_lasso".into(), "lasso_bic".into(), "midas_empirical".into()]
    }

    fn default_max_ar() -> usize {
        4
    }

    fn default_lag_quarters() -> Vec<usize> {
        vec![1, 2]
    }

    pub fn mode(&self) -> Result<NowcastMode> {
        match self.mode.as_str() {
            "forecast" => Ok(NowcastMode::Forecast),
            "nowcast1" => Ok(NowcastMode::Nowcast1),
            "nowcast2" => Ok(NowcastMode::Nowcast2),
            other => Err(Error::InvalidInput(format!(
                "unknown mode '{other}' (expected forecast, nowcast1, or nowcast2)"
            ))),
        }
    }

    pub fn estimators(&self) -> Result<Vec<NowcastEstimator>> {
        self.estimators
            .iter()
            .map(|s| match s.as_str() {
                "ar_ols" => Ok(NowcastEstimator::ArOls),
                "ar_lasso" => Ok(NowcastEstimator::ArLasso),
                "lasso_bic" => Ok(NowcastEstimator::LassoBic),
                "midas_empirical" => Ok(NowcastEstimator::MidasEmpirical),
                other => Err(Error::InvalidInput(format!("unknown estimator '{other}'"))),
            })
            .collect()
    }

    pub fn series_specs(&self, base: &Path) -> Result<Vec<SeriesSpec>> {
        self.series.iter().map(|s| s.to_spec(base)).collect()
    }

    pub fn rolling_options(&self) -> RollingOptions {
        RollingOptions {
            max_ar: self.max_ar,
            lag_quarters: self.lag_quarters.clone(),
            lambda_grid: self.lambda_grid,
            ..RollingOptions::default()
        }
    }
}

/// "2013Q2" style quarter labels.
pub fn parse_quarter(s: &str) -> Result<QuarterId> {
    let bad = || Error::InvalidInput(format!("cannot parse quarter label '{s}' (expected e.g. 2013Q2)"));
    let (year, quarter) = s.split_once(['Q', 'q']).ok_or_else(bad)?;
    QuarterId::new(year.parse().map_err(|_| bad())?, quarter.parse().map_err(|_| bad())?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepnormConfig {
    #[serde(default = "DepnormConfig::default_q")]
    pub q: f64,
    #[serde(default = "DepnormConfig::default_i_max")]
    pub i_max: usize,
    #[serde(default = "DepnormConfig::default_mc")]
    pub mc: usize,
    #[serde(default)]
    pub seed: u64,
    /// Decay exponent of the reported aggregate norms.
    #[serde(default = "DepnormConfig::default_alpha")]
    pub alpha: f64,
    #[serde(default = "DepnormConfig::default_law")]
    pub law: String,
    pub df: Option<f64>,
    pub process: ProcessEntry,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessEntry {
    /// Independent draws, one per coordinate.
    Iid { p: usize },
    /// Covariate process of a named simulation design.
    ModelVar { model: String, p: usize },
    /// Moving average with diagonal lag matrices `coeffs[l] * I`.
    DiagLinear { p: usize, coeffs: Vec<f64> },
    /// Scalar conditionally heteroskedastic noise.
    Garch { pi0: f64, pi1: f64, pi2: f64 },
}

impl DepnormConfig {
    fn default_q() -> f64 {
        2.0
    }

    fn default_i_max() -> usize {
        20
    }

    fn default_mc() -> usize {
        20_000
    }

    fn default_alpha() -> f64 {
        0.1
    }

    fn default_law() -> String {
        "normal".into()
    }

    pub fn process_spec(&self) -> Result<ProcessSpec> {
        let law = parse_law(&self.law, self.df)?;
        match &self.process {
            ProcessEntry::Iid { p } => Ok(ProcessSpec::Iid { p: *p, law }),
            ProcessEntry::ModelVar { model, p } => {
                Ok(ProcessSpec::Var(model_var_spec(ModelId::parse(model)?, *p, law)?))
            }
            ProcessEntry::DiagLinear { p, coeffs } => {
                let mats = coeffs
                    .iter()
                    .map(|&c| ndarray::Array2::eye(*p) * c)
                    .collect();
                Ok(ProcessSpec::LinearProcess(LinearProcessSpec::new(mats, law)?))
            }
            ProcessEntry::Garch { pi0, pi1, pi2 } => {
                Ok(ProcessSpec::Garch11(Garch11Spec::new(*pi0, *pi1, *pi2, law)?))
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsConfig {
    /// Support size; the support is the first `s` columns.
    pub s: Option<usize>,
    /// Explicit zero-based support indices; overrides `s`.
    pub relevant: Option<Vec<usize>>,
    pub sigma: SigmaEntry,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaEntry {
    Identity { p: usize },
    /// `sigma_jk = rho^|j-k|`.
    Toeplitz { p: usize, rho: f64 },
    /// Stationary covariance of a named design's covariate process.
    ModelVar { model: String, p: usize },
}

impl ConditionsConfig {
    pub fn relevant_indices(&self) -> Result<Vec<usize>> {
        match (&self.relevant, self.s) {
            (Some(idx), None) => Ok(idx.clone()),
            (None, Some(s)) => Ok((0..s).collect()),
            (Some(_), Some(_)) => {
                Err(Error::InvalidInput("give either s or relevant, not both".into()))
            }
            (None, None) => Err(Error::InvalidInput("give s or a relevant index list".into())),
        }
    }

    pub fn sigma(&self) -> Result<CovarianceMatrix> {
        match &self.sigma {
            SigmaEntry::Identity { p } => CovarianceMatrix::new(ndarray::Array2::eye(*p)),
            SigmaEntry::Toeplitz { p, rho } => {
                if !rho.is_finite() || rho.abs() >= 1.0 {
                    return Err(Error::InvalidInput(format!(
                        "toeplitz correlation must satisfy |rho| < 1, got {rho}"
                    )));
                }
                let a = ndarray::Array2::from_shape_fn((*p, *p), |(j, k)| {
                    rho.powi((j as i32 - k as i32).abs())
                });
                CovarianceMatrix::new(a)
            }
            SigmaEntry::ModelVar { model, p } => {
                let spec: VarSpec = model_var_spec(ModelId::parse(model)?, *p, InnovationLaw::Normal)?;
                hdlasso::dgp::population_covariance(&spec)
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub gamma: f64,
    pub q: f64,
    pub alpha_x: f64,
    pub alpha_e: f64,
    pub n_grid: Vec<usize>,
    pub p_grid: Vec<usize>,
    pub s_grid: Vec<usize>,
    #[serde(default = "RatesConfig::one")]
    pub kappa: f64,
    #[serde(default = "RatesConfig::one")]
    pub m_x: f64,
    #[serde(default = "RatesConfig::one")]
    pub m_e: f64,
    #[serde(default = "RatesConfig::one")]
    pub dan_inf: f64,
    #[serde(default = "RatesConfig::one")]
    pub b: f64,
    /// Slack factor of the selection-scaling window.
    #[serde(default = "RatesConfig::default_eta")]
    pub eta: f64,
    /// Smallest absolute nonzero coefficient.
    #[serde(default = "RatesConfig::one")]
    pub l_min: f64,
}

impl RatesConfig {
    fn one() -> f64 {
        1.0
    }

    fn default_eta() -> f64 {
        0.5
    }
}
