//! Expanding-window evaluation of the forecast and nowcast protocols.
//!
//! The autoregressive order and the per-series lag depths are selected
//! by BIC on the initial training window only, then held fixed while
//! the window expands across prediction origins. Estimators that fail
//! at an origin are recorded and skipped in that estimator's summary.

use std::fs;
use std::io::Write as IoWrite;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{build_design, MixedFreqPanel, NowcastDesign, NowcastMode, NowcastProtocol, QuarterId};
use crate::error::{Error, Result};
use crate::lasso::{fit_path_bic, SolverOptions};
use crate::linalg::least_squares;
use crate::midas::{fit_midas, MidasLayout, MidasModel, MidasOptions};
use crate::problem::RegressionProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NowcastEstimator {
    /// Ordinary least squares on the autoregressive columns only.
    ArOls,
    /// Penalized fit on the autoregressive columns only.
    ArLasso,
    /// Penalized fit on the full protocol design.
    LassoBic,
    /// Grouped lag-polynomial fit on the full protocol design, one
    /// weight group per series.
    MidasEmpirical,
}

impl NowcastEstimator {
    pub fn as_str(self) -> &'static str {
        match self {
            NowcastEstimator::ArOls => "ar_ols",
            NowcastEstimator::ArLasso => "ar_lasso",
            NowcastEstimator::LassoBic => "lasso_bic",
            NowcastEstimator::MidasEmpirical => "midas_empirical",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RollingOptions {
    /// Autoregressive orders searched on the initial window.
    pub max_ar: usize,
    /// Candidate lag depths per series, in whole quarters.
    pub lag_quarters: Vec<usize>,
    /// Penalty grid size for the lasso paths.
    pub lambda_grid: usize,
    pub solver: SolverOptions,
    pub midas: MidasOptions,
}

impl Default for RollingOptions {
    fn default() -> Self {
        Self {
            max_ar: 4,
            lag_quarters: vec![1, 2],
            lambda_grid: 50,
            solver: SolverOptions::default(),
            midas: MidasOptions::default(),
        }
    }
}

/// Realized value and per-estimator predictions at one origin.
#[derive(Debug, Clone)]
pub struct OriginScore {
    pub origin: QuarterId,
    pub actual: f64,
    /// One entry per estimator; `None` records a failed fit.
    pub predictions: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct EstimatorSummary {
    pub estimator: NowcastEstimator,
    /// Median absolute error.
    pub mad: f64,
    pub mae: f64,
    pub rmse: f64,
    pub used: usize,
    pub failures: usize,
}

#[derive(Debug, Clone)]
pub struct RollingResult {
    pub estimators: Vec<NowcastEstimator>,
    /// Protocol with the selected orders filled in.
    pub protocol: NowcastProtocol,
    pub origins: Vec<OriginScore>,
    pub summaries: Vec<EstimatorSummary>,
}

/// Plain BIC for a least-squares fit; the candidate sets here are tiny
/// and low-dimensional, with saturated candidates excluded by the caller.
fn ols_bic(n: usize, rss: f64, params: usize) -> f64 {
    let n = n as f64;
    n * (rss.max(f64::MIN_POSITIVE) / n).ln() + params as f64 * n.ln()
}

fn ols_fit(x: &Array2<f64>, y: &Array1<f64>) -> Result<(Vec<f64>, f64)> {
    let n = x.nrows();
    let mut design = Array2::ones((n, x.ncols() + 1));
    design.slice_mut(ndarray::s![.., 1..]).assign(x);
    let coef = least_squares(&design, y)
        .ok_or_else(|| Error::Singular("least squares design".into()))?;
    let mut rss = 0.0;
    for i in 0..n {
        let mut fit = coef[0];
        for j in 0..x.ncols() {
            fit += coef[j + 1] * x[[i, j]];
        }
        let r = y[i] - fit;
        rss += r * r;
    }
    Ok((coef, rss))
}

fn ols_predict(coef: &[f64], row: &[f64]) -> f64 {
    coef[0] + row.iter().zip(&coef[1..]).map(|(a, b)| a * b).sum::<f64>()
}

/// Selects the AR order and per-series lag depths by BIC using only
/// data before `first_origin`, mirroring a modeling subsample that is
/// then frozen for evaluation.
pub fn select_orders(
    panel: &MixedFreqPanel,
    mode: NowcastMode,
    first_origin: usize,
    opts: &RollingOptions,
) -> Result<NowcastProtocol> {
    if opts.max_ar == 0 {
        return Err(Error::InvalidInput("order search needs max_ar >= 1".into()));
    }
    if opts.lag_quarters.is_empty() || opts.lag_quarters.contains(&0) {
        return Err(Error::InvalidInput("lag candidates must be positive quarter counts".into()));
    }

    let zero_budget = vec![0usize; panel.n_series()];
    let mut best_ar = None;
    for a in 1..=opts.max_ar {
        let protocol = NowcastProtocol::new(NowcastMode::Forecast, a, zero_budget.clone());
        let design = build_design(panel, &protocol, first_origin)?;
        if design.n_train() <= a + 1 {
            continue;
        }
        let (_, rss) = ols_fit(&design.x, &design.y)?;
        let bic = ols_bic(design.n_train(), rss, a + 1);
        if best_ar.map_or(true, |(b, _)| bic < b) {
            best_ar = Some((bic, a));
        }
    }
    let (_, ar_order) =
        best_ar.ok_or_else(|| Error::InvalidInput("no autoregressive order is estimable".into()))?;

    let mut lag_budget = Vec::with_capacity(panel.n_series());
    for l in 0..panel.n_series() {
        let m = panel.series(l).m;
        let mut best: Option<(f64, usize)> = None;
        for &q in &opts.lag_quarters {
            let mut budget = zero_budget.clone();
            budget[l] = q * m;
            let protocol = NowcastProtocol::new(NowcastMode::Forecast, ar_order, budget);
            let design = match build_design(panel, &protocol, first_origin) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let params = design.n_columns() + 1;
            if design.n_train() <= params {
                // saturated least squares carries no selection signal
                continue;
            }
            let (_, rss) = ols_fit(&design.x, &design.y)?;
            let bic = ols_bic(design.n_train(), rss, params);
            if best.map_or(true, |(b, _)| bic < b) {
                best = Some((bic, q * m));
            }
        }
        lag_budget.push(best.map(|(_, b)| b).unwrap_or(0));
    }

    Ok(NowcastProtocol::new(mode, ar_order, lag_budget))
}

/// Centered/scaled penalized regression: returns the prediction at
/// `origin_row`. Columns with zero variance are dropped from the fit.
fn lasso_predict(
    x: &Array2<f64>,
    y: &Array1<f64>,
    origin_row: &[f64],
    grid: usize,
    solver: &SolverOptions,
) -> Result<f64> {
    let n = x.nrows();
    let p = x.ncols();
    let nf = n as f64;
    let y_mean = y.sum() / nf;

    let mut keep = Vec::new();
    let mut means = Vec::new();
    let mut scales = Vec::new();
    for j in 0..p {
        let col = x.column(j);
        let mean = col.sum() / nf;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        if var > 1e-24 {
            keep.push(j);
            means.push(mean);
            scales.push(var.sqrt());
        }
    }
    if keep.is_empty() {
        return Ok(y_mean);
    }

    let mut xs = Array2::zeros((n, keep.len()));
    for (c, &j) in keep.iter().enumerate() {
        for i in 0..n {
            xs[[i, c]] = (x[[i, j]] - means[c]) / scales[c];
        }
    }
    let ys = Array1::from_iter(y.iter().map(|v| v - y_mean));
    let problem = RegressionProblem::new(xs, ys)?;
    let path = fit_path_bic(&problem, grid, solver)?;
    let beta = path.selected().beta.values();

    let mut pred = y_mean;
    for (c, &j) in keep.iter().enumerate() {
        pred += beta[c] * (origin_row[j] - means[c]) / scales[c];
    }
    Ok(pred)
}

/// One weight group per series over its contiguous design columns, AR
/// lags left unconstrained. Starts from the AR-only least squares fit
/// with flat group weights and zero group slopes.
fn midas_predict(design: &NowcastDesign, opts: &MidasOptions) -> Result<f64> {
    let ar_x = design.x.select(ndarray::Axis(1), &design.ar_columns);
    let (ar_coef, _) = ols_fit(&ar_x, &design.y)?;

    let groups: Vec<std::ops::Range<usize>> =
        design.series_columns.iter().filter(|r| !r.is_empty()).cloned().collect();
    let layout = MidasLayout::new(design.ar_columns.clone(), groups.clone())?;
    let init = MidasModel::new(
        layout,
        ar_coef[1..].to_vec(),
        Some(ar_coef[0]),
        vec![0.0; groups.len()],
        vec![(0.0, 0.0); groups.len()],
        crate::dgp::AlmonVariant::default(),
    )?;
    let problem = RegressionProblem::new(design.x.clone(), design.y.clone())?;
    let fit = fit_midas(&problem, &init, opts)?;
    Ok(fit.model.mean(&design.origin_x))
}

fn predict_one(
    estimator: NowcastEstimator,
    design: &NowcastDesign,
    opts: &RollingOptions,
) -> Result<f64> {
    match estimator {
        NowcastEstimator::ArOls => {
            let ar_x = design.x.select(ndarray::Axis(1), &design.ar_columns);
            let (coef, _) = ols_fit(&ar_x, &design.y)?;
            let row: Vec<f64> =
                design.ar_columns.iter().map(|&j| design.origin_x[j]).collect();
            Ok(ols_predict(&coef, &row))
        }
        NowcastEstimator::ArLasso => {
            let ar_x = design.x.select(ndarray::Axis(1), &design.ar_columns);
            let row: Vec<f64> =
                design.ar_columns.iter().map(|&j| design.origin_x[j]).collect();
            lasso_predict(&ar_x, &design.y, &row, opts.lambda_grid, &opts.solver)
        }
        NowcastEstimator::LassoBic => {
            lasso_predict(&design.x, &design.y, &design.origin_x, opts.lambda_grid, &opts.solver)
        }
        NowcastEstimator::MidasEmpirical => midas_predict(design, &opts.midas),
    }
}

/// Runs every estimator over `origins` (panel indices) under one
/// protocol mode with expanding training windows.
pub fn rolling_evaluation(
    panel: &MixedFreqPanel,
    mode: NowcastMode,
    estimators: &[NowcastEstimator],
    origins: std::ops::Range<usize>,
    opts: &RollingOptions,
) -> Result<RollingResult> {
    if estimators.is_empty() {
        return Err(Error::InvalidInput("need at least one estimator".into()));
    }
    if origins.is_empty() {
        return Err(Error::InvalidInput("empty origin range".into()));
    }
    if origins.end > panel.len() {
        return Err(Error::InvalidInput(format!(
            "origins end at {} but the panel has {} quarters",
            origins.end,
            panel.len()
        )));
    }

    let protocol = select_orders(panel, mode, origins.start, opts)?;

    let mut scores = Vec::new();
    for origin in origins.clone() {
        let design = build_design(panel, &protocol, origin)?;
        super::audit_no_lookahead(&design, panel, &protocol)?;
        let actual = panel.y()[origin];
        let predictions = estimators
            .iter()
            .map(|&e| predict_one(e, &design, opts).ok())
            .collect();
        scores.push(OriginScore { origin: panel.quarters()[origin], actual, predictions });
    }

    let mut summaries = Vec::new();
    for (idx, &estimator) in estimators.iter().enumerate() {
        let errors: Vec<f64> = scores
            .iter()
            .filter_map(|s| s.predictions[idx].map(|p| p - s.actual))
            .collect();
        let failures = scores.len() - errors.len();
        if errors.is_empty() {
            return Err(Error::NoConvergedFit(format!(
                "{} failed at every origin",
                estimator.as_str()
            )));
        }
        let mut abs: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
        abs.sort_by(f64::total_cmp);
        let mad = if abs.len() % 2 == 1 {
            abs[abs.len() / 2]
        } else {
            0.5 * (abs[abs.len() / 2 - 1] + abs[abs.len() / 2])
        };
        let mae = abs.iter().sum::<f64>() / abs.len() as f64;
        let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt();
        summaries.push(EstimatorSummary { estimator, mad, mae, rmse, used: abs.len(), failures });
    }

    Ok(RollingResult { estimators: estimators.to_vec(), protocol, origins: scores, summaries })
}

impl RollingResult {
    pub fn summary(&self, estimator: NowcastEstimator) -> Option<&EstimatorSummary> {
        self.summaries.iter().find(|s| s.estimator == estimator)
    }

    /// Writes `scores.csv` plus the cumulative absolute and squared error
    /// curves. A failed origin leaves an estimator's running total
    /// unchanged, so the curves stay non-decreasing.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;

        let mut scores = fs::File::create(dir.join("scores.csv"))?;
        writeln!(scores, "estimator,mad,mae,rmse,origins_used,failures")?;
        for s in &self.summaries {
            writeln!(
                scores,
                "{},{:.10e},{:.10e},{:.10e},{},{}",
                s.estimator.as_str(),
                s.mad,
                s.mae,
                s.rmse,
                s.used,
                s.failures
            )?;
        }

        let header: Vec<&str> = self.estimators.iter().map(|e| e.as_str()).collect();
        for (file, power) in [("cum_abs.csv", 1), ("cum_sq.csv", 2)] {
            let mut out = fs::File::create(dir.join(file))?;
            writeln!(out, "origin,{}", header.join(","))?;
            let mut running = vec![0.0f64; self.estimators.len()];
            for score in &self.origins {
                for (idx, pred) in score.predictions.iter().enumerate() {
                    if let Some(p) = pred {
                        let e = (p - score.actual).abs();
                        running[idx] += if power == 1 { e } else { e * e };
                    }
                }
                let cells: Vec<String> = running.iter().map(|v| format!("{v:.10e}")).collect();
                writeln!(out, "{},{}", score.origin, cells.join(","))?;
            }
        }
        Ok(())
    }
}
