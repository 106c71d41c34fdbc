//! MIDAS regression with the exponential lag weighting scheme.
//!
//! The conditional mean is
//!
//! ```text
//!     intercept + sum_k ar_k * x[ar_col_k]
//!               + sum_g theta_g * sum_{j in group g} w_j(delta_g) * x[j]
//! ```
//!
//! where `w` comes from [`almon_weights`]. Only `delta` enters
//! nonlinearly, so the model is fit by damped Gauss-Newton on the squared
//! residuals with a numerically differenced Jacobian.

use std::ops::Range;

use ndarray::{Array1, Array2};

use crate::dgp::{almon_weights, AlmonVariant};
use crate::error::{Error, Result};
use crate::linalg::solve_linear;
use crate::problem::RegressionProblem;

/// Index structure of a MIDAS design: which columns enter linearly with
/// free coefficients (autoregressive lags) and which contiguous ranges
/// form weighted groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MidasLayout {
    pub ar_columns: Vec<usize>,
    pub groups: Vec<Range<usize>>,
}

impl MidasLayout {
    pub fn new(ar_columns: Vec<usize>, groups: Vec<Range<usize>>) -> Result<Self> {
        let layout = Self { ar_columns, groups };
        layout.validate()?;
        Ok(layout)
    }

    fn validate(&self) -> Result<()> {
        let mut cols: Vec<usize> = self.ar_columns.clone();
        for g in &self.groups {
            if g.is_empty() {
                return Err(Error::InvalidInput(format!("empty group range {g:?}")));
            }
            cols.extend(g.clone());
        }
        let before = cols.len();
        cols.sort_unstable();
        cols.dedup();
        if cols.len() != before {
            return Err(Error::InvalidInput(
                "autoregressive columns and group ranges must be disjoint".into(),
            ));
        }
        Ok(())
    }

    /// One past the largest column this layout touches.
    pub fn required_columns(&self) -> usize {
        let mut max = 0;
        for &c in &self.ar_columns {
            max = max.max(c + 1);
        }
        for g in &self.groups {
            max = max.max(g.end);
        }
        max
    }

    pub fn parameter_count(&self, intercept: bool) -> usize {
        self.ar_columns.len() + usize::from(intercept) + 3 * self.groups.len()
    }
}

/// A fully specified MIDAS mean function.
#[derive(Debug, Clone, PartialEq)]
pub struct MidasModel {
    layout: MidasLayout,
    /// Free coefficients aligned with `layout.ar_columns`.
    pub ar: Vec<f64>,
    pub intercept: Option<f64>,
    /// Group slopes aligned with `layout.groups`.
    pub thetas: Vec<f64>,
    /// Weight parameters `(d1, d2)` per group.
    pub deltas: Vec<(f64, f64)>,
    pub variant: AlmonVariant,
}

impl MidasModel {
    pub fn new(
        layout: MidasLayout,
        ar: Vec<f64>,
        intercept: Option<f64>,
        thetas: Vec<f64>,
        deltas: Vec<(f64, f64)>,
        variant: AlmonVariant,
    ) -> Result<Self> {
        layout.validate()?;
        if ar.len() != layout.ar_columns.len() {
            return Err(Error::InvalidInput(format!(
                "{} autoregressive coefficients for {} columns",
                ar.len(),
                layout.ar_columns.len()
            )));
        }
        if thetas.len() != layout.groups.len() || deltas.len() != layout.groups.len() {
            return Err(Error::InvalidInput(format!(
                "{} slopes and {} weight parameter pairs for {} groups",
                thetas.len(),
                deltas.len(),
                layout.groups.len()
            )));
        }
        let model = Self { layout, ar, intercept, thetas, deltas, variant };
        for v in model.pack() {
            if !v.is_finite() {
                return Err(Error::NonFinite("model parameters".into()));
            }
        }
        // Weight evaluation doubles as a finiteness check.
        for (g, delta) in model.deltas.iter().enumerate() {
            almon_weights(model.layout.groups[g].len(), *delta, model.variant)?;
        }
        Ok(model)
    }

    pub fn layout(&self) -> &MidasLayout {
        &self.layout
    }

    /// The first autoregressive coefficient; the plain AR(1) term in
    /// simulation designs.
    pub fn phi(&self) -> f64 {
        self.ar.first().copied().unwrap_or(0.0)
    }

    /// Conditional mean at one feature row.
    pub fn mean(&self, row: &[f64]) -> f64 {
        let mut out = self.intercept.unwrap_or(0.0);
        for (k, &col) in self.layout.ar_columns.iter().enumerate() {
            out += self.ar[k] * row[col];
        }
        for (g, range) in self.layout.groups.iter().enumerate() {
            // Validated at construction, so the unwrap cannot fire.
            let w = almon_weights(range.len(), self.deltas[g], self.variant).unwrap();
            let mut acc = 0.0;
            for (wj, col) in w.iter().zip(range.clone()) {
                acc += wj * row[col];
            }
            out += self.thetas[g] * acc;
        }
        out
    }

    /// Per-column linear coefficients the model implies: autoregressive
    /// coefficients on their columns, `theta_g * w_j` on group columns,
    /// zero elsewhere.
    pub fn implied_coefficients(&self, n_cols: usize) -> Result<Vec<f64>> {
        if n_cols < self.layout.required_columns() {
            return Err(Error::InvalidInput(format!(
                "layout needs {} columns, asked to expand into {n_cols}",
                self.layout.required_columns()
            )));
        }
        let mut beta = vec![0.0; n_cols];
        for (k, &col) in self.layout.ar_columns.iter().enumerate() {
            beta[col] = self.ar[k];
        }
        for (g, range) in self.layout.groups.iter().enumerate() {
            let w = almon_weights(range.len(), self.deltas[g], self.variant)?;
            for (wj, col) in w.iter().zip(range.clone()) {
                beta[col] = self.thetas[g] * wj;
            }
        }
        Ok(beta)
    }

    /// Flattens parameters in the optimizer's order: autoregressive
    /// coefficients, intercept if present, then `(theta, d1, d2)` per
    /// group.
    fn pack(&self) -> Vec<f64> {
        let mut p = self.ar.clone();
        if let Some(c) = self.intercept {
            p.push(c);
        }
        for g in 0..self.thetas.len() {
            p.push(self.thetas[g]);
            p.push(self.deltas[g].0);
            p.push(self.deltas[g].1);
        }
        p
    }

    fn unpack(&self, params: &[f64]) -> Self {
        let mut model = self.clone();
        let mut k = 0;
        for a in model.ar.iter_mut() {
            *a = params[k];
            k += 1;
        }
        if model.intercept.is_some() {
            model.intercept = Some(params[k]);
            k += 1;
        }
        for g in 0..model.thetas.len() {
            model.thetas[g] = params[k];
            model.deltas[g] = (params[k + 1], params[k + 2]);
            k += 3;
        }
        model
    }
}

/// Predicts the next response in the simulation convention: feature row
/// `[y_prev, x_prev...]` with the lagged response in column 0.
pub fn predict_midas(model: &MidasModel, y_prev: f64, x_prev: &[f64]) -> f64 {
    let mut row = Vec::with_capacity(x_prev.len() + 1);
    row.push(y_prev);
    row.extend_from_slice(x_prev);
    model.mean(&row)
}

#[derive(Debug, Clone)]
pub struct MidasOptions {
    pub max_iterations: usize,
    /// Relative RSS improvement below which iteration stops.
    pub rss_tolerance: f64,
    /// Parameter step norm below which iteration stops.
    pub step_tolerance: f64,
}

impl Default for MidasOptions {
    fn default() -> Self {
        Self { max_iterations: 200, rss_tolerance: 1e-10, step_tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct MidasFit {
    pub model: MidasModel,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub initial_values_used: Vec<f64>,
}

impl MidasFit {
    /// Writes the fitted parameters and diagnostics as key-value lines.
    pub fn write_summary<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "rss = {:.10e}", self.rss)?;
        writeln!(w, "iterations = {}", self.iterations)?;
        writeln!(w, "converged = {}", self.converged)?;
        for (k, &col) in self.model.layout().ar_columns.iter().enumerate() {
            writeln!(w, "ar[{col}] = {:.10e}", self.model.ar[k])?;
        }
        if let Some(c) = self.model.intercept {
            writeln!(w, "intercept = {c:.10e}")?;
        }
        for g in 0..self.model.thetas.len() {
            writeln!(w, "theta[{g}] = {:.10e}", self.model.thetas[g])?;
            writeln!(w, "delta1[{g}] = {:.10e}", self.model.deltas[g].0)?;
            writeln!(w, "delta2[{g}] = {:.10e}", self.model.deltas[g].1)?;
        }
        Ok(())
    }
}

/// Residual vector in one pass: given the weights, the mean is linear in
/// the features, so expand to per-column coefficients once and use a
/// single matrix-vector product instead of per-row weight evaluation.
fn residuals(problem: &RegressionProblem, model: &MidasModel) -> Result<Array1<f64>> {
    let beta = Array1::from_vec(model.implied_coefficients(problem.p())?);
    let mut r = problem.y().to_owned();
    r -= &problem.x().dot(&beta);
    if let Some(c) = model.intercept {
        r.mapv_inplace(|v| v - c);
    }
    Ok(r)
}

fn rss_of(r: &Array1<f64>) -> f64 {
    r.dot(r)
}

/// Minimizes the residual sum of squares by Levenberg-damped Gauss-Newton.
///
/// The Jacobian uses central differences with step `1e-6 * max(1, |v|)`
/// per parameter. Accepted steps never increase the RSS; when damping
/// fails to produce a decrease the fit is returned with
/// `converged = false` rather than an error.
pub fn fit_midas(
    problem: &RegressionProblem,
    init: &MidasModel,
    opts: &MidasOptions,
) -> Result<MidasFit> {
    if init.layout.required_columns() > problem.p() {
        return Err(Error::InvalidInput(format!(
            "layout touches column {} but the design has only {} columns",
            init.layout.required_columns() - 1,
            problem.p()
        )));
    }
    let n = problem.n();
    let mut params = init.pack();
    let initial_values_used = params.clone();
    let dim = params.len();
    if dim == 0 {
        return Err(Error::InvalidInput("model has no parameters to fit".into()));
    }

    let mut model = init.unpack(&params);
    let mut resid = residuals(problem, &model)?;
    let mut rss = rss_of(&resid);
    let mut damping = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..opts.max_iterations {
        iterations += 1;

        // Central-difference Jacobian of the residual vector. A weight
        // overflow at a perturbed point zeroes that column instead of
        // aborting the fit.
        let mut jac = Array2::zeros((n, dim));
        for k in 0..dim {
            let h = 1e-6 * params[k].abs().max(1.0);
            let mut hi = params.clone();
            hi[k] += h;
            let mut lo = params.clone();
            lo[k] -= h;
            let r_hi = residuals(problem, &model.unpack(&hi)).unwrap_or_else(|_| resid.clone());
            let r_lo = residuals(problem, &model.unpack(&lo)).unwrap_or_else(|_| resid.clone());
            for i in 0..n {
                jac[[i, k]] = (r_hi[i] - r_lo[i]) / (2.0 * h);
            }
        }
        let jtj = jac.t().dot(&jac);
        let jtr = jac.t().dot(&resid);

        // Try increasingly damped steps until the RSS drops.
        let mut accepted = false;
        for _ in 0..25 {
            let mut lhs = jtj.clone();
            for k in 0..dim {
                lhs[[k, k]] += damping * jtj[[k, k]].max(1e-12);
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(step) = solve_linear(&lhs, &rhs) else {
                damping *= 10.0;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(&step).map(|(p, d)| p + d).collect();
            if trial.iter().any(|v| !v.is_finite()) {
                damping *= 10.0;
                continue;
            }
            let trial_model = model.unpack(&trial);
            let Ok(trial_resid) = residuals(problem, &trial_model) else {
                damping *= 10.0;
                continue;
            };
            let trial_rss = rss_of(&trial_resid);
            if trial_rss <= rss {
                let step_norm = step.iter().map(|d| d * d).sum::<f64>().sqrt();
                let params_norm = params.iter().map(|p| p * p).sum::<f64>().sqrt();
                let rel_drop = (rss - trial_rss) / rss.max(1e-300);
                params = trial;
                model = trial_model;
                resid = trial_resid;
                rss = trial_rss;
                damping = (damping / 3.0).max(1e-12);
                accepted = true;
                if rel_drop < opts.rss_tolerance || step_norm < opts.step_tolerance * (1.0 + params_norm) {
                    converged = true;
                }
                break;
            }
            damping *= 10.0;
        }
        if converged || !accepted {
            // A rejected round means the quadratic model cannot improve
            // on this point at any damping we tried; treat a tiny
            // gradient as convergence, otherwise flag the fit.
            if !accepted {
                let grad_norm = jtr.iter().map(|g| g * g).sum::<f64>().sqrt();
                converged = grad_norm <= 1e-8 * (1.0 + rss);
            }
            break;
        }
    }

    Ok(MidasFit { model, rss, iterations, converged, initial_values_used })
}

/// Simulation-protocol group layout over a design whose column 0 is the
/// lagged response: the active groups matching the coefficient family
/// (sizes 5, or 5+5, or 5+5+10 by sparsity), then inactive padding groups
/// of up to ten covariates each, covering the first `min(p, 100)`
/// covariates.
pub fn simulation_layout(p: usize, s: usize) -> Result<MidasLayout> {
    let active: &[usize] = match s {
        5 => &[5],
        10 => &[5, 5],
        20 => &[5, 5, 10],
        _ => {
            return Err(Error::InvalidInput(format!(
                "supported sparsity levels are 5, 10, 20; got {s}"
            )))
        }
    };
    if p < s {
        return Err(Error::InvalidInput(format!("need p >= s, got p = {p}, s = {s}")));
    }
    let covered = p.min(100);
    let mut groups = Vec::new();
    let mut start = 1; // design column 0 is the lagged response
    for &size in active {
        groups.push(start..start + size);
        start += size;
    }
    while start < covered + 1 {
        let size = (covered + 1 - start).min(10);
        groups.push(start..start + size);
        start += size;
    }
    MidasLayout::new(vec![0], groups)
}

/// Truth-initialized model for the simulation protocol: the slope of each
/// group is the least squares projection of the true coefficients onto
/// that group's weight vector at the true `delta = (0.5, -1)`.
pub fn simulation_initial_model(
    p: usize,
    s: usize,
    truth_phi: f64,
    truth_beta: &[f64],
    variant: AlmonVariant,
) -> Result<MidasModel> {
    if truth_beta.len() != p {
        return Err(Error::InvalidInput(format!(
            "{} true coefficients for p = {p}",
            truth_beta.len()
        )));
    }
    let layout = simulation_layout(p, s)?;
    let delta = (0.5, -1.0);
    let mut thetas = Vec::with_capacity(layout.groups.len());
    let mut deltas = Vec::with_capacity(layout.groups.len());
    for range in &layout.groups {
        let w = almon_weights(range.len(), delta, variant)?;
        let mut ww = 0.0;
        let mut wb = 0.0;
        for (wj, col) in w.iter().zip(range.clone()) {
            ww += wj * wj;
            wb += wj * truth_beta[col - 1]; // shift past the response column
        }
        thetas.push(if ww > 0.0 { wb / ww } else { 0.0 });
        deltas.push(delta);
    }
    MidasModel::new(layout, vec![truth_phi], None, thetas, deltas, variant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn gaussian(rng: &mut impl Rng) -> f64 {
        // Box-Muller from two uniforms.
        let u1: f64 = rng.gen::<f64>().max(1e-12);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn toy_model() -> MidasModel {
        let layout = MidasLayout::new(vec![0], vec![1..4, 4..8]).unwrap();
        MidasModel::new(
            layout,
            vec![0.5],
            None,
            vec![1.2, -0.7],
            vec![(0.3, -0.4), (0.1, -0.2)],
            AlmonVariant::AsPrinted,
        )
        .unwrap()
    }

    fn simulate(model: &MidasModel, n: usize, noise: f64, seed: u64) -> RegressionProblem {
        let mut rng = stream_rng(seed, &[0xA1]);
        let cols = model.layout().required_columns();
        let x = Array2::from_shape_fn((n, cols), |_| gaussian(&mut rng));
        let y = Array1::from_shape_fn(n, |i| {
            model.mean(&x.row(i).to_vec()) + noise * gaussian(&mut rng)
        });
        RegressionProblem::new(x, y).unwrap()
    }

    #[test]
    fn noiseless_data_recovers_parameters() {
        let truth = toy_model();
        let problem = simulate(&truth, 400, 0.0, 1);
        let init = MidasModel::new(
            truth.layout().clone(),
            vec![0.3],
            None,
            vec![0.8, -0.3],
            vec![(0.1, -0.1), (0.0, -0.1)],
            AlmonVariant::AsPrinted,
        )
        .unwrap();
        let fit = fit_midas(&problem, &init, &MidasOptions::default()).unwrap();
        assert!(fit.rss <= 1e-12, "rss = {}", fit.rss);
        assert!(fit.converged);
        let got = fit.model.implied_coefficients(8).unwrap();
        let want = truth.implied_coefficients(8).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-6, "{g} vs {w}");
        }
    }

    #[test]
    fn truth_initialization_is_already_stationary() {
        let truth = toy_model();
        let problem = simulate(&truth, 300, 0.0, 2);
        let fit = fit_midas(&problem, &truth, &MidasOptions::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.iterations <= 2, "took {} iterations", fit.iterations);
        assert!(fit.rss <= 1e-18);

        // Finite-difference gradient of the RSS at the returned optimum.
        let params = fit.model.pack();
        let mut grad_norm = 0.0f64;
        for k in 0..params.len() {
            let h = 1e-6 * params[k].abs().max(1.0);
            let mut hi = params.clone();
            hi[k] += h;
            let mut lo = params.clone();
            lo[k] -= h;
            let f_hi = rss_of(&residuals(&problem, &fit.model.unpack(&hi)).unwrap());
            let f_lo = rss_of(&residuals(&problem, &fit.model.unpack(&lo)).unwrap());
            grad_norm += ((f_hi - f_lo) / (2.0 * h)).powi(2);
        }
        assert!(grad_norm.sqrt() <= 1e-6, "gradient norm {}", grad_norm.sqrt());
    }

    #[test]
    fn flat_weight_truth_is_recovered_within_ten_percent() {
        let layout = MidasLayout::new(vec![0], vec![1..6]).unwrap();
        let truth = MidasModel::new(
            layout.clone(),
            vec![0.4],
            None,
            vec![1.0],
            vec![(0.0, 0.0)],
            AlmonVariant::Matched,
        )
        .unwrap();
        let problem = simulate(&truth, 2000, 0.1, 3);
        let init = MidasModel::new(
            layout,
            vec![0.2],
            None,
            vec![0.5],
            vec![(0.2, -0.1)],
            AlmonVariant::Matched,
        )
        .unwrap();
        let fit = fit_midas(&problem, &init, &MidasOptions::default()).unwrap();
        let w = almon_weights(5, fit.model.deltas[0], AlmonVariant::Matched).unwrap();
        for wj in w {
            assert!((wj - 0.2).abs() < 0.02, "weight {wj} drifted from uniform");
        }
    }

    #[test]
    fn fit_never_ends_above_initial_rss() {
        let truth = toy_model();
        let problem = simulate(&truth, 250, 0.5, 4);
        let init = MidasModel::new(
            truth.layout().clone(),
            vec![0.0],
            None,
            vec![0.0, 0.0],
            vec![(0.0, 0.0), (0.0, 0.0)],
            AlmonVariant::AsPrinted,
        )
        .unwrap();
        let initial_rss = rss_of(&residuals(&problem, &init).unwrap());
        let fit = fit_midas(&problem, &init, &MidasOptions::default()).unwrap();
        assert!(fit.rss <= initial_rss);
    }

    #[test]
    fn prediction_is_linear_in_features() {
        let model = toy_model();
        let x: Vec<f64> = (0..7).map(|i| 0.3 * i as f64 - 1.0).collect();
        let y_prev = 0.8;
        let base = predict_midas(&model, y_prev, &x);

        // All slopes zero leaves only the autoregressive part.
        let mut bare = model.clone();
        bare.thetas = vec![0.0, 0.0];
        assert!((predict_midas(&bare, y_prev, &x) - 0.5 * y_prev).abs() < 1e-15);

        // Scaling a group's covariates by c and its slope by 1/c leaves
        // the mean unchanged.
        let mut scaled_model = model.clone();
        scaled_model.thetas[0] /= 2.5;
        let mut scaled_x = x.clone();
        for v in scaled_x[0..3].iter_mut() {
            *v *= 2.5;
        }
        assert!((predict_midas(&scaled_model, y_prev, &scaled_x) - base).abs() < 1e-8);
    }

    #[test]
    fn single_group_unit_slope_returns_weighted_sum() {
        let layout = MidasLayout::new(vec![0], vec![1..5]).unwrap();
        let model = MidasModel::new(
            layout,
            vec![0.0],
            None,
            vec![1.0],
            vec![(0.5, -1.0)],
            AlmonVariant::AsPrinted,
        )
        .unwrap();
        let x = [0.4, -0.3, 0.9, 0.1];
        let w = almon_weights(4, (0.5, -1.0), AlmonVariant::AsPrinted).unwrap();
        let want: f64 = w.iter().zip(&x).map(|(wj, xj)| wj * xj).sum();
        assert!((predict_midas(&model, 5.0, &x) - want).abs() < 1e-15);
    }

    #[test]
    fn simulation_layout_covers_first_hundred_covariates() {
        for (p, s, want_groups) in [(100, 5, 1 + 10), (200, 10, 2 + 9), (400, 20, 3 + 8)] {
            let layout = simulation_layout(p, s).unwrap();
            assert_eq!(layout.groups.len(), want_groups, "p = {p}, s = {s}");
            assert_eq!(layout.groups[0].start, 1);
            let covered: usize = layout.groups.iter().map(|g| g.len()).sum();
            assert_eq!(covered, 100);
            // Contiguous, disjoint coverage.
            let mut next = 1;
            for g in &layout.groups {
                assert_eq!(g.start, next);
                next = g.end;
            }
        }
        // Small p still works with a short tail group.
        let layout = simulation_layout(28, 5).unwrap();
        let covered: usize = layout.groups.iter().map(|g| g.len()).sum();
        assert_eq!(covered, 28);
    }

    #[test]
    fn truth_projection_reproduces_exact_group_structure() {
        // When the true coefficients are exactly theta * w the projection
        // returns theta.
        let p = 30;
        let w = almon_weights(5, (0.5, -1.0), AlmonVariant::AsPrinted).unwrap();
        let mut beta = vec![0.0; p];
        for (j, wj) in w.iter().enumerate() {
            beta[j] = 2.5 * wj;
        }
        let model =
            simulation_initial_model(p, 5, 0.6, &beta, AlmonVariant::AsPrinted).unwrap();
        assert!((model.thetas[0] - 2.5).abs() < 1e-12);
        assert!((model.phi() - 0.6).abs() < 1e-15);
        for &t in &model.thetas[1..] {
            assert_eq!(t, 0.0);
        }
    }

    #[test]
    fn overlapping_layout_is_rejected() {
        assert!(MidasLayout::new(vec![0], vec![1..4, 3..6]).is_err());
        assert!(MidasLayout::new(vec![2], vec![1..4]).is_err());
        assert!(MidasLayout::new(vec![0], vec![2..2]).is_err());
    }
}
