//! Functional dependence measures, estimated by coupled simulation.
//!
//! For a causal process `x_i = g(..., eps_{i-1}, eps_i)`, the coordinate
//! dependence coefficient at horizon `i` is
//!
//! ```text
//!     delta_{i,q,j} = || x_{ij} - x*_{ij} ||_q
//! ```
//!
//! where the starred process reruns `g` with the time-0 innovation
//! replaced by an independent copy. Tail sums `Delta_{m,q,j}`, the
//! dependence adjusted norm `sup_m (m+1)^a Delta_{m,q,j}`, and their
//! max-over-coordinates counterparts (`omega`, `Omega`) quantify how fast
//! the process forgets a single shock.
//!
//! Estimation draws `mc` independent coupled pairs, accumulated in fixed
//! batch order so results do not depend on the number of worker threads.

mod rates;

pub use rates::{
    rate_profile, theorem2_scaling, ErrorBounds, LambdaScale, RateConstants, RateProfile,
    Theorem2Inputs, Theorem2Scaling,
};

use ndarray::Array2;
use rayon::prelude::*;

use crate::dgp::ProcessSpec;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone)]
pub struct FdmOptions {
    /// Moment order of the coupling norm.
    pub q: f64,
    /// Largest horizon estimated.
    pub i_max: usize,
    /// Number of coupled pairs.
    pub mc: usize,
    pub seed: u64,
    /// Batches for standard errors and parallelism (default 32).
    pub batches: usize,
}

impl FdmOptions {
    pub fn new(q: f64, i_max: usize, mc: usize, seed: u64) -> Self {
        Self { q, i_max, mc, seed, batches: 32 }
    }
}

/// Estimated dependence profile of one process.
#[derive(Debug, Clone)]
pub struct DependenceReport {
    q: f64,
    i_max: usize,
    mc: usize,
    /// `delta[[i, j]]` estimates the coordinate-`j` coefficient at
    /// horizon `i`.
    delta: Array2<f64>,
    delta_se: Array2<f64>,
    /// `omega[i]` estimates the max-over-coordinates coefficient.
    omega: Vec<f64>,
}

pub fn estimate_fdm(spec: &ProcessSpec, opts: &FdmOptions) -> Result<DependenceReport> {
    if !opts.q.is_finite() || opts.q <= 1.0 {
        return Err(Error::InvalidInput(format!("moment order must exceed 1, got {}", opts.q)));
    }
    let bound = spec.law().moment_order_bound();
    if opts.q >= bound {
        return Err(Error::MomentCondition(format!(
            "order {} moment does not exist for the innovation law (finite only below {bound})",
            opts.q
        )));
    }
    if opts.mc == 0 {
        return Err(Error::InvalidInput("need at least one coupled pair".into()));
    }
    let batches = opts.batches.clamp(1, opts.mc);
    let p = spec.dimension();
    let rows = opts.i_max + 1;

    struct BatchAcc {
        size: usize,
        sum_abs_q: Array2<f64>,
        sum_max_q: Vec<f64>,
    }

    let base = opts.mc / batches;
    let rem = opts.mc % batches;
    let accs: Vec<BatchAcc> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let size = base + usize::from(b < rem);
            let mut rng = stream_rng(opts.seed, &[0xFD, b as u64]);
            let mut sum_abs_q = Array2::zeros((rows, p));
            let mut sum_max_q = vec![0.0; rows];
            for _ in 0..size {
                let (x, xs) = spec.simulate_coupled(opts.i_max, &mut rng);
                for i in 0..rows {
                    let mut row_max = 0.0f64;
                    for j in 0..p {
                        let d = (x[[i, j]] - xs[[i, j]]).abs();
                        sum_abs_q[[i, j]] += d.powf(opts.q);
                        row_max = row_max.max(d);
                    }
                    sum_max_q[i] += row_max.powf(opts.q);
                }
            }
            BatchAcc { size, sum_abs_q, sum_max_q }
        })
        .collect();

    // Deterministic merge in batch order.
    let mut total_abs = Array2::zeros((rows, p));
    let mut total_max = vec![0.0; rows];
    for acc in &accs {
        total_abs += &acc.sum_abs_q;
        for i in 0..rows {
            total_max[i] += acc.sum_max_q[i];
        }
    }
    let mcf = opts.mc as f64;
    let inv_q = 1.0 / opts.q;
    let delta = total_abs.mapv(|v| (v / mcf).powf(inv_q));
    let omega: Vec<f64> = total_max.iter().map(|v| (v / mcf).powf(inv_q)).collect();

    // Spread of per-batch estimates around the pooled value.
    let mut delta_se = Array2::zeros((rows, p));
    if batches >= 2 {
        for i in 0..rows {
            for j in 0..p {
                let mut mean = 0.0;
                let ests: Vec<f64> = accs
                    .iter()
                    .filter(|a| a.size > 0)
                    .map(|a| (a.sum_abs_q[[i, j]] / a.size as f64).powf(inv_q))
                    .collect();
                for e in &ests {
                    mean += e;
                }
                mean /= ests.len() as f64;
                let var = ests.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
                    / (ests.len().saturating_sub(1)).max(1) as f64;
                delta_se[[i, j]] = (var / ests.len() as f64).sqrt();
            }
        }
    }

    Ok(DependenceReport { q: opts.q, i_max: opts.i_max, mc: opts.mc, delta, delta_se, omega })
}

/// Dependence adjusted norm per coordinate at decay exponent `alpha`;
/// shorthand for [`DependenceReport::dan_all`].
pub fn dan(report: &DependenceReport, alpha: f64) -> Result<Vec<f64>> {
    report.dan_all(alpha)
}

impl DependenceReport {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn i_max(&self) -> usize {
        self.i_max
    }

    pub fn mc(&self) -> usize {
        self.mc
    }

    pub fn p(&self) -> usize {
        self.delta.ncols()
    }

    pub fn delta(&self, i: usize, j: usize) -> f64 {
        self.delta[[i, j]]
    }

    pub fn delta_se(&self, i: usize, j: usize) -> f64 {
        self.delta_se[[i, j]]
    }

    pub fn omega(&self, i: usize) -> f64 {
        self.omega[i]
    }

    /// Geometric tail beyond the estimated horizon, fit to the last five
    /// positive coefficients. A zero inside the window marks finite-range
    /// dependence and yields a zero tail; a fitted ratio at or above 1 is
    /// a short-range dependence violation and errors.
    pub fn tail_correction(&self, j: usize) -> Result<f64> {
        let seq: Vec<f64> = (0..=self.i_max).map(|i| self.delta[[i, j]]).collect();
        geometric_tail(&seq)
    }

    fn omega_tail(&self) -> Result<f64> {
        geometric_tail(&self.omega)
    }

    /// `Delta_{m,q,j}`: coefficients summed from horizon `m`, plus the
    /// fitted tail beyond the horizon.
    pub fn cumulative(&self, m: usize, j: usize) -> Result<f64> {
        if m > self.i_max {
            return Err(Error::InvalidInput(format!(
                "horizon {m} exceeds estimated i_max {}",
                self.i_max
            )));
        }
        let tail = self.tail_correction(j)?;
        let mut s = tail;
        for i in m..=self.i_max {
            s += self.delta[[i, j]];
        }
        Ok(s)
    }

    /// `sup_m (m+1)^alpha Delta_{m,q,j}` over `m <= i_max`.
    pub fn dan_coord(&self, j: usize, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let tail = self.tail_correction(j)?;
        let mut suffix = tail;
        let mut sups = vec![0.0; self.i_max + 1];
        for m in (0..=self.i_max).rev() {
            suffix += self.delta[[m, j]];
            sups[m] = ((m + 1) as f64).powf(alpha) * suffix;
        }
        Ok(sups.into_iter().fold(0.0, f64::max))
    }

    pub fn dan_all(&self, alpha: f64) -> Result<Vec<f64>> {
        (0..self.p()).map(|j| self.dan_coord(j, alpha)).collect()
    }

    /// Uniform norm: the largest coordinate dependence adjusted norm.
    pub fn psi(&self, alpha: f64) -> Result<f64> {
        Ok(self.dan_all(alpha)?.into_iter().fold(0.0, f64::max))
    }

    /// Overall norm: the l_q aggregate of coordinate norms.
    pub fn upsilon(&self, alpha: f64) -> Result<f64> {
        let dans = self.dan_all(alpha)?;
        let mut s = 0.0;
        for d in &dans {
            s += d.powf(self.q);
        }
        Ok(s.powf(1.0 / self.q))
    }

    /// `sup_m (m+1)^alpha Omega_m` built from the max-over-coordinates
    /// coefficients; sits between [`Self::psi`] and [`Self::upsilon`].
    pub fn linf_dan(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let tail = self.omega_tail()?;
        let mut suffix = tail;
        let mut best = 0.0f64;
        for m in (0..=self.i_max).rev() {
            suffix += self.omega[m];
            best = best.max(((m + 1) as f64).powf(alpha) * suffix);
        }
        Ok(best)
    }

    /// Writes the coefficient table as CSV: `i,j,delta,stderr` rows.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "i,j,delta,stderr")?;
        for i in 0..=self.i_max {
            for j in 0..self.p() {
                writeln!(w, "{i},{},{:.10e},{:.10e}", j + 1, self.delta[[i, j]], self.delta_se[[i, j]])?;
            }
        }
        Ok(())
    }

    /// Writes the aggregate norms at decay exponent `alpha` as key-value
    /// lines.
    pub fn write_summary<W: std::io::Write>(&self, alpha: f64, mut w: W) -> Result<()> {
        writeln!(w, "q = {}", self.q)?;
        writeln!(w, "alpha = {alpha}")?;
        writeln!(w, "i_max = {}", self.i_max)?;
        writeln!(w, "mc = {}", self.mc)?;
        writeln!(w, "p = {}", self.p())?;
        writeln!(w, "psi = {:.10e}", self.psi(alpha)?)?;
        writeln!(w, "linf_dan = {:.10e}", self.linf_dan(alpha)?)?;
        writeln!(w, "upsilon = {:.10e}", self.upsilon(alpha)?)?;
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidInput(format!(
            "decay exponent must be finite and non-negative, got {alpha}"
        )));
    }
    Ok(())
}

/// Tail sum past the end of `seq` under a geometric fit to its last five
/// (or fewer) values.
fn geometric_tail(seq: &[f64]) -> Result<f64> {
    let window = seq.len().min(5);
    if window < 2 {
        return Ok(0.0);
    }
    let vals = &seq[seq.len() - window..];
    if vals.iter().any(|v| *v <= 0.0) {
        return Ok(0.0);
    }
    // Least squares slope of ln(delta) on the horizon index.
    let k = window as f64;
    let mean_i = (window as f64 - 1.0) / 2.0;
    let mean_l = vals.iter().map(|v| v.ln()).sum::<f64>() / k;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, v) in vals.iter().enumerate() {
        let di = i as f64 - mean_i;
        num += di * (v.ln() - mean_l);
        den += di * di;
    }
    let r = (num / den).exp();
    if !(r < 1.0 - 1e-9) {
        return Err(Error::NonSummableDependence(format!(
            "fitted decay ratio {r:.6} is not below 1; cumulative dependence does not converge"
        )));
    }
    Ok(vals[window - 1] * r / (1.0 - r))
}
