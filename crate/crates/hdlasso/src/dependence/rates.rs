//! Non-asymptotic rate calculators for the lasso under serial dependence.
//!
//! Every expression here drops unknown universal constants (treated as 1),
//! so outputs are scalings to compare across `(n, p, s)` settings, not
//! calibrated thresholds.

use crate::error::{Error, Result};

/// Derived exponents shared by the rate expressions.
///
/// `gamma` is the moment order of the process, `q` the moment order used
/// for the error dependence norm, `alpha_x` and `alpha_e` the dependence
/// decay exponents of covariates and errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateProfile {
    pub gamma: f64,
    pub q: f64,
    pub alpha_x: f64,
    pub alpha_e: f64,
    /// Joint moment order `q*gamma / (q + gamma)`.
    pub tau: f64,
    /// Weaker of the two decay exponents.
    pub alpha: f64,
    /// Covariate tail exponent: 1 in the strong-decay regime, else
    /// `gamma/4 - alpha_x*gamma/2`.
    pub nu: f64,
    /// Joint tail exponent: 1 in the strong-decay regime, else
    /// `tau/2 - alpha*tau`.
    pub rho: f64,
}

/// Multiplicative constants entering the scalings; all default to 1.
#[derive(Debug, Clone, Copy)]
pub struct RateConstants {
    /// Covariate dependence adjusted norm bound (per coordinate).
    pub m_x: f64,
    /// Error dependence adjusted norm bound.
    pub m_e: f64,
    /// Restricted eigenvalue of the population covariance.
    pub kappa: f64,
    /// Dependence adjusted norm of the coordinate-wise maximum process.
    pub dan_inf: f64,
    /// Uniform bound on covariates and errors (heavy-tail branch only).
    pub b: f64,
}

impl Default for RateConstants {
    fn default() -> Self {
        Self { m_x: 1.0, m_e: 1.0, kappa: 1.0, dan_inf: 1.0, b: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct LambdaScale {
    /// Per-observation penalty scaling (the objective penalty divided
    /// by the sample size).
    pub value: f64,
    /// Which moment regime produced it.
    pub branch: &'static str,
}

/// Estimation and prediction error bounds at a given penalty level.
#[derive(Debug, Clone, Copy)]
pub struct ErrorBounds {
    pub l2: f64,
    pub l1: f64,
    /// In-sample prediction error `|X(bhat - b)|_2^2 / n`.
    pub prediction: f64,
}

pub fn rate_profile(gamma: f64, q: f64, alpha_x: f64, alpha_e: f64) -> Result<RateProfile> {
    for (name, v) in [("gamma", gamma), ("q", q), ("alpha_x", alpha_x), ("alpha_e", alpha_e)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidInput(format!("{name} must be finite and positive, got {v}")));
        }
    }
    if gamma <= 2.0 {
        return Err(Error::UnsupportedRegime(format!(
            "covariate moment order gamma = {gamma} must exceed 2"
        )));
    }
    if q <= 2.0 {
        return Err(Error::UnsupportedRegime(format!(
            "error moment order q = {q} must exceed 2"
        )));
    }
    let tau = q * gamma / (q + gamma);
    let alpha = alpha_x.min(alpha_e);
    let nu = if alpha_x >= 0.5 - 2.0 / gamma { 1.0 } else { gamma / 4.0 - alpha_x * gamma / 2.0 };
    let rho = if alpha >= 0.5 - 1.0 / tau { 1.0 } else { tau / 2.0 - alpha * tau };
    Ok(RateProfile { gamma, q, alpha_x, alpha_e, tau, alpha, nu, rho })
}

impl RateProfile {
    /// Smallest per-observation penalty scaling that controls the
    /// gradient of the noise, by joint moment regime.
    pub fn lambda_scale(&self, n: usize, p: usize, c: &RateConstants) -> Result<LambdaScale> {
        check_np(n, p)?;
        let nf = n as f64;
        let pf = p as f64;
        if self.tau > 2.0 {
            let value = (pf.ln() / nf).sqrt() * c.m_e * c.m_x
                + nf.powf(self.rho / self.tau - 1.0) * pf.ln().powf(1.5) * c.m_e * c.dan_inf;
            Ok(LambdaScale { value, branch: "tau > 2" })
        } else if self.tau > 1.0 {
            let value = c.b * pf.powf(1.0 / self.tau) * nf.powf(1.0 / self.tau - 1.0) * c.m_x * c.m_e;
            Ok(LambdaScale { value, branch: "1 < tau <= 2" })
        } else {
            Err(Error::UnsupportedRegime(format!(
                "joint moment order tau = {:.4} must exceed 1",
                self.tau
            )))
        }
    }

    /// Sample size scaling under which the restricted eigenvalue of the
    /// sample covariance stays bounded away from zero.
    pub fn sample_size_floor(&self, p: usize, s: usize, c: &RateConstants) -> Result<f64> {
        check_ps(p, s)?;
        let pf = p as f64;
        let sf = s as f64;
        if self.gamma > 4.0 {
            let frac = 2.0 * self.nu / self.gamma;
            // nu < gamma/4 always holds here, so 1 - frac > 1/2.
            let iid_term = c.m_x.powi(4) * sf * sf * pf.ln() / (c.kappa * c.kappa);
            let dep_term = sf.powf(1.0 / (1.0 - frac))
                * pf.ln().powf(3.0 / (2.0 - 2.0 * frac))
                * c.dan_inf.powf(2.0 / (1.0 - frac))
                * c.kappa.powf(1.0 / (frac - 1.0));
            Ok(iid_term + dep_term)
        } else {
            let frac = 2.0 / self.gamma;
            Ok(c.m_x.powf(2.0 / (1.0 - frac))
                * sf.powf(1.0 / (1.0 - frac))
                * pf.powf(4.0 / (self.gamma - 2.0))
                * c.kappa.powf(-1.0 / (1.0 - frac)))
        }
    }

    /// Oracle-style error bounds at per-observation penalty `lambda` with
    /// restricted eigenvalue `kappa` and support size `s`.
    pub fn error_bounds(&self, lambda: f64, s: usize, kappa: f64) -> Result<ErrorBounds> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidInput(format!("penalty must be non-negative, got {lambda}")));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidInput(format!(
                "restricted eigenvalue must be positive, got {kappa}"
            )));
        }
        let sf = s as f64;
        Ok(ErrorBounds {
            l2: 4.0 * lambda * sf.sqrt() / kappa,
            l1: 16.0 * lambda * sf / kappa,
            prediction: 8.0 * lambda * lambda * sf / kappa,
        })
    }

    /// Failure probability scalings `(p1, p2)` for the gradient and the
    /// restricted eigenvalue events. Bounds are order statements; values
    /// above 1 are vacuous.
    pub fn failure_probability(&self, n: usize, p: usize, s: usize, c: &RateConstants) -> Result<(f64, f64)> {
        check_np(n, p)?;
        check_ps(p, s)?;
        let nf = n as f64;
        let pf = p as f64;
        let sf = s as f64;
        let p1 = if self.tau > 2.0 {
            pf.ln().powf(-self.tau / 2.0) + pf.powf(-1.0)
        } else if self.tau > 1.0 {
            pf.powf(-1.0)
        } else {
            return Err(Error::UnsupportedRegime(format!(
                "joint moment order tau = {:.4} must exceed 1",
                self.tau
            )));
        };
        let p2 = if self.gamma > 4.0 {
            pf.ln().powf(-self.gamma / 2.0) + pf.powf(-1.0)
        } else {
            pf * pf * nf * c.m_x.powf(self.gamma) * sf.powf(self.gamma / 2.0)
                / (nf * c.kappa).powf(self.gamma / 2.0)
        };
        Ok((p1, p2))
    }
}

/// Inputs to the variable-selection scaling. Population quantities
/// default to 1; replace them with estimates where available.
#[derive(Debug, Clone, Copy)]
pub struct Theorem2Inputs {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    /// Slack factor in `(0, 1)` tightening both penalty bounds.
    pub eta: f64,
    pub m_x: f64,
    pub m_e: f64,
    /// Largest off-support variance `max_{k > s} sigma_kk`.
    pub sigma: f64,
    /// Inverse spectral norm of the inverse support covariance,
    /// `1 / |Sigma_11^{-1}|_2`.
    pub n1: f64,
    /// Smallest absolute nonzero coefficient.
    pub l_min: f64,
    /// Dependence adjusted norm of the support block maximum process.
    pub dan_support: f64,
    /// Same for the off-support block.
    pub dan_offsupport: f64,
}

impl Theorem2Inputs {
    /// All population constants set to 1, slack 1/2.
    pub fn ones(n: usize, p: usize, s: usize) -> Self {
        Self {
            n,
            p,
            s,
            eta: 0.5,
            m_x: 1.0,
            m_e: 1.0,
            sigma: 1.0,
            n1: 1.0,
            l_min: 1.0,
            dan_support: 1.0,
            dan_offsupport: 1.0,
        }
    }
}

/// Penalty window and sample size scaling for exact sign recovery.
#[derive(Debug, Clone, Copy)]
pub struct Theorem2Scaling {
    /// Objective-scale penalty ceiling `n N1 L / (2 sqrt(s))` above which
    /// the penalty biases true coefficients past zero.
    pub lambda_upper: f64,
    /// Objective-scale penalty floor controlling both gradient blocks.
    pub lambda_lower: f64,
    /// Sample size scaling required by the support recovery argument.
    pub n_required: f64,
    /// Whether the window is non-empty and the sample is large enough.
    pub feasible: bool,
    /// Lower bound scaling on the recovery probability, clamped to
    /// `[0, 1]`; 0 means the bound is vacuous at these dimensions.
    pub probability_bound: f64,
}

/// Sign-recovery scaling. Requires the strong regime: error moment
/// `q > 2`, covariate moment `gamma > 4`, joint `tau > 2`.
pub fn theorem2_scaling(profile: &RateProfile, inp: &Theorem2Inputs) -> Result<Theorem2Scaling> {
    if profile.q <= 2.0 || profile.gamma <= 4.0 || profile.tau <= 2.0 {
        return Err(Error::UnsupportedRegime(format!(
            "sign recovery needs q > 2, gamma > 4, tau > 2; got q = {}, gamma = {}, tau = {:.4}",
            profile.q, profile.gamma, profile.tau
        )));
    }
    if inp.s == 0 || inp.p <= inp.s || inp.n == 0 {
        return Err(Error::InvalidInput(format!(
            "need 0 < s < p and n > 0, got n = {}, p = {}, s = {}",
            inp.n, inp.p, inp.s
        )));
    }
    if !(inp.eta > 0.0 && inp.eta < 1.0) {
        return Err(Error::InvalidInput(format!("slack eta must lie in (0, 1), got {}", inp.eta)));
    }
    for (name, v) in [
        ("m_x", inp.m_x),
        ("m_e", inp.m_e),
        ("sigma", inp.sigma),
        ("n1", inp.n1),
        ("l_min", inp.l_min),
        ("dan_support", inp.dan_support),
        ("dan_offsupport", inp.dan_offsupport),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidInput(format!("{name} must be finite and positive, got {v}")));
        }
    }

    let nf = inp.n as f64;
    let pf = inp.p as f64;
    let sf = inp.s as f64;
    let ln_p = pf.ln();
    let ln_s = sf.ln();
    let rt = profile.rho / profile.tau;
    let frac = 2.0 * profile.nu / profile.gamma;

    let lambda_upper = nf * inp.n1 * inp.l_min / (2.0 * sf.sqrt());

    let support_gain = ((sf * inp.sigma / inp.n1).sqrt() / inp.eta).max(1.0);
    let support_term = support_gain
        * ((nf * ln_s).sqrt() * inp.m_e * inp.m_x
            + nf.powf(rt) * ln_s.powf(1.5) * inp.m_e * inp.dan_support);
    let offsupport_term = ((nf * ln_p).sqrt() * inp.m_e * inp.m_x
        + nf.powf(rt) * ln_p.powf(1.5) * inp.m_e * inp.dan_offsupport)
        / inp.eta;
    let lambda_lower = support_term + offsupport_term;

    let n_required = inp.m_x.powi(4) * inp.sigma * sf.powi(3) * ln_s
        / (inp.eta * inp.eta * inp.n1.powi(3))
        + inp.m_x * inp.m_x * ln_p / (inp.sigma * inp.sigma)
        + inp.m_x.powi(4) * sf * sf * ln_p / (inp.eta * inp.eta * inp.n1 * inp.n1)
        + (inp.n1.powi(3) * inp.sigma / (inp.eta * inp.eta)).powf(1.0 / (2.0 - 2.0 * frac))
            * (sf * ln_s).powf(3.0 / (2.0 - 2.0 * frac))
            * inp.dan_support.powf(2.0 / (1.0 - frac))
        + (inp.eta * inp.n1).powf(-1.0 / (1.0 - frac))
            * sf.powf(1.0 / (1.0 - frac))
            * ln_p.powf(3.0 / (2.0 - 2.0 * frac))
            * (inp.dan_support * inp.dan_offsupport).powf(1.0 / (1.0 - frac))
        + inp.sigma.powf(-1.0 / (1.0 - frac))
            * ln_p.powf(3.0 / (2.0 - 2.0 * frac))
            * inp.dan_offsupport.powf(2.0 / (1.0 - frac));

    let probability_bound = (1.0
        - ln_p.powf(-profile.gamma / 2.0)
        - ln_s.powf(-profile.gamma / 2.0)
        - ln_p.powf(-profile.tau)
        - ln_s.powf(-profile.tau)
        - 1.0 / pf
        - 1.0 / sf)
        .clamp(0.0, 1.0);

    Ok(Theorem2Scaling {
        lambda_upper,
        lambda_lower,
        n_required,
        feasible: lambda_lower <= lambda_upper && nf >= n_required,
        probability_bound,
    })
}

fn check_np(n: usize, p: usize) -> Result<()> {
    if n < 2 || p < 2 {
        return Err(Error::InvalidInput(format!("need n >= 2 and p >= 2, got n = {n}, p = {p}")));
    }
    Ok(())
}

fn check_ps(p: usize, s: usize) -> Result<()> {
    if s == 0 || s > p {
        return Err(Error::InvalidInput(format!("need 0 < s <= p, got p = {p}, s = {s}")));
    }
    Ok(())
}
