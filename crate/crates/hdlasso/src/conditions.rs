//! Checkable diagnostics for the regularity assumptions behind the
//! estimation and selection guarantees: the restricted eigenvalue of a
//! covariance, the strong irrepresentable condition on its partitioned
//! form, a bounded-correlation sufficient condition, and the sign
//! consistency event itself.

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lasso::LassoFit;
use crate::linalg::{solve_linear, symmetric_eigenvalues};
use crate::problem::{Coefficients, CovarianceMatrix};
use crate::rng::stream_rng;
use rand::Rng;

/// How a restricted eigenvalue value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaMethod {
    /// Support enumeration plus projected-gradient cone search. The value
    /// is the smallest Rayleigh quotient found at a feasible point, so it
    /// approaches the exact cone minimum from above as restarts grow.
    ExactSmall,
    /// Minimal sparse eigenvalue relaxation: the smallest eigenvalue over
    /// principal submatrices of size `2s` when enumerable, else the global
    /// smallest eigenvalue. Both sit at or below the cone minimum.
    SparseEigBound,
}

impl KappaMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            KappaMethod::ExactSmall => "exact_small",
            KappaMethod::SparseEigBound => "sparse_eig_bound",
        }
    }
}

const EXACT_P_LIMIT: usize = 12;
const CONE_RESTARTS: usize = 50;
const CONE_ITERATIONS: usize = 250;
/// Largest number of principal submatrices enumerated by the sparse bound.
const SPARSE_ENUM_BUDGET: u128 = 50_000;

/// Restricted eigenvalue of `sigma` at sparsity `s`:
///
/// ```text
///     kappa = min_{|J| <= s} min_{u != 0, |u_{Jc}|_1 <= 3 |u_J|_1} u'Su / |u|_2^2
/// ```
///
/// For `p <= 12` every support of size `s` is enumerated and the cone is
/// searched by projected gradient descent from random feasible starts
/// (`exact_small`). Beyond that the cone minimum is replaced by the
/// smallest `2s`-sparse eigenvalue, the quantity the estimation proof
/// actually controls, or the global smallest eigenvalue when even that
/// enumeration is too large (`sparse_eig_bound`).
pub fn restricted_eigenvalue(sigma: &CovarianceMatrix, s: usize) -> Result<(f64, KappaMethod)> {
    let p = sigma.p();
    if s == 0 || s > p {
        return Err(Error::InvalidInput(format!("need 0 < s <= p, got s = {s}, p = {p}")));
    }
    let eigs = symmetric_eigenvalues(sigma.as_array());
    let lambda_min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let lambda_max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lambda_min < -1e-8 * lambda_max.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "covariance is not positive semidefinite (smallest eigenvalue {lambda_min:.3e})"
        )));
    }

    if p <= EXACT_P_LIMIT {
        let value = cone_minimum(sigma.as_array(), s, lambda_max.max(1e-300));
        Ok((value, KappaMethod::ExactSmall))
    } else {
        let k = (2 * s).min(p);
        let value = if binomial(p, k) <= SPARSE_ENUM_BUDGET {
            min_sparse_eigenvalue(sigma.as_array(), k)
        } else {
            // Interlacing: the global minimum bounds every principal
            // submatrix minimum from below.
            lambda_min.max(0.0)
        };
        Ok((value, KappaMethod::SparseEigBound))
    }
}

/// Smallest Rayleigh quotient found over the union of all size-`s` cones.
/// Support sets smaller than `s` are covered because their cones are
/// contained in those of any superset.
fn cone_minimum(sigma: &Array2<f64>, s: usize, lambda_max: f64) -> f64 {
    let p = sigma.nrows();
    let mut supports = Vec::new();
    let mut idx: Vec<usize> = (0..s).collect();
    loop {
        supports.push(idx.clone());
        if !next_combination(&mut idx, p) {
            break;
        }
    }

    supports
        .par_iter()
        .enumerate()
        .map(|(si, support)| {
            let mut best = f64::INFINITY;
            let mut rng = stream_rng(0x5EED_C0DE, &[p as u64, s as u64, si as u64]);
            for _ in 0..CONE_RESTARTS {
                let mut u = Array1::from_shape_fn(p, |_| {
                    let v: f64 = rng.gen::<f64>() * 2.0 - 1.0;
                    v
                });
                if !retract_to_cone(&mut u, support) {
                    continue;
                }
                best = best.min(minimize_rayleigh(sigma, support, u, lambda_max));
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Scales the off-support coordinates onto the cone boundary when they
/// are too heavy, then normalizes. Returns false when the vector
/// degenerates to zero.
fn retract_to_cone(u: &mut Array1<f64>, support: &[usize]) -> bool {
    let mut on = vec![false; u.len()];
    for &j in support {
        on[j] = true;
    }
    let l1_on: f64 = support.iter().map(|&j| u[j].abs()).sum();
    let l1_off: f64 = u.iter().enumerate().filter(|(j, _)| !on[*j]).map(|(_, v)| v.abs()).sum();
    if l1_off > 3.0 * l1_on {
        let scale = if l1_off > 0.0 { 3.0 * l1_on / l1_off } else { 0.0 };
        for (j, v) in u.iter_mut().enumerate() {
            if !on[j] {
                *v *= scale;
            }
        }
    }
    let norm = u.dot(&*u).sqrt();
    if norm < 1e-12 {
        return false;
    }
    u.mapv_inplace(|v| v / norm);
    true
}

fn minimize_rayleigh(
    sigma: &Array2<f64>,
    support: &[usize],
    mut u: Array1<f64>,
    lambda_max: f64,
) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..CONE_ITERATIONS {
        let su = sigma.dot(&u);
        let r = u.dot(&su);
        best = best.min(r);
        // Sphere gradient step with fixed 1/lambda_max step size.
        let mut next = &u - &((&su - &(&u * r)) / lambda_max);
        if !retract_to_cone(&mut next, support) {
            break;
        }
        u = next;
    }
    let su = sigma.dot(&u);
    best.min(u.dot(&su))
}

/// Smallest eigenvalue over all principal submatrices of size `k`.
fn min_sparse_eigenvalue(sigma: &Array2<f64>, k: usize) -> f64 {
    let p = sigma.nrows();
    let mut subsets = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        subsets.push(idx.clone());
        if !next_combination(&mut idx, p) {
            break;
        }
    }
    subsets
        .par_iter()
        .map(|sub| {
            let m = Array2::from_shape_fn((k, k), |(a, b)| sigma[[sub[a], sub[b]]]);
            symmetric_eigenvalues(&m).into_iter().fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
        .max(0.0)
}

/// Advances `idx` to the next size-`k` subset of `0..p` in lexicographic
/// order; returns false after the last one.
fn next_combination(idx: &mut [usize], p: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < p - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > u128::MAX / (n as u128 + 1) {
            return u128::MAX;
        }
    }
    acc
}

/// Covariance split into support and off-support blocks.
///
/// Rows and columns are reordered so the support block comes first in
/// the order given by `relevant_indices`; the complement keeps ascending
/// order.
#[derive(Debug, Clone)]
pub struct PartitionedSigma {
    sigma11: Array2<f64>,
    sigma12: Array2<f64>,
    sigma21: Array2<f64>,
    sigma22: Array2<f64>,
    relevant: Vec<usize>,
}

impl PartitionedSigma {
    pub fn new(sigma: &CovarianceMatrix, relevant_indices: &[usize]) -> Result<Self> {
        let p = sigma.p();
        let s = relevant_indices.len();
        if s == 0 || s >= p {
            return Err(Error::InvalidInput(format!(
                "need 0 < s < p for a two-block partition, got s = {s}, p = {p}"
            )));
        }
        let mut seen = vec![false; p];
        for &j in relevant_indices {
            if j >= p {
                return Err(Error::InvalidInput(format!("index {j} out of range for p = {p}")));
            }
            if seen[j] {
                return Err(Error::InvalidInput(format!("duplicate support index {j}")));
            }
            seen[j] = true;
        }
        let complement: Vec<usize> = (0..p).filter(|j| !seen[*j]).collect();
        let a = sigma.as_array();
        let pick = |rows: &[usize], cols: &[usize]| {
            Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| a[[rows[i], cols[j]]])
        };
        Ok(Self {
            sigma11: pick(relevant_indices, relevant_indices),
            sigma12: pick(relevant_indices, &complement),
            sigma21: pick(&complement, relevant_indices),
            sigma22: pick(&complement, &complement),
            relevant: relevant_indices.to_vec(),
        })
    }

    pub fn s(&self) -> usize {
        self.relevant.len()
    }

    pub fn p(&self) -> usize {
        self.relevant.len() + self.sigma22.nrows()
    }

    pub fn relevant_indices(&self) -> &[usize] {
        &self.relevant
    }

    pub fn sigma11(&self) -> &Array2<f64> {
        &self.sigma11
    }

    pub fn sigma12(&self) -> &Array2<f64> {
        &self.sigma12
    }

    pub fn sigma21(&self) -> &Array2<f64> {
        &self.sigma21
    }

    pub fn sigma22(&self) -> &Array2<f64> {
        &self.sigma22
    }

    /// `N_1 = 1 / |Sigma11^{-1}|_2`, the smallest eigenvalue of the
    /// support block.
    pub fn n1(&self) -> Result<f64> {
        let eigs = symmetric_eigenvalues(&self.sigma11);
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if min <= 1e-12 * max.max(1.0) {
            return Err(Error::Singular(
                "support covariance block is singular, so N_1 = 0 and the selection bounds are vacuous"
                    .into(),
            ));
        }
        Ok(min)
    }

    /// Spectral condition number of the support block.
    pub fn sigma11_condition(&self) -> Result<f64> {
        let eigs = symmetric_eigenvalues(&self.sigma11);
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if min <= 0.0 {
            return Err(Error::Singular(
                "support covariance block is singular, so N_1 = 0 and the condition number is infinite"
                    .into(),
            ));
        }
        Ok(max / min)
    }

    /// Largest off-support variance `max_{k > s} sigma_kk`.
    pub fn max_offsupport_variance(&self) -> f64 {
        (0..self.sigma22.nrows())
            .map(|k| self.sigma22[[k, k]])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Sigma21 Sigma11^{-1}`, the matrix whose action on sign vectors the
    /// irrepresentable condition constrains.
    fn transfer_matrix(&self) -> Result<Array2<f64>> {
        self.n1()?;
        let s = self.s();
        let mut m = Array2::zeros((self.sigma21.nrows(), s));
        for col in 0..s {
            // Build the inverse one column at a time: Sigma11 z = e_col.
            let mut e = vec![0.0; s];
            e[col] = 1.0;
            let z = solve_linear(&self.sigma11, &e).ok_or_else(|| {
                Error::Singular(
                    "support covariance block is singular, so N_1 = 0 and the selection bounds are vacuous"
                        .into(),
                )
            })?;
            let mz = self.sigma21.dot(&Array1::from_vec(z));
            for row in 0..mz.len() {
                m[[row, col]] = mz[row];
            }
        }
        Ok(m)
    }
}

/// `|Sigma21 Sigma11^{-1} v|_inf` for one sign vector `v`; the strong
/// irrepresentable condition asks for this to stay below `1 - eta`.
pub fn irrepresentable_check(part: &PartitionedSigma, sign_vector: &[i8]) -> Result<f64> {
    if sign_vector.len() != part.s() {
        return Err(Error::InvalidInput(format!(
            "sign vector length {} does not match support size {}",
            sign_vector.len(),
            part.s()
        )));
    }
    if sign_vector.iter().any(|v| *v != 1 && *v != -1) {
        return Err(Error::InvalidInput("sign vector entries must be +1 or -1".into()));
    }
    let m = part.transfer_matrix()?;
    let v = Array1::from_iter(sign_vector.iter().map(|s| f64::from(*s)));
    let mv = m.dot(&v);
    Ok(mv.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
}

/// Result of maximizing the irrepresentable value over sign vectors.
#[derive(Debug, Clone, Copy)]
pub struct AllSignsIrrep {
    pub value: f64,
    /// True when every sign vector was enumerated; false when the value
    /// is the rowwise l1 upper bound (which coincides with the exact
    /// maximum, but is not computed by enumeration).
    pub enumerated: bool,
}

/// Worst case of [`irrepresentable_check`] over all `2^s` sign vectors.
/// Enumerates (by Gray code) for `s <= 20`; beyond that returns the
/// rowwise l1 norm `max_k sum_j |M_kj|`, which equals the enumerated
/// maximum because each row attains its own worst sign pattern.
pub fn irrepresentable_all_signs(part: &PartitionedSigma) -> Result<AllSignsIrrep> {
    let m = part.transfer_matrix()?;
    let s = part.s();
    let rows = m.nrows();
    if s <= 20 {
        // Gray-code walk: exactly one sign flips between visits, so the
        // product vector updates in O(rows).
        let mut v = vec![1.0f64; s];
        let mut mv: Array1<f64> = m.dot(&Array1::from_elem(s, 1.0));
        let mut best = mv.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let total: u64 = 1u64 << s;
        for g in 1..total {
            let flip = g.trailing_zeros() as usize;
            let delta = -2.0 * v[flip];
            v[flip] = -v[flip];
            for r in 0..rows {
                mv[r] += delta * m[[r, flip]];
            }
            best = best.max(mv.iter().fold(0.0f64, |acc, x| acc.max(x.abs())));
        }
        Ok(AllSignsIrrep { value: best, enumerated: true })
    } else {
        let mut best = 0.0f64;
        for r in 0..rows {
            let row_l1: f64 = m.row(r).iter().map(|x| x.abs()).sum();
            best = best.max(row_l1);
        }
        Ok(AllSignsIrrep { value: best, enumerated: false })
    }
}

/// True iff the estimate matches the truth in sign coordinate by
/// coordinate, zeros included. Mismatched lengths never agree.
pub fn sign_consistency(fit: &LassoFit, truth: &Coefficients) -> bool {
    let est = fit.beta.values();
    let tru = truth.values();
    if est.len() != tru.len() {
        return false;
    }
    est.iter().zip(tru.iter()).all(|(a, b)| sign_of(*a) == sign_of(*b))
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Summary of the assumption diagnostics for one covariance and support.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub kappa_lower: f64,
    pub kappa_method: KappaMethod,
    pub irrep_value: f64,
    /// Largest slack `eta` with `irrep_value <= 1 - eta`, clamped at 0.
    pub irrep_holds_eta: f64,
    /// Whether the bounded-correlation sufficient condition holds: unit
    /// diagonal and `max_{j != k} |sigma_jk| * (2s - 1) < 1`.
    pub example2_bound_holds: bool,
    pub n1: f64,
    pub max_offsupport_variance: f64,
}

impl ConditionReport {
    /// Evaluates every diagnostic for `sigma` with the given support.
    pub fn evaluate(sigma: &CovarianceMatrix, relevant_indices: &[usize]) -> Result<Self> {
        let s = relevant_indices.len();
        let (kappa_lower, kappa_method) = restricted_eigenvalue(sigma, s)?;
        let part = PartitionedSigma::new(sigma, relevant_indices)?;
        let irrep = irrepresentable_all_signs(&part)?;
        let a = sigma.as_array();
        let p = sigma.p();
        let unit_diag = (0..p).all(|j| (a[[j, j]] - 1.0).abs() <= 1e-8);
        let mut max_off = 0.0f64;
        for j in 0..p {
            for k in 0..p {
                if j != k {
                    max_off = max_off.max(a[[j, k]].abs());
                }
            }
        }
        Ok(Self {
            kappa_lower,
            kappa_method,
            irrep_value: irrep.value,
            irrep_holds_eta: (1.0 - irrep.value).max(0.0),
            example2_bound_holds: unit_diag && max_off * (2.0 * s as f64 - 1.0) < 1.0,
            n1: part.n1()?,
            max_offsupport_variance: part.max_offsupport_variance(),
        })
    }

    /// Writes the report as key-value lines.
    pub fn write_summary<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "kappa_lower = {:.10e}", self.kappa_lower)?;
        writeln!(w, "kappa_method = {}", self.kappa_method.as_str())?;
        writeln!(w, "irrep_value = {:.10e}", self.irrep_value)?;
        writeln!(w, "irrep_holds_eta = {:.10e}", self.irrep_holds_eta)?;
        writeln!(w, "example2_bound_holds = {}", self.example2_bound_holds)?;
        writeln!(w, "n1 = {:.10e}", self.n1)?;
        writeln!(w, "max_offsupport_variance = {:.10e}", self.max_offsupport_variance)?;
        Ok(())
    }
}
