//! The two built-in coefficient families and the exponential lag-weight
//! construction used by the grouped response designs.

use ndarray::Array2;

use super::dataset::ModelId;
use super::{InnovationLaw, VarSpec};
use crate::error::{Error, Result};

/// Which denominator the exponential weights use.
///
/// `AsPrinted` follows the source formula exactly: the numerator exponent
/// is `d1 j + d2 j^2` while the denominator exponent is doubled,
/// `2 d1 k + 2 d2 k^2`, so the weights do not sum to one. `Matched` is the
/// textbook normalization with the same exponent in both places.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlmonVariant {
    #[default]
    AsPrinted,
    Matched,
}

/// Exponential lag weights for `j = 1..=count`:
///
/// ```text
///     w_j = exp(d1 j + d2 j^2) / sum_k exp(c d1 k + c d2 k^2)
/// ```
///
/// with `c = 2` for [`AlmonVariant::AsPrinted`] and `c = 1` for
/// [`AlmonVariant::Matched`]. Exponents are shifted by their maximum
/// before exponentiation so moderate parameters cannot overflow.
pub fn almon_weights(count: usize, delta: (f64, f64), variant: AlmonVariant) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidInput("weight count must be positive".into()));
    }
    let (d1, d2) = delta;
    if !d1.is_finite() || !d2.is_finite() {
        return Err(Error::NonFinite("lag weight parameters".into()));
    }
    let c = match variant {
        AlmonVariant::AsPrinted => 2.0,
        AlmonVariant::Matched => 1.0,
    };
    let num_exp: Vec<f64> = (1..=count)
        .map(|j| {
            let jf = j as f64;
            d1 * jf + d2 * jf * jf
        })
        .collect();
    let den_exp: Vec<f64> = (1..=count)
        .map(|k| {
            let kf = k as f64;
            c * d1 * kf + c * d2 * kf * kf
        })
        .collect();
    let shift = den_exp.iter().fold(f64::NEG_INFINITY, |a, v| a.max(*v));
    let den: f64 = den_exp.iter().map(|v| (v - shift).exp()).sum();
    let weights: Vec<f64> = num_exp.iter().map(|v| (v - shift).exp() / den).collect();
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("lag weights overflowed".into()));
    }
    Ok(weights)
}

/// Sizes of the diagonal blocks shared by both coefficient families:
/// two leading and two trailing 5-blocks around `(p - 20) / 10` interior
/// 10-blocks. Requires `p >= 20` with `(p - 20)` divisible by 10.
pub fn block_sizes(p: usize) -> Result<Vec<usize>> {
    if p < 20 || (p - 20) % 10 != 0 {
        return Err(Error::InvalidInput(format!(
            "dimension must be 20 + 10k, got {p}"
        )));
    }
    let interior = (p - 20) / 10;
    let mut sizes = vec![5, 5];
    sizes.extend(std::iter::repeat(10).take(interior));
    sizes.extend([5, 5]);
    Ok(sizes)
}

/// Coefficient matrices of the two covariate processes.
///
/// Family 1 is a VAR(4): within each diagonal block every entry of `A_1`
/// is `0.15` (5-blocks) or `0.075` (10-blocks), every entry of `A_4` is
/// `-0.1` or `-0.05`, and `A_2 = A_3 = 0`. Family 2 is a VAR(1) whose
/// blocks hold `(-1)^|j-k| 0.4^(|j-k|+1)`.
pub fn build_model_matrices(model: ModelId, p: usize) -> Result<Vec<Array2<f64>>> {
    let sizes = block_sizes(p)?;
    let mut offset = 0usize;
    match model {
        ModelId::M1 | ModelId::M3 => {
            let mut a1 = Array2::zeros((p, p));
            let a2 = Array2::zeros((p, p));
            let a3 = Array2::zeros((p, p));
            let mut a4 = Array2::zeros((p, p));
            for b in sizes {
                let (v1, v4) = if b == 5 { (0.15, -0.1) } else { (0.075, -0.05) };
                for j in offset..offset + b {
                    for k in offset..offset + b {
                        a1[[j, k]] = v1;
                        a4[[j, k]] = v4;
                    }
                }
                offset += b;
            }
            Ok(vec![a1, a2, a3, a4])
        }
        ModelId::M2 | ModelId::M4 => {
            let mut a = Array2::zeros((p, p));
            for b in sizes {
                for j in 0..b {
                    for k in 0..b {
                        let d = j.abs_diff(k) as i32;
                        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
                        a[[offset + j, offset + k]] = sign * 0.4f64.powi(d + 1);
                    }
                }
                offset += b;
            }
            Ok(vec![a])
        }
    }
}

/// The stationary covariate process for a model id, innovations included.
pub fn model_var_spec(model: ModelId, p: usize, law: InnovationLaw) -> Result<VarSpec> {
    let sizes = block_sizes(p)?;
    let mats = build_model_matrices(model, p)?;
    // Reuse the per-block exact stability check: slice the assembled
    // matrices back into their diagonal blocks.
    let mut blocks = Vec::with_capacity(sizes.len());
    let mut offset = 0usize;
    for b in sizes {
        let stack: Vec<Array2<f64>> = mats
            .iter()
            .map(|a| a.slice(ndarray::s![offset..offset + b, offset..offset + b]).to_owned())
            .collect();
        blocks.push(stack);
        offset += b;
    }
    VarSpec::from_blocks(&blocks, law)
}

/// True coefficient vector over the first `s` covariates.
///
/// Families 1 and 2 use the alternating pattern `(-1)^j / sqrt(s)`
/// (1-based `j`). Families 3 and 4 concatenate exponential lag weights at
/// `delta = (0.5, -1)` over groups of sizes 5/5/10, the lag index
/// restarting inside each group; `s` selects how many groups enter
/// (5 -> one, 10 -> two, 20 -> all three).
pub fn model_beta(model: ModelId, p: usize, s: usize, variant: AlmonVariant) -> Result<Vec<f64>> {
    if s == 0 || s > p {
        return Err(Error::InvalidInput(format!("need 0 < s <= p, got s={s}, p={p}")));
    }
    let mut beta = vec![0.0; p];
    match model {
        ModelId::M1 | ModelId::M2 => {
            let scale = 1.0 / (s as f64).sqrt();
            for j in 1..=s {
                beta[j - 1] = if j % 2 == 0 { scale } else { -scale };
            }
        }
        ModelId::M3 | ModelId::M4 => {
            let groups: &[usize] = match s {
                5 => &[5],
                10 => &[5, 5],
                20 => &[5, 5, 10],
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "grouped response supports s in {{5, 10, 20}}, got {s}"
                    )))
                }
            };
            let mut offset = 0usize;
            for &g in groups {
                let w = almon_weights(g, (0.5, -1.0), variant)?;
                beta[offset..offset + g].copy_from_slice(&w);
                offset += g;
            }
        }
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_layout_counts() {
        assert_eq!(block_sizes(20).unwrap(), vec![5, 5, 5, 5]);
        assert_eq!(block_sizes(100).unwrap(), vec![5, 5, 10, 10, 10, 10, 10, 10, 10, 10, 5, 5]);
        assert!(block_sizes(19).is_err());
        assert!(block_sizes(25).is_err());
    }

    #[test]
    fn family1_nonzero_counts_at_p100() {
        let mats = build_model_matrices(ModelId::M1, 100).unwrap();
        let nz = |a: &Array2<f64>| a.iter().filter(|v| **v != 0.0).count();
        assert_eq!(nz(&mats[0]), 900);
        assert_eq!(nz(&mats[1]), 0);
        assert_eq!(nz(&mats[2]), 0);
        assert_eq!(nz(&mats[3]), 900);
        assert_eq!(mats[0][[0, 0]], 0.15);
        assert_eq!(mats[0][[12, 12]], 0.075);
        assert_eq!(mats[0][[95, 99]], 0.15);
        assert_eq!(mats[3][[0, 4]], -0.1);
        assert_eq!(mats[0][[0, 5]], 0.0);
        assert_eq!(mats[0][[4, 5]], 0.0);
    }

    #[test]
    fn family2_decay_pattern() {
        let mats = build_model_matrices(ModelId::M2, 20).unwrap();
        let a = &mats[0];
        assert!((a[[0, 0]] - 0.4).abs() < 1e-15);
        assert!((a[[0, 1]] + 0.16).abs() < 1e-15);
        assert!((a[[0, 2]] - 0.064).abs() < 1e-15);
        assert_eq!(a[[4, 5]], 0.0);
    }

    #[test]
    fn both_families_are_stationary() {
        for model in [ModelId::M1, ModelId::M2] {
            for p in [20, 100] {
                assert!(
                    model_var_spec(model, p, InnovationLaw::Normal).is_ok(),
                    "{model:?} p={p}"
                );
            }
        }
    }

    #[test]
    fn alternating_beta_signs_and_scale() {
        let b = model_beta(ModelId::M1, 10, 5, AlmonVariant::AsPrinted).unwrap();
        let v = 1.0 / 5f64.sqrt();
        assert!((b[0] + v).abs() < 1e-15);
        assert!((b[1] - v).abs() < 1e-15);
        assert!((b[4] + v).abs() < 1e-15);
        assert_eq!(b[5], 0.0);
    }

    #[test]
    fn grouped_beta_restarts_lag_index() {
        let b = model_beta(ModelId::M3, 30, 10, AlmonVariant::AsPrinted).unwrap();
        // Same 5-weight profile in each group.
        for j in 0..5 {
            assert!((b[j] - b[j + 5]).abs() < 1e-15);
        }
        assert_eq!(b[10], 0.0);
        assert!(model_beta(ModelId::M3, 30, 7, AlmonVariant::AsPrinted).is_err());
    }

    #[test]
    fn weights_match_independent_scalar_evaluation() {
        // Oracle: direct transcription of the formula, computed without the
        // max-shift used by the implementation.
        let oracle = |count: usize, d1: f64, d2: f64, c: f64| -> Vec<f64> {
            let den: f64 =
                (1..=count).map(|k| (c * d1 * k as f64 + c * d2 * (k * k) as f64).exp()).sum();
            (1..=count).map(|j| (d1 * j as f64 + d2 * (j * j) as f64).exp() / den).collect()
        };
        for count in [5usize, 10] {
            let printed = almon_weights(count, (0.5, -1.0), AlmonVariant::AsPrinted).unwrap();
            let matched = almon_weights(count, (0.5, -1.0), AlmonVariant::Matched).unwrap();
            let o_printed = oracle(count, 0.5, -1.0, 2.0);
            let o_matched = oracle(count, 0.5, -1.0, 1.0);
            for j in 0..count {
                assert!((printed[j] - o_printed[j]).abs() < 1e-12, "printed {count}/{j}");
                assert!((matched[j] - o_matched[j]).abs() < 1e-12, "matched {count}/{j}");
            }
        }
        // The printed variant's weights do not sum to one; the matched ones do.
        let printed = almon_weights(5, (0.5, -1.0), AlmonVariant::AsPrinted).unwrap();
        let matched = almon_weights(5, (0.5, -1.0), AlmonVariant::Matched).unwrap();
        assert!((matched.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((printed.iter().sum::<f64>() - 1.0).abs() > 0.1);
    }
}
