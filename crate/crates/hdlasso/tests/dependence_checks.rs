//! Dependence estimates against closed forms and the norm-chain
//! inequalities.

use ndarray::{arr2, Array2};

use hdlasso::dependence::{dan, estimate_fdm, rate_profile, FdmOptions};
use hdlasso::dgp::{InnovationLaw, LinearProcessSpec, ProcessSpec};

/// Replacing one innovation in `x_i = sum_l A_l eps_{i-l}` perturbs the
/// output by `A_i (eps_0 - eps'_0)`, whose L2 norm is `sqrt(2) |A_{i,j.}|_2`
/// for unit-variance independent innovations.
#[test]
fn linear_process_coupling_matches_closed_form() {
    let a0 = arr2(&[[1.0, 0.0], [0.3, 0.7]]);
    let a1 = arr2(&[[0.5, 0.2], [0.0, -0.4]]);
    let a2 = arr2(&[[-0.25, 0.1], [0.05, 0.2]]);
    let lags = [a0, a1, a2];
    let spec = ProcessSpec::LinearProcess(
        LinearProcessSpec::new(lags.to_vec(), InnovationLaw::Normal).unwrap(),
    );
    let rep = estimate_fdm(&spec, &FdmOptions::new(2.0, 4, 100_000, 42)).unwrap();

    for i in 0..=4 {
        for j in 0..2 {
            let row_norm = if i < lags.len() {
                let r = lags[i].row(j);
                r.iter().map(|v| v * v).sum::<f64>().sqrt()
            } else {
                0.0
            };
            let want = 2f64.sqrt() * row_norm;
            let got = rep.delta(i, j);
            if want == 0.0 {
                assert_eq!(got, 0.0, "horizon {i} coord {j} should be exactly decoupled");
            } else {
                assert!(
                    (got - want).abs() < 0.05 * want,
                    "horizon {i} coord {j}: {got} vs {want}"
                );
            }
        }
    }

    // Cumulative norm at alpha = 0 against the summed closed form.
    let dans = dan(&rep, 0.0).unwrap();
    for j in 0..2 {
        let want: f64 = lags
            .iter()
            .map(|a| {
                let r = a.row(j);
                2f64.sqrt() * r.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .sum();
        assert!(
            (dans[j] - want).abs() < 0.05 * want,
            "coordinate {j}: {} vs {want}",
            dans[j]
        );
    }
}

/// A volatility shock in GARCH decays through the recursion at rate
/// `pi1 + pi2`; the estimated coefficients should look log-linear.
#[test]
fn garch_dependence_decays_geometrically() {
    let spec = ProcessSpec::Garch11(
        hdlasso::dgp::Garch11Spec::new(0.1, 0.1, 0.8, InnovationLaw::Normal).unwrap(),
    );
    let rep = estimate_fdm(&spec, &FdmOptions::new(2.0, 12, 60_000, 9)).unwrap();

    // Log-linear fit over horizons 1..12 (horizon 0 carries the direct
    // innovation replacement, not the volatility recursion).
    let pts: Vec<(f64, f64)> = (1..=12).map(|i| (i as f64, rep.delta(i, 0).ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|(x, _)| x).sum::<f64>() / k;
    let my = pts.iter().map(|(_, y)| y).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let syy: f64 = pts.iter().map(|(_, y)| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    assert!(slope < 0.0, "decay slope {slope} should be negative");
    assert!(r2 > 0.9, "log-linear fit R^2 {r2} too low for geometric decay");
}

/// For white noise the coupled pair differs only at horizon 0, so the
/// dependence adjusted norm collapses to a single term and is equivalent
/// to the marginal norm: `|e_0|_q <= |e.|_{q,a} <= 2 |e_0|_q`.
#[test]
fn iid_norm_equivalence_brackets_hold() {
    let spec = ProcessSpec::Iid { p: 1, law: InnovationLaw::UnitStudentT { df: 8.0 } };
    let rep = estimate_fdm(&spec, &FdmOptions::new(2.0, 6, 40_000, 5)).unwrap();
    let marginal = 1.0; // unit-variance law, q = 2
    for alpha in [0.0, 0.5, 1.0, 3.0] {
        let d = rep.dan_coord(0, alpha).unwrap();
        assert!(
            marginal * 0.95 <= d && d <= 2.0 * marginal * 1.05,
            "alpha {alpha}: norm {d} outside the equivalence bracket"
        );
    }
}

/// Cumulative tails are non-increasing and the three aggregate norms are
/// ordered, both computed from the same coupled draws.
#[test]
fn cumulative_monotone_and_chain_ordered_on_var() {
    let coeffs = Array2::from_shape_fn((3, 3), |(j, k)| {
        if j == k {
            0.5
        } else {
            0.1 * if (j + k) % 2 == 0 { 1.0 } else { -1.0 }
        }
    });
    let spec = ProcessSpec::Var(
        hdlasso::dgp::VarSpec::new(vec![coeffs], InnovationLaw::Normal).unwrap(),
    );
    let rep = estimate_fdm(&spec, &FdmOptions::new(2.0, 10, 20_000, 17)).unwrap();

    for j in 0..3 {
        let mut prev = f64::INFINITY;
        for m in 0..=10 {
            let cur = rep.cumulative(m, j).unwrap();
            assert!(cur <= prev + 1e-12, "coordinate {j}: tail sum rose at m = {m}");
            assert!(cur >= 0.0);
            prev = cur;
        }
        // alpha = 0 norm is the full tail sum, the largest cumulative value.
        let d0 = rep.dan_coord(j, 0.0).unwrap();
        assert!((d0 - rep.cumulative(0, j).unwrap()).abs() < 1e-12);
    }

    for alpha in [0.0, 0.25, 1.0] {
        let psi = rep.psi(alpha).unwrap();
        let mid = rep.linf_dan(alpha).unwrap();
        let ups = rep.upsilon(alpha).unwrap();
        assert!(psi <= mid + 1e-9 * mid.max(1.0), "psi {psi} > linf {mid} at alpha {alpha}");
        assert!(mid <= ups + 1e-9 * ups.max(1.0), "linf {mid} > upsilon {ups} at alpha {alpha}");
    }
}

/// Worked examples from the exponent table.
#[test]
fn rate_profiles_match_hand_computed_exponents() {
    let pr = rate_profile(8.0, 8.0, 0.45, 0.45).unwrap();
    assert!((pr.tau - 4.0).abs() < 1e-15);
    assert_eq!(pr.nu, 1.0); // 0.45 >= 1/2 - 2/8
    assert_eq!(pr.rho, 1.0); // 0.45 >= 1/2 - 1/4

    let pr = rate_profile(8.0, 8.0, 0.1, 0.45).unwrap();
    assert!((pr.nu - 1.6).abs() < 1e-15); // 8/4 - 0.1*8/2

    let pr = rate_profile(3.0, 3.0, 1.0, 1.0).unwrap();
    assert!(pr.tau <= 2.0 && pr.tau > 1.0);
    let lam = pr
        .lambda_scale(200, 400, &hdlasso::dependence::RateConstants::default())
        .unwrap();
    assert_eq!(lam.branch, "1 < tau <= 2");
}
