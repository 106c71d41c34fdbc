//! Quick calibration run: Model 1, s = 5, p = 100 against the reference
//! table values at 200 replicates. Prints each metric next to its target
//! and the relative gap.

use hdlasso::dgp::ModelId;
use hdlasso::experiments::{run_experiment, EstimatorKind, ExperimentConfig};

fn main() {
    let mut config = ExperimentConfig::desk(ModelId::M1, 42);
    config.p_grid = vec![100];
    config.s_grid = vec![5];
    config.evaluate_conditions = false;

    let start = std::time::Instant::now();
    let output = run_experiment(&config).expect("experiment failed");
    eprintln!("elapsed: {:.1}s", start.elapsed().as_secs_f64());

    // Reference values (x 10^-2) for Model 1, s = 5, p = 100.
    let targets = [
        (EstimatorKind::LassoBic, 50, 2.435, 9.462, 119.99, 147.28),
        (EstimatorKind::LassoBic, 100, 1.887, 7.784, 102.79, 127.78),
        (EstimatorKind::LassoBic, 200, 1.265, 5.190, 86.91, 109.77),
        (EstimatorKind::Midas, 50, 6.626, 13.944, 169.21, 206.07),
        (EstimatorKind::Midas, 100, 6.243, 13.241, 162.23, 197.71),
        (EstimatorKind::Midas, 200, 5.909, 12.686, 156.83, 191.41),
    ];

    println!(
        "{:<10} {:>4} {:>10} {:>10} {:>8} | metric (x100) vs target (rel gap)",
        "estimator", "n", "failures", "used", "elapsed"
    );
    for (kind, n, ae_t, rmse_t, afe_t, rmsfe_t) in targets {
        let row = output.row(kind, n, 100, 5).expect("missing row");
        println!(
            "{:<10} {:>4} {:>10} {:>10}",
            kind.as_str(),
            n,
            row.failures,
            row.used
        );
        for (name, got, want) in [
            ("AE", row.ae * 100.0, ae_t),
            ("RMSE", row.rmse * 100.0, rmse_t),
            ("AFE", row.afe * 100.0, afe_t),
            ("RMSFE", row.rmsfe * 100.0, rmsfe_t),
        ] {
            let gap = 100.0 * (got - want) / want;
            let flag = if gap.abs() <= 20.0 { "ok" } else { "OUT" };
            println!("    {name:<6} {got:>9.3} vs {want:>8.3}  ({gap:>+7.1}%) {flag}");
        }
    }
}
