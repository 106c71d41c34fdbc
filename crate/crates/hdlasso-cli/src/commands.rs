//! One function per subcommand. Each loads and resolves its config,
//! writes the manifest into the output directory, then runs the
//! underlying library call and writes the result files.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use hdlasso::conditions::ConditionReport;
use hdlasso::dependence::{estimate_fdm, rate_profile, FdmOptions, RateConstants, Theorem2Inputs};
use hdlasso::dgp::simulate_dataset;
use hdlasso::experiments::run_experiment;
use hdlasso::mixedfreq::{ingest_csv, rolling_evaluation};

use crate::config::{
    parse_quarter, ConditionsConfig, DepnormConfig, ExperimentCliConfig, NowcastConfig,
    RatesConfig, SimulateConfig,
};
use crate::RunArgs;

/// A failed run, split by exit code: bad configuration (2) versus a
/// failure while executing a valid one (1).
pub enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) => m,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

// Invalid-input errors always trace back to configured values; every
// other library error is a failure of the run itself.
impl From<hdlasso::Error> for Failure {
    fn from(e: hdlasso::Error) -> Self {
        match e {
            hdlasso::Error::InvalidInput(_)
            | hdlasso::Error::UnsupportedRegime(_)
            | hdlasso::Error::MomentCondition(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load_config<C: serde::de::DeserializeOwned>(path: &Path) -> Result<C, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| Failure::Config(format!("invalid config {}: {e}", path.display())))
}

/// Identifies the run that produced an output directory: the command,
/// the seed, and the fully resolved configuration it executed.
#[derive(Serialize)]
struct RunManifest<'a, C: Serialize> {
    command: &'a str,
    config_path: String,
    seed: u64,
    tool_version: &'a str,
    output_dir: String,
    config: &'a C,
}

fn write_manifest<C: Serialize>(
    args: &RunArgs,
    command: &str,
    seed: u64,
    config: &C,
) -> Result<(), Failure> {
    let manifest = RunManifest {
        command,
        config_path: args.config.display().to_string(),
        seed,
        tool_version: env!("CARGO_PKG_VERSION"),
        output_dir: args.out.display().to_string(),
        config,
    };
    let text = toml::to_string_pretty(&manifest)
        .map_err(|e| Failure::Runtime(format!("cannot serialize manifest: {e}")))?;
    fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", args.out.display())))?;
    fs::write(args.out.join("manifest.toml"), text)
        .map_err(|e| Failure::Runtime(format!("cannot write manifest: {e}")))?;
    Ok(())
}

fn no_effect(flag: &str, value: Option<impl std::fmt::Display>, command: &str) {
    if let Some(v) = value {
        eprintln!("note: --{flag} {v} has no effect on {command}");
    }
}

fn create(path: &Path) -> Result<fs::File, Failure> {
    fs::File::create(path)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", path.display())))
}

pub fn simulate(args: &RunArgs) -> Result<(), Failure> {
    let mut cfg: SimulateConfig = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    no_effect("mc-reps", args.mc_reps, "simulate");
    let spec = cfg.to_spec()?;
    write_manifest(args, "simulate", cfg.seed, &cfg)?;

    let data = simulate_dataset(&spec)?;
    data.write_csv(create(&args.out.join("dataset.csv"))?)?;
    data.write_truth_csv(create(&args.out.join("truth.csv"))?)?;
    Ok(())
}

pub fn experiment(args: &RunArgs) -> Result<(), Failure> {
    let mut cfg: ExperimentCliConfig = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(mc) = args.mc_reps {
        cfg.mc_reps = mc;
    }
    let config = cfg.to_config()?;
    write_manifest(args, "experiment", cfg.seed, &cfg)?;

    let cells = config.n_grid.len() * config.p_grid.len() * config.s_grid.len();
    eprintln!(
        "experiment: model {} over {cells} cells, {} replicates each",
        cfg.model, config.mc_reps
    );
    let output = run_experiment(&config)?;
    output.write_dir(&args.out)?;
    Ok(())
}

pub fn nowcast(args: &RunArgs) -> Result<(), Failure> {
    let cfg: NowcastConfig = load_config(&args.config)?;
    no_effect("seed", args.seed, "nowcast");
    no_effect("mc-reps", args.mc_reps, "nowcast");
    let base = args.config.parent().unwrap_or(Path::new("."));
    let specs = cfg.series_specs(base)?;
    let mode = cfg.mode()?;
    let estimators = cfg.estimators()?;
    write_manifest(args, "nowcast", 0, &cfg)?;

    let (panel, log) = ingest_csv(&specs)?;
    eprint!("{log}");
    let origin_of = |label: &str| -> Result<usize, Failure> {
        let q = parse_quarter(label)?;
        panel.quarters().iter().position(|&x| x == q).ok_or_else(|| {
            Failure::Config(format!("origin {q} is outside the ingested panel"))
        })
    };
    let first = origin_of(&cfg.first_origin)?;
    let last = origin_of(&cfg.last_origin)?;
    if last < first {
        return Err(Failure::Config(format!(
            "last origin {} precedes first origin {}",
            cfg.last_origin, cfg.first_origin
        )));
    }
    eprintln!(
        "nowcast: {} origins {}..={} under {mode:?}",
        last - first + 1,
        cfg.first_origin,
        cfg.last_origin
    );
    let result = rolling_evaluation(&panel, mode, &estimators, first..last + 1, &cfg.rolling_options())?;
    result.write_dir(&args.out)?;
    Ok(())
}

pub fn depnorm(args: &RunArgs) -> Result<(), Failure> {
    let mut cfg: DepnormConfig = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(mc) = args.mc_reps {
        cfg.mc = mc;
    }
    let process = cfg.process_spec()?;
    let opts = FdmOptions::new(cfg.q, cfg.i_max, cfg.mc, cfg.seed);
    write_manifest(args, "depnorm", cfg.seed, &cfg)?;

    eprintln!(
        "depnorm: {} coupled pairs, horizons 0..={}, dimension {}",
        cfg.mc,
        cfg.i_max,
        process.dimension()
    );
    let report = estimate_fdm(&process, &opts)?;
    report.write_csv(create(&args.out.join("delta.csv"))?)?;
    report.write_summary(cfg.alpha, create(&args.out.join("norms.txt"))?)?;
    Ok(())
}

pub fn conditions(args: &RunArgs) -> Result<(), Failure> {
    let cfg: ConditionsConfig = load_config(&args.config)?;
    no_effect("seed", args.seed, "conditions");
    no_effect("mc-reps", args.mc_reps, "conditions");
    let sigma = cfg.sigma()?;
    let relevant = cfg.relevant_indices()?;
    write_manifest(args, "conditions", 0, &cfg)?;

    let report = ConditionReport::evaluate(&sigma, &relevant)?;
    report.write_summary(create(&args.out.join("report.txt"))?)?;
    Ok(())
}

pub fn rates(args: &RunArgs) -> Result<(), Failure> {
    let cfg: RatesConfig = load_config(&args.config)?;
    no_effect("seed", args.seed, "rates");
    no_effect("mc-reps", args.mc_reps, "rates");
    let profile = rate_profile(cfg.gamma, cfg.q, cfg.alpha_x, cfg.alpha_e)?;
    if cfg.n_grid.is_empty() || cfg.p_grid.is_empty() || cfg.s_grid.is_empty() {
        return Err(Failure::Config("every grid axis needs at least one value".into()));
    }
    write_manifest(args, "rates", 0, &cfg)?;

    let constants = RateConstants {
        m_x: cfg.m_x,
        m_e: cfg.m_e,
        kappa: cfg.kappa,
        dan_inf: cfg.dan_inf,
        b: cfg.b,
    };
    let mut txt = create(&args.out.join("profile.txt"))?;
    for (k, v) in [
        ("gamma", profile.gamma),
        ("q", profile.q),
        ("alpha_x", profile.alpha_x),
        ("alpha_e", profile.alpha_e),
        ("tau", profile.tau),
        ("alpha", profile.alpha),
        ("nu", profile.nu),
        ("rho", profile.rho),
    ] {
        writeln!(txt, "{k} = {v:.10e}").map_err(|e| Failure::Runtime(e.to_string()))?;
    }

    let mut csv = create(&args.out.join("rates.csv"))?;
    writeln!(
        csv,
        "n,p,s,lambda_scale,lambda_branch,n_floor,l2_bound,l1_bound,prediction_bound,\
         lambda_lower,lambda_upper,n_required,feasible,probability_bound"
    )
    .map_err(|e| Failure::Runtime(e.to_string()))?;
    for &n in &cfg.n_grid {
        for &p in &cfg.p_grid {
            for &s in &cfg.s_grid {
                let lambda = profile.lambda_scale(n, p, &constants)?;
                let floor = profile.sample_size_floor(p, s, &constants)?;
                let bounds = profile.error_bounds(lambda.value, s, cfg.kappa)?;
                let mut inputs = Theorem2Inputs::ones(n, p, s);
                inputs.eta = cfg.eta;
                inputs.l_min = cfg.l_min;
                inputs.m_x = cfg.m_x;
                inputs.m_e = cfg.m_e;
                let t2 = hdlasso::dependence::theorem2_scaling(&profile, &inputs)?;
                writeln!(
                    csv,
                    "{n},{p},{s},{:.10e},{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{},{:.10e}",
                    lambda.value,
                    lambda.branch,
                    floor,
                    bounds.l2,
                    bounds.l1,
                    bounds.prediction,
                    t2.lambda_lower,
                    t2.lambda_upper,
                    t2.n_required,
                    t2.feasible,
                    t2.probability_bound
                )
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            }
        }
    }
    Ok(())
}
