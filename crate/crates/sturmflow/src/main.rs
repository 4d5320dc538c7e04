use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sturmflow::axioms::run_battery;
use sturmflow::config::ProblemConfig;
use sturmflow::error::SturmError;
use sturmflow::hermitian::TolerancePolicy;
use sturmflow::oracle::oracle_zero_count;
use sturmflow::sturm::SturmProblem;
use sturmflow::verify::{verify, IndexReport, VerifyParams, DEFAULT_GALERKIN_N};

const EXIT_DISAGREE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_PIPELINE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sturmflow",
    about = "Oscillation indices for indefinite higher-order ODE systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Problem configuration (JSON).
    config: PathBuf,
    /// Base Galerkin dimension per component.
    #[arg(long, default_value_t = DEFAULT_GALERKIN_N)]
    galerkin: usize,
    /// Left cutoff of the lambda scan (certified automatically when omitted).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Fixed regularization strength (seeded draws when omitted).
    #[arg(long)]
    delta: Option<f64>,
    /// Seed for every randomized choice (default: STURMFLOW_SEED or 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Relative rank tolerance shared by both pipelines.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run both index pipelines and cross-check them.
    Verify(CommonArgs),
    /// List conjugate points with kernel dimension and crossing signature (CSV).
    ConjugatePoints(CommonArgs),
    /// Compute the intersection-index pipeline only.
    EmIndex(CommonArgs),
    /// Compute the spectral-flow pipeline only.
    MorseIndex(CommonArgs),
    /// Run the localization / catenation / homotopy axiom battery.
    Axioms {
        /// Seed for the randomized battery (default: STURMFLOW_SEED or 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Sentinel: negate every crossing form (the localization check must fail).
        #[arg(long, hide = true)]
        negate_gamma: bool,
    },
    /// Count interior zeros of the classical scalar shooting solution.
    Oracle(CommonArgs),
    /// Rerun verify while sweeping one scalar config entry (CSV).
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Dotted path of the swept entry, e.g. omega.0.terms.0.re.0.0
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        /// Number of samples (endpoints included when steps >= 2).
        #[arg(long)]
        steps: usize,
    },
}

fn default_seed() -> u64 {
    std::env::var("STURMFLOW_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn tolerance(args: &CommonArgs) -> Result<TolerancePolicy, SturmError> {
    match args.tol {
        Some(t) => TolerancePolicy::new(t, TolerancePolicy::default().integ_rel_tol),
        None => Ok(TolerancePolicy::default()),
    }
}

fn params(args: &CommonArgs) -> Result<VerifyParams, SturmError> {
    Ok(VerifyParams {
        galerkin_n: args.galerkin,
        epsilon: args.epsilon,
        delta: args.delta,
        seed: args.seed.unwrap_or_else(default_seed),
        tol: tolerance(args)?,
    })
}

fn load_problem(args: &CommonArgs) -> Result<SturmProblem, SturmError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| SturmError::Validation(format!("cannot read {:?}: {e}", args.config)))?;
    ProblemConfig::from_json(&text)?.to_problem()
}

fn emit(args: &CommonArgs, body: &str) -> Result<(), SturmError> {
    match &args.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| SturmError::Validation(format!("cannot write {path:?}: {e}"))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// 17 significant digits, enough to round-trip any f64.
fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn report_json(report: &IndexReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn config_failure(e: &SturmError) -> u8 {
    match e {
        SturmError::Validation(_) | SturmError::Domain(_) => EXIT_CONFIG,
        _ => EXIT_PIPELINE,
    }
}

fn cmd_verify(args: &CommonArgs) -> Result<u8, (u8, SturmError)> {
    let problem = load_problem(args).map_err(|e| (EXIT_CONFIG, e))?;
    let params = params(args).map_err(|e| (EXIT_CONFIG, e))?;
    let report = verify(&problem, &params).map_err(|e| (EXIT_PIPELINE, e))?;
    emit(args, &report_json(&report)).map_err(|e| (EXIT_PIPELINE, e))?;
    Ok(if report.agree { 0 } else { EXIT_DISAGREE })
}

fn cmd_conjugate_points(args: &CommonArgs) -> Result<u8, (u8, SturmError)> {
    let problem = load_problem(args).map_err(|e| (EXIT_CONFIG, e))?;
    let params = params(args).map_err(|e| (EXIT_CONFIG, e))?;
    let report = verify(&problem, &params).map_err(|e| (EXIT_PIPELINE, e))?;
    let mut csv = String::from("lambda,kernel_dim,signature\n");
    for c in &report.conjugate_points {
        csv.push_str(&format!("{},{},{}\n", fmt_real(c.lambda), c.kernel_dim, c.signature));
    }
    emit(args, &csv).map_err(|e| (EXIT_PIPELINE, e))?;
    Ok(0)
}

fn cmd_single_index(args: &CommonArgs, em: bool) -> Result<u8, (u8, SturmError)> {
    let problem = load_problem(args).map_err(|e| (EXIT_CONFIG, e))?;
    let params = params(args).map_err(|e| (EXIT_CONFIG, e))?;
    let report = verify(&problem, &params).map_err(|e| (EXIT_PIPELINE, e))?;
    let value = if em { report.em_index } else { report.morse_index };
    emit(args, &format!("{value}\n")).map_err(|e| (EXIT_PIPELINE, e))?;
    Ok(0)
}

fn cmd_axioms(seed: Option<u64>, negate_gamma: bool) -> u8 {
    let tol = TolerancePolicy::default();
    let battery = run_battery(seed.unwrap_or_else(default_seed), negate_gamma, &tol);
    for c in &battery.checks {
        println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = battery.checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} failed", battery.checks.len(), failed);
    if battery.all_passed() {
        0
    } else {
        EXIT_DISAGREE
    }
}

fn cmd_oracle(args: &CommonArgs) -> Result<u8, (u8, SturmError)> {
    let problem = load_problem(args).map_err(|e| (EXIT_CONFIG, e))?;
    let tol = tolerance(args).map_err(|e| (EXIT_CONFIG, e))?;
    let count = oracle_zero_count(&problem, &tol).map_err(|e| (config_failure(&e), e))?;
    emit(args, &format!("{count}\n")).map_err(|e| (EXIT_PIPELINE, e))?;
    Ok(0)
}

fn set_path(value: &mut serde_json::Value, path: &str, sample: f64) -> Result<(), SturmError> {
    let bad = || SturmError::Validation(format!("config has no scalar entry at path '{path}'"));
    let mut cur = value;
    for token in path.split('.') {
        cur = match cur {
            serde_json::Value::Object(map) => map.get_mut(token).ok_or_else(bad)?,
            serde_json::Value::Array(items) => {
                let idx: usize = token.parse().map_err(|_| bad())?;
                items.get_mut(idx).ok_or_else(bad)?
            }
            _ => return Err(bad()),
        };
    }
    if !cur.is_number() {
        return Err(bad());
    }
    *cur = serde_json::Value::from(sample);
    Ok(())
}

fn cmd_sweep(
    common: &CommonArgs,
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<u8, (u8, SturmError)> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| (EXIT_CONFIG, SturmError::Validation(format!("cannot read config: {e}"))))?;
    let base: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| (EXIT_CONFIG, SturmError::Validation(format!("JSON parse error: {e}"))))?;
    let params = params(common).map_err(|e| (EXIT_CONFIG, e))?;

    let samples: Vec<f64> = (0..steps)
        .map(|k| {
            if steps == 1 {
                from
            } else {
                from + (to - from) * k as f64 / (steps - 1) as f64
            }
        })
        .collect();

    // Validate the parameter path up front so address errors are config
    // errors, not mid-sweep failures.
    if let Some(&first) = samples.first() {
        let mut probe = base.clone();
        set_path(&mut probe, param, first).map_err(|e| (EXIT_CONFIG, e))?;
    }

    // Samples are independent; run them in parallel and emit rows in
    // parameter order.
    let results: Vec<Result<IndexReport, SturmError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = samples
            .iter()
            .map(|&sample| {
                let base = base.clone();
                let params = params.clone();
                scope.spawn(move || {
                    let mut doc = base;
                    set_path(&mut doc, param, sample)?;
                    let problem = ProblemConfig::from_value(doc)?.to_problem()?;
                    verify(&problem, &params)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });

    let mut csv = String::from("param,em_index,morse_index,delta\n");
    for (sample, result) in samples.iter().zip(results) {
        let report = result.map_err(|e| (EXIT_PIPELINE, e))?;
        let delta = report.delta.map(fmt_real).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_real(*sample),
            report.em_index,
            report.morse_index,
            delta
        ));
    }
    emit(common, &csv).map_err(|e| (EXIT_PIPELINE, e))?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::ConjugatePoints(args) => cmd_conjugate_points(args),
        Command::EmIndex(args) => cmd_single_index(args, true),
        Command::MorseIndex(args) => cmd_single_index(args, false),
        Command::Axioms { seed, negate_gamma } => return ExitCode::from(cmd_axioms(*seed, *negate_gamma)),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Sweep { common, param, from, to, steps } => {
            cmd_sweep(common, param, *from, *to, *steps)
        }
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err((code, err)) => {
            eprintln!("error: {err}");
            ExitCode::from(code)
        }
    }
}
