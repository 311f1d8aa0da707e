mod experiment;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use delaypred::bounds::{BoundReport, RunningL2};
use delaypred::linalg::Matrix;
use delaypred::lmi::{export_certificate, gain_report, problem_to_json, LmiProblem, Objective, VerificationReport};
use delaypred::observer::true_augmented_state;
use delaypred::prelude::*;
use serde::Serialize;

use experiment::{Experiment, GainSource};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_DIVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "delaypred", version, about = "Disturbance-aware prediction for input-delayed systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Seed for randomized disturbances.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Design or certify the observer gain.
    Design(Common),
    /// Run one closed-loop simulation.
    Simulate(Common),
    /// Run the same experiment with several predictors.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated methods, e.g. `modified,wu1,wu2`.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
    },
    /// Compare the measured prediction error with the analytical bound.
    Bound(Common),
}

enum Failure {
    Lib(Error),
    Unverified,
    Diverged(Method),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Lib(Error::Infeasible { .. }) | Failure::Unverified => EXIT_INFEASIBLE,
        Failure::Diverged(_) => EXIT_DIVERGED,
        Failure::Lib(
            Error::Parse(_)
            | Error::Json(_)
            | Error::Usage(_)
            | Error::Dimension { .. }
            | Error::InvalidParameter(_)
            | Error::OutOfRange(_),
        ) => EXIT_CONFIG,
        Failure::Lib(_) => EXIT_FAILURE,
    }
}

fn check_method(m: Method) -> Result<Method> {
    if m == Method::Exact && !cfg!(feature = "oracle") {
        return Err(Error::Usage("the `exact` method needs future disturbances; build with the `oracle` feature".into()));
    }
    Ok(m)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    fs::write(dir.join(name), text + "\n")?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> Outcome<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn prepare(common: &Common) -> Outcome<Experiment> {
    let exp = Experiment::load(&common.config)?;
    if let Some(s) = &exp.spec.simulation {
        s.method.map(check_method).transpose()?;
        for m in s.methods.iter().flatten() {
            check_method(*m)?;
        }
    }
    fs::create_dir_all(&common.out)?;
    write_json(&common.out, "experiment.json", &exp.spec)?;
    Ok(exp)
}

struct Certified {
    aug: AugmentedModel,
    cert: DesignCertificate,
    report: VerificationReport,
    problem: Option<LmiProblem>,
}

/// Designs a gain, certifies a supplied one, or checks a loaded certificate.
fn certify(exp: &Experiment) -> Result<Certified> {
    let aug = build_augmented(&exp.plant, exp.r)?;
    let gains = compute_gains(&exp.plant, exp.r, exp.gain_form());
    let (cert, problem) = match &exp.gain {
        GainSource::Design(opts) => {
            let mut problem = assemble_theorem1(&aug, &gains)?;
            if !opts.unconstrained_eigenvalues {
                problem.add_dstability(&aug, opts.zeta_a, opts.zeta_b)?;
            }
            if !opts.minimize {
                problem.objective = Objective::Feasibility;
            }
            (solve_design(&problem, opts.minimize)?, Some(problem))
        }
        GainSource::Supplied(l) => {
            let problem = assemble_theorem1_fixed_gain(&aug, &gains, l)?;
            (solve_design(&problem, true)?, Some(problem))
        }
        GainSource::Certificate(cert) => (cert.clone(), None),
    };
    let report = verify_certificate(&aug, &gains, &cert)?;
    Ok(Certified {
        aug,
        cert,
        report,
        problem,
    })
}

/// Observer gain for simulation; a supplied gain is used as is.
fn observer_gain(exp: &Experiment, needed: bool) -> Result<Option<Matrix>> {
    if !needed {
        return Ok(None);
    }
    Ok(Some(match &exp.gain {
        GainSource::Supplied(l) => l.clone(),
        GainSource::Certificate(cert) => cert.l.clone(),
        GainSource::Design(_) => certify(exp)?.cert.l,
    }))
}

#[derive(Serialize)]
struct InfeasibilityReport {
    status: String,
    message: String,
}

fn cmd_design(common: &Common) -> Outcome {
    let exp = prepare(common)?;
    let certified = match certify(&exp) {
        Ok(c) => c,
        Err(Error::Infeasible { status }) => {
            let e = Error::Infeasible { status: status.clone() };
            write_json(&common.out, "infeasibility.json", &InfeasibilityReport { status, message: e.to_string() })?;
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(problem) = &certified.problem {
        fs::write(common.out.join("problem.json"), problem_to_json(problem)? + "\n")?;
    }
    write_json(&common.out, "certificate.json", &export_certificate(&certified.cert))?;
    write_json(&common.out, "verification.json", &certified.report)?;

    let r = &certified.report;
    println!("gamma_bar {}", r.gamma_bar);
    println!("gamma     {}", r.gamma);
    println!("spectral radius {}", r.gain.spectral_radius);
    for (re, im) in &r.gain.eigenvalues {
        println!("eigenvalue {re} {im:+}i");
    }
    println!("verification {}", if r.passed { "passed" } else { "FAILED" });
    if r.passed {
        Ok(())
    } else {
        Err(Failure::Unverified)
    }
}

fn cmd_simulate(common: &Common) -> Outcome {
    let exp = prepare(common)?;
    let method = exp.method();
    let l = observer_gain(&exp, method.uses_observer())?;
    let trace = run_closed_loop(&exp.sim_config(l, common.seed)?)?;
    trace.write_csv(create(&common.out, "trace.csv")?)?;
    let metrics = trace.metrics();
    write_json(&common.out, "metrics.json", &metrics)?;
    println!(
        "{method}: peak |x| {}, peak prediction error {}, steady RMS |x| {}",
        metrics.peak_state_norm, metrics.peak_prediction_error, metrics.steady_rms_state_norm
    );
    if trace.diverged {
        return Err(Failure::Diverged(method));
    }
    Ok(())
}

fn cmd_compare(common: &Common, methods: Option<&[String]>) -> Outcome {
    let exp = prepare(common)?;
    let methods: Vec<Method> = match methods {
        Some(list) => list
            .iter()
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse::<Method>().and_then(check_method))
            .collect::<Result<_>>()?,
        None => exp.simulation()?.methods.clone().unwrap_or_else(|| vec![exp.method(), Method::Wu1, Method::Wu2]),
    };
    if methods.is_empty() {
        return Err(Error::Usage("no methods selected".into()).into());
    }
    let l = observer_gain(&exp, methods.iter().any(|m| m.uses_observer()))?;
    let traces = run_comparison(&exp.sim_config(l, common.seed)?, &methods)?;

    let mut table = csv::Writer::from_writer(create(&common.out, "comparison.csv")?);
    table.write_record([
        "method",
        "steps",
        "diverged",
        "peak_state_norm",
        "peak_prediction_error",
        "steady_rms_state_norm",
        "steady_rms_prediction_error",
        "final_prediction_error",
    ])
    .map_err(Error::from)?;
    println!(
        "{:<10} {:>9} {:>24} {:>24} {:>24}",
        "method", "diverged", "peak pred. error", "steady RMS |x|", "steady RMS error"
    );
    let mut all = Vec::new();
    for trace in &traces {
        trace.write_csv(create(&common.out, &format!("trace_{}.csv", trace.method))?)?;
        let m = trace.metrics();
        let f = delaypred::fmt_f64;
        table
            .write_record([
                m.method.to_string(),
                m.steps.to_string(),
                m.diverged.to_string(),
                f(m.peak_state_norm),
                f(m.peak_prediction_error),
                f(m.steady_rms_state_norm),
                f(m.steady_rms_prediction_error),
                f(m.final_prediction_error),
            ])
            .map_err(Error::from)?;
        println!(
            "{:<10} {:>9} {:>24} {:>24} {:>24}",
            m.method.as_str(),
            m.diverged,
            f(m.peak_prediction_error),
            f(m.steady_rms_state_norm),
            f(m.steady_rms_prediction_error)
        );
        all.push(m);
    }
    table.flush()?;
    write_json(&common.out, "metrics.json", &all)
}

#[derive(Serialize)]
struct BoundOutput {
    #[serde(flatten)]
    report: BoundReport,
    method: Method,
    violations: usize,
    max_ratio: f64,
    verification: VerificationReport,
}

fn cmd_bound(common: &Common) -> Outcome {
    let exp = prepare(common)?;
    let method = exp.method();
    if !method.uses_observer() {
        return Err(Error::Usage(format!("the bound applies to observer-based methods, not {method}")).into());
    }
    let certified = certify(&exp)?;
    write_json(&common.out, "certificate.json", &export_certificate(&certified.cert))?;
    if !certified.report.passed {
        write_json(&common.out, "verification.json", &certified.report)?;
        return Err(Failure::Unverified);
    }
    let config = exp.sim_config(Some(certified.cert.l.clone()), common.seed)?;
    let trace = run_closed_loop(&config)?;

    let w = &config.disturbance;
    let delta = w.residual_bound(exp.r + 1, config.horizon + exp.plant.delay);
    let eta0 = true_augmented_state(&certified.aug, &config.x0, w, 0);
    let e0 = eta0 - &trace.rows[0].etahat;
    let report = BoundReport::new(&exp.plant, exp.r, certified.cert.gamma(), delta, certified.cert.lyapunov(&e0));

    let mut curve = csv::Writer::from_writer(create(&common.out, "bound_curve.csv")?);
    curve.write_record(["k", "bound", "measured"]).map_err(Error::from)?;
    let mut l2 = RunningL2::new();
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    for (k, err) in trace.prediction_errors() {
        let measured = l2.push(&err);
        let bound = report.bound_at(k);
        if measured > bound {
            violations += 1;
        }
        max_ratio = max_ratio.max(measured / bound);
        curve
            .write_record([k.to_string(), delaypred::fmt_f64(bound), delaypred::fmt_f64(measured)])
            .map_err(Error::from)?;
    }
    curve.flush()?;
    let gain = gain_report(&certified.aug, &certified.cert.l, certified.cert.region);
    println!("mu {}  delta {}  gamma {}  epsilon {}", report.mu, report.delta, report.gamma, report.epsilon);
    println!("spectral radius {}", gain.spectral_radius);
    println!("violations {violations}, max measured/bound {max_ratio}");
    write_json(
        &common.out,
        "bound_report.json",
        &BoundOutput {
            report,
            method,
            violations,
            max_ratio,
            verification: certified.report,
        },
    )?;
    if trace.diverged {
        return Err(Failure::Diverged(method));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Design(c) => cmd_design(c),
        Command::Simulate(c) => cmd_simulate(c),
        Command::Compare { common, methods } => cmd_compare(common, methods.as_deref()),
        Command::Bound(c) => cmd_bound(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Unverified => eprintln!("error: certificate failed verification"),
                Failure::Diverged(m) => eprintln!("error: {m} simulation diverged"),
            }
            ExitCode::from(exit_code(&f))
        }
    }
}
