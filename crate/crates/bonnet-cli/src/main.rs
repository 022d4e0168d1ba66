//! `bonnet` - verify Gauss-Bonnet integrals and Thom forms from the
//! command line.
//!
//! Exit codes: 0 when every requested check passes, 1 when the
//! computations ran but at least one check failed its tolerance, 2 for
//! usage errors, unknown models, or malformed model files.

use bonnet_core::models::{self, ModelBundle};
use bonnet_core::verify::{self, Check, IntegralReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

/// Like `println!`, but a closed pipe (e.g. `bonnet ... | head`) ends the
/// output quietly instead of panicking.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "bonnet",
    version,
    about = "Euler characteristics from curvature: Gauss-Bonnet integrals, \
             Pfaffians, and Thom forms on a catalog of vector bundles"
)]
struct Cli {
    /// Worker threads for parallel integration (0 = one per core).
    /// Overrides the BONNET_THREADS environment variable.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in models with their reference Euler numbers.
    ListModels,
    /// Run verification checks.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Integrate the Euler form of one model and compare with its
    /// reference Euler number.
    GaussBonnet {
        #[command(flatten)]
        source: ModelSource,
        /// Grid cells per axis (default: 256 for surfaces, 32 in
        /// dimension four).
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=65536))]
        resolution: Option<u32>,
        /// Absolute tolerance on |computed - reference| (default matches
        /// the resolution default).
        #[arg(long)]
        tolerance: Option<f64>,
        /// Integrate on one thread (bit-identical result, for timing).
        #[arg(long)]
        sequential: bool,
        /// Emit the report as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Thom-form checks for a rank-2 model: fiber mass, closedness,
    /// frame invariance, restriction to the Euler form, compact support.
    Thom {
        #[command(flatten)]
        source: ModelSource,
        /// Base points for the fiber-integral checks.
        #[arg(long, default_value_t = 12)]
        base_points: usize,
        /// Grid points per axis for the closedness check (a 4-dimensional
        /// grid; 20 reproduces the acceptance setting).
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(2..=64))]
        grid: u32,
        /// Seed for the base-point draw.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Emit the report as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Randomized property suites.
    Properties {
        /// Which suite to run.
        #[arg(long, value_enum)]
        suite: SuiteKind,
        /// Seed for the randomized draws.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Sample count (forms: rounds, pfaffian: trials per size);
        /// ignored by the bundles suite.
        #[arg(long)]
        samples: Option<usize>,
        /// Emit the report as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Every model integral, Thom checks for every surface model, and all
    /// three property suites.
    All {
        /// Emit the combined report as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ModelSource {
    /// Built-in model name (see `bonnet list-models`).
    #[arg(long)]
    model: Option<String>,
    /// Load the model from a definition file instead.
    #[arg(long)]
    model_file: Option<PathBuf>,
}

impl ModelSource {
    fn load(&self) -> bonnet_core::Result<ModelBundle> {
        match (&self.model, &self.model_file) {
            (Some(name), None) => models::builtin(name),
            (None, Some(path)) => models::load_model_file(path),
            _ => unreachable!("clap enforces exactly one source"),
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum SuiteKind {
    Forms,
    Pfaffian,
    Bundles,
}

#[derive(Serialize)]
struct CheckJson {
    name: String,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

impl From<&Check> for CheckJson {
    fn from(c: &Check) -> CheckJson {
        CheckJson {
            name: c.name.clone(),
            residual: c.residual,
            tolerance: c.tolerance,
            pass: c.pass,
        }
    }
}

#[derive(Serialize)]
struct GaussBonnetJson {
    model: String,
    rank: usize,
    q: usize,
    computed: f64,
    reference: f64,
    abs_error: f64,
    resolution: usize,
    duration_ms: u128,
    checks: Vec<CheckJson>,
}

#[derive(Serialize)]
struct ThomJson {
    model: String,
    rank: usize,
    q: usize,
    duration_ms: u128,
    checks: Vec<CheckJson>,
}

#[derive(Serialize)]
struct SuiteJson {
    suite: String,
    seed: u64,
    duration_ms: u128,
    checks: Vec<CheckJson>,
}

#[derive(Serialize)]
struct AllJson {
    pass: bool,
    gauss_bonnet: Vec<GaussBonnetJson>,
    thom: Vec<ThomJson>,
    suites: Vec<SuiteJson>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("BONNET_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if let Err(e) = bonnet_core::configure_threads(n) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every check passed; hard errors bubble up as exit 2.
fn run(command: Command) -> bonnet_core::Result<bool> {
    match command {
        Command::ListModels => {
            for model in models::catalog()? {
                out!(
                    "{:<24} rank {}  chi {:>2}   {}",
                    model.name(),
                    model.rank(),
                    model.reference_chi(),
                    model.derivation()
                );
            }
            Ok(true)
        }
        Command::Verify(VerifyCommand::GaussBonnet {
            source,
            resolution,
            tolerance,
            sequential,
            json,
        }) => {
            let model = source.load()?;
            let report = run_gauss_bonnet(
                &model,
                resolution.map(|r| r as usize),
                tolerance,
                sequential,
            )?;
            let pass = report.check.pass;
            if json {
                print_json(&gauss_bonnet_json(&model, &report));
            } else {
                print_gauss_bonnet(&model, &report);
            }
            Ok(pass)
        }
        Command::Verify(VerifyCommand::Thom {
            source,
            base_points,
            grid,
            seed,
            json,
        }) => {
            let model = source.load()?;
            let start = std::time::Instant::now();
            let checks = verify::thom_suite(&model, seed, base_points, grid as usize)?;
            let duration_ms = start.elapsed().as_millis();
            let pass = verify::all_pass(&checks);
            if json {
                print_json(&thom_json(&model, duration_ms, &checks));
            } else {
                out!("{} (rank {}):", model.name(), model.rank());
                print_checks(&checks);
            }
            Ok(pass)
        }
        Command::Verify(VerifyCommand::Properties {
            suite,
            seed,
            samples,
            json,
        }) => {
            let start = std::time::Instant::now();
            let (name, checks) = run_suite(suite, seed, samples)?;
            let duration_ms = start.elapsed().as_millis();
            let pass = verify::all_pass(&checks);
            if json {
                print_json(&suite_json(name, seed, duration_ms, &checks));
            } else {
                out!("{name} suite (seed {seed}):");
                print_checks(&checks);
            }
            Ok(pass)
        }
        Command::Verify(VerifyCommand::All { json }) => run_all(json),
    }
}

fn run_gauss_bonnet(
    model: &ModelBundle,
    resolution: Option<usize>,
    tolerance: Option<f64>,
    sequential: bool,
) -> bonnet_core::Result<IntegralReport> {
    let resolution = resolution.unwrap_or_else(|| verify::default_resolution(model));
    let tolerance = tolerance.unwrap_or_else(|| verify::default_tolerance(model));
    verify::gauss_bonnet_report(model, resolution, tolerance, sequential)
}

fn run_suite(
    suite: SuiteKind,
    seed: u64,
    samples: Option<usize>,
) -> bonnet_core::Result<(&'static str, Vec<Check>)> {
    Ok(match suite {
        SuiteKind::Forms => ("forms", verify::forms_suite(seed, samples.unwrap_or(60))?),
        SuiteKind::Pfaffian => (
            "pfaffian",
            verify::pfaffian_suite(seed, samples.unwrap_or(25))?,
        ),
        SuiteKind::Bundles => ("bundles", verify::bundles_suite(seed)?),
    })
}

fn run_all(json: bool) -> bonnet_core::Result<bool> {
    let mut all = AllJson {
        pass: true,
        gauss_bonnet: Vec::new(),
        thom: Vec::new(),
        suites: Vec::new(),
    };
    for model in models::catalog()? {
        let report = run_gauss_bonnet(&model, None, None, false)?;
        all.pass &= report.check.pass;
        if !json {
            print_gauss_bonnet(&model, &report);
        }
        all.gauss_bonnet.push(gauss_bonnet_json(&model, &report));

        if model.is_rank_two() {
            let start = std::time::Instant::now();
            let checks = verify::thom_suite(&model, 7, 12, 6)?;
            let duration_ms = start.elapsed().as_millis();
            all.pass &= verify::all_pass(&checks);
            if !json {
                print_checks(&checks);
            }
            all.thom.push(thom_json(&model, duration_ms, &checks));
        }
    }
    for suite in [SuiteKind::Forms, SuiteKind::Pfaffian, SuiteKind::Bundles] {
        let start = std::time::Instant::now();
        let (name, checks) = run_suite(suite, 7, None)?;
        let duration_ms = start.elapsed().as_millis();
        all.pass &= verify::all_pass(&checks);
        if !json {
            out!("{name} suite:");
            print_checks(&checks);
        }
        all.suites.push(suite_json(name, 7, duration_ms, &checks));
    }
    if json {
        print_json(&all);
    } else {
        out!("overall: {}", verdict(all.pass));
    }
    Ok(all.pass)
}

fn gauss_bonnet_json(model: &ModelBundle, report: &IntegralReport) -> GaussBonnetJson {
    GaussBonnetJson {
        model: model.name().to_string(),
        rank: model.rank(),
        q: model.rank() / 2,
        computed: report.computed,
        reference: report.reference,
        abs_error: report.abs_error,
        resolution: report.resolution,
        duration_ms: report.duration_ms,
        checks: vec![CheckJson::from(&report.check)],
    }
}

fn thom_json(model: &ModelBundle, duration_ms: u128, checks: &[Check]) -> ThomJson {
    ThomJson {
        model: model.name().to_string(),
        rank: model.rank(),
        q: model.rank() / 2,
        duration_ms,
        checks: checks.iter().map(CheckJson::from).collect(),
    }
}

fn suite_json(name: &str, seed: u64, duration_ms: u128, checks: &[Check]) -> SuiteJson {
    SuiteJson {
        suite: name.to_string(),
        seed,
        duration_ms,
        checks: checks.iter().map(CheckJson::from).collect(),
    }
}

fn print_json(value: &impl Serialize) {
    out!(
        "{}",
        serde_json::to_string_pretty(value).expect("reports serialize")
    );
}

fn print_gauss_bonnet(model: &ModelBundle, report: &IntegralReport) {
    out!(
        "{:<24} chi = {:+.8} (reference {:+}), |error| = {:.2e} <= {:.0e} {} \
         [{} cells/axis, {} ms]",
        model.name(),
        report.computed,
        report.reference,
        report.abs_error,
        report.check.tolerance,
        verdict(report.check.pass),
        report.resolution,
        report.duration_ms,
    );
}

fn print_checks(checks: &[Check]) {
    for check in checks {
        out!(
            "  {:<44} {:.2e} <= {:.0e} {}",
            check.name,
            check.residual,
            check.tolerance,
            verdict(check.pass)
        );
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
