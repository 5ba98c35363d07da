//! `adia`: simulate, sweep and check bounds for adiabatic search under
//! decoherence.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use adiasearch::analysis::{self, FindOptions};
use adiasearch::bounds::{self, BoundName, BoundReport, Openness, SemiOpenTerms};
use adiasearch::dynamics::{self, SimOptions};
use adiasearch::model::{ModelParams, Schedule};
use adiasearch::validation::{self, Suite, ValidationConfig};
use adiasearch::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTEGRATION: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "adia",
    version,
    about = "Adiabatic quantum search under decoherence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one run and write the sampled trajectory.
    Simulate(SimulateArgs),
    /// Find the run time for a target success probability over a grid of N.
    Sweep(SweepArgs),
    /// Find the run time for a single N.
    FindRuntime(FindArgs),
    /// Evaluate deviation bounds and run-time bounds as JSON lines.
    Bounds(BoundsArgs),
    /// Run the invariant suites.
    Validate(ValidateArgs),
    /// Fit the log-log slope of a sweep CSV.
    Fit(FitArgs),
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Openness: A = cos(ωπ/2), B = sin(ωπ/2).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    omega: f64,
    /// Explicit coherent weight; overrides --omega together with --B.
    #[arg(long = "A", allow_negative_numbers = true, requires = "coeff_b")]
    coeff_a: Option<f64>,
    /// Explicit decoherence weight; overrides --omega together with --A.
    #[arg(long = "B", allow_negative_numbers = true, requires = "coeff_a")]
    coeff_b: Option<f64>,
    /// Exponent in Γ = Δ^σ.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Global)]
    schedule: ScheduleArg,
}

#[derive(Args, Debug, Clone)]
struct TolArgs {
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    abs_tol: f64,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value_t = 16)]
    n: u64,
    #[arg(long = "T", allow_negative_numbers = true)]
    run_time: f64,
    #[arg(long, default_value_t = dynamics::DEFAULT_SAMPLE_COUNT)]
    samples: usize,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Clone)]
struct SearchArgs {
    #[arg(long, default_value_t = 0.5)]
    p_target: f64,
    #[arg(long, default_value_t = analysis::DEFAULT_P_TOL)]
    p_tol: f64,
    /// Largest run time tried before a search gives up.
    #[arg(long, default_value_t = analysis::DEFAULT_CEILING)]
    ceiling: f64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value_t = 64)]
    n_min: u64,
    #[arg(long, default_value_t = 4096)]
    n_max: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct FindArgs {
    #[arg(long, default_value_t = 16)]
    n: u64,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, default_value_t = 16)]
    n: u64,
    /// Simulate at this run time and compare the deviation with its bound.
    #[arg(long = "T", allow_negative_numbers = true)]
    run_time: Option<f64>,
    /// Search the run time for this target and compare it with the run-time bounds.
    #[arg(long)]
    p_target: Option<f64>,
    #[arg(long, default_value_t = analysis::DEFAULT_P_TOL)]
    p_tol: f64,
    #[arg(long, value_enum, default_value_t = RegimeArg::Auto)]
    regime: RegimeArg,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Run only these suites (comma separated).
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, default_value_t = ValidationConfig::default().seed)]
    seed: u64,
    /// Flip the sign of the decoherence term in the purity suite; the run
    /// must then fail.
    #[arg(long, hide = true)]
    flip_damping: bool,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Sweep CSV as written by `adia sweep`.
    input: PathBuf,
    /// Fraction of the largest-N rows used in the fit.
    #[arg(long, default_value_t = 0.5)]
    window: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ScheduleArg {
    Global,
    Local,
}

impl From<ScheduleArg> for Schedule {
    fn from(s: ScheduleArg) -> Self {
        match s {
            ScheduleArg::Global => Schedule::Global,
            ScheduleArg::Local => Schedule::Local,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum RegimeArg {
    /// Wide-open when A = 0, semi-open otherwise.
    Auto,
    WideOpen,
    SemiOpen,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::InsufficientPoints { .. } => EXIT_USAGE,
            _ => EXIT_INTEGRATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        // a closed pipe downstream (`adia simulate | head`) is not an error
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure {
                code: 0,
                message: String::new(),
            };
        }
        Failure {
            code: EXIT_USAGE,
            message: format!("i/o error: {e}"),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ADIA_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::FindRuntime(a) => cmd_find_runtime(&a),
        Command::Bounds(a) => cmd_bounds(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::Fit(a) => cmd_fit(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("adia: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn model_params(n: u64, m: &ModelArgs) -> Result<ModelParams, Failure> {
    let schedule = m.schedule.into();
    let params = match (m.coeff_a, m.coeff_b) {
        (Some(a), Some(b)) => ModelParams::new(n, m.sigma, a, b, schedule)?,
        _ => {
            if !(0.0..=1.0).contains(&m.omega) {
                return Err(Failure::usage(format!(
                    "--omega must lie in [0, 1], got {}",
                    m.omega
                )));
            }
            ModelParams::from_omega(n, m.omega, m.sigma, schedule)?
        }
    };
    Ok(params)
}

fn sim_options(tol: &TolArgs, samples: usize) -> Result<SimOptions, Failure> {
    let opts = SimOptions::default()
        .with_tolerances(tol.rel_tol, tol.abs_tol)
        .with_samples(samples);
    opts.validate()?;
    Ok(opts)
}

fn find_options(search: &SearchArgs, tol: &TolArgs) -> Result<FindOptions, Failure> {
    let opts = FindOptions {
        sim: sim_options(tol, 2)?,
        ceiling: search.ceiling,
        ..FindOptions::default().with_p_tol(search.p_tol)
    };
    opts.validate()?;
    if !(search.p_target > 0.0 && search.p_target < 1.0) {
        return Err(Failure::usage(format!(
            "--p-target must lie in (0, 1), got {}",
            search.p_target
        )));
    }
    Ok(opts)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::usage(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_simulate(a: &SimulateArgs) -> CmdResult {
    let params = model_params(a.n, &a.model)?;
    let opts = sim_options(&a.tol, a.samples)?;
    info!("simulate {params:?} T={}", a.run_time);
    let tr = dynamics::evolve(&params, a.run_time, dynamics::initial_ground_state(), &opts)?;
    let mut out = open_out(a.out.out.as_deref())?;
    match a.out.format {
        Format::Csv => output::trajectory_csv(&mut out, &tr)?,
        Format::Json => output::trajectory_json(&mut out, &tr)?,
    }
    out.flush()?;
    Ok(0)
}

fn write_rows(out: &OutArgs, rows: &[analysis::SweepRow]) -> Result<(), Failure> {
    let mut w = open_out(out.out.as_deref())?;
    match out.format {
        Format::Csv => output::sweep_csv(&mut w, rows)?,
        Format::Json => output::sweep_json(&mut w, rows)?,
    }
    w.flush()?;
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> CmdResult {
    let grid = analysis::power_of_two_grid(a.n_min, a.n_max)?;
    let base = model_params(a.n_min, &a.model)?;
    let opts = find_options(&a.search, &a.tol)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| Failure::usage(format!("cannot start {} workers: {e}", a.jobs)))?;
    info!(
        "sweep over {} values of N with {} workers",
        grid.len(),
        pool.current_num_threads()
    );
    let table = pool.install(|| analysis::sweep(&grid, a.search.p_target, &base, &opts))?;
    for row in &table.rows {
        if let Err(e) = &row.outcome {
            warn!("N = {}: {e}", row.n_items);
        }
    }
    write_rows(&a.out, &table.rows)?;
    Ok(if table.failures() > 0 {
        EXIT_PARTIAL
    } else {
        0
    })
}

fn cmd_find_runtime(a: &FindArgs) -> CmdResult {
    let params = model_params(a.n, &a.model)?;
    let opts = find_options(&a.search, &a.tol)?;
    let res = analysis::find_runtime(&params, a.search.p_target, &opts)?;
    info!("{} evaluations, bracket {:?}", res.evaluations, res.bracket);
    match a.out.format {
        // same schema as a one-row sweep
        Format::Csv => {
            let row = analysis::SweepRow {
                n_items: params.n_items,
                p_target: a.search.p_target,
                omega: params.omega(),
                sigma: params.sigma,
                schedule: params.schedule,
                outcome: Ok(res),
            };
            write_rows(&a.out, &[row])?;
        }
        Format::Json => {
            let mut w = open_out(a.out.out.as_deref())?;
            writeln!(w, "{}", output::runtime_json(&res))?;
            w.flush()?;
        }
    }
    Ok(0)
}

fn openness_of(params: &ModelParams, regime: RegimeArg) -> Result<Openness, Failure> {
    match regime {
        RegimeArg::Auto if params.is_wide_open() => Ok(Openness::WideOpen),
        RegimeArg::Auto => Ok(Openness::SemiOpen),
        RegimeArg::WideOpen if params.is_wide_open() => Ok(Openness::WideOpen),
        RegimeArg::WideOpen => Err(Failure::usage(format!(
            "wide-open bounds need A = 0, got A = {}",
            params.coeff_a
        ))),
        RegimeArg::SemiOpen if !params.is_wide_open() => Ok(Openness::SemiOpen),
        RegimeArg::SemiOpen => Err(Failure::usage(
            "semi-open bounds need A > 0; use --regime wide-open",
        )),
    }
}

fn cmd_bounds(a: &BoundsArgs) -> CmdResult {
    let params = model_params(a.n, &a.model)?;
    let openness = openness_of(&params, a.regime)?;
    if a.run_time.is_none() && a.p_target.is_none() {
        return Err(Failure::usage("bounds needs --T, --p-target or both"));
    }
    let tol = &a.tol;
    let mut lines = Vec::new();
    if let Some(t) = a.run_time {
        let opts = sim_options(tol, 64)?;
        let tr = dynamics::evolve(&params, t, dynamics::initial_ground_state(), &opts)?;
        let rep = bounds::deviation_report(&params, &tr)?;
        lines.push(output::report_json(rep.name.as_str(), &rep));
    }
    if let Some(p) = a.p_target {
        let search = SearchArgs {
            p_target: p,
            p_tol: a.p_tol,
            ceiling: analysis::DEFAULT_CEILING,
        };
        let opts = find_options(&search, tol)?;
        let terms = match openness {
            Openness::WideOpen => SemiOpenTerms {
                a: 0.0,
                b: 1.0,
                k: 0.0,
            },
            Openness::SemiOpen => SemiOpenTerms {
                a: params.coeff_a,
                b: params.coeff_b,
                k: bounds::condition_integral(params.n_items, params.sigma)?,
            },
        };
        let sandwich = bounds::runtime_bounds_for_p(
            params.n_items,
            p,
            params.sigma,
            params.schedule,
            openness,
            terms,
        )?;
        // the wide-open bounds are stated for B = 1; other weights rescale T
        let scale = match openness {
            Openness::WideOpen => params.coeff_b.recip(),
            Openness::SemiOpen => 1.0,
        };
        let found = analysis::find_runtime(&params, p, &opts)?;
        if let Some(low) = sandwich.low {
            if sandwich.lower_vacuous {
                info!("lower bound is vacuous for p = {p}");
            }
            let rep = BoundReport::lower(BoundName::RuntimeLower, low * scale, found.run_time);
            lines.push(output::report_json("T_low", &rep));
        }
        let rep = BoundReport::upper(
            BoundName::RuntimeUpper,
            sandwich.high * scale,
            found.run_time,
        );
        lines.push(output::report_json("T_high", &rep));
    }
    let mut w = open_out(a.out.as_deref())?;
    for l in lines {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(0)
}

fn cmd_validate(a: &ValidateArgs) -> CmdResult {
    let suites: Vec<Suite> = if a.only.is_empty() {
        Suite::ALL.to_vec()
    } else {
        a.only
            .iter()
            .map(|s| s.trim().parse::<Suite>())
            .collect::<Result<_, _>>()?
    };
    let cfg = ValidationConfig {
        seed: a.seed,
        flip_damping: a.flip_damping,
        ..ValidationConfig::default()
    };
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{:<10} {:>7} {:>8} {:>12}  status",
        "suite", "checks", "failed", "worst"
    )?;
    let mut failed = false;
    for &s in &suites {
        let r = validation::run_suite(s, &cfg);
        failed |= !r.passed();
        writeln!(
            out,
            "{:<10} {:>7} {:>8} {:>12.3e}  {}",
            s.as_str(),
            r.checks,
            r.failures,
            r.worst,
            if r.passed() { "PASS" } else { "FAIL" }
        )?;
        if !r.passed() {
            writeln!(out, "           first failure: {}", r.detail)?;
        }
    }
    Ok(if failed { EXIT_VALIDATION } else { 0 })
}

fn cmd_fit(a: &FitArgs) -> CmdResult {
    let mut reader = csv::Reader::from_path(&a.input)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", a.input.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Failure::usage(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>().join(",") != output::SWEEP_HEADER {
        return Err(Failure::usage(format!(
            "expected header `{}`",
            output::SWEEP_HEADER
        )));
    }
    let mut points = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Failure::usage(e.to_string()))?;
        let n: u64 = rec[2]
            .parse()
            .map_err(|_| Failure::usage(format!("bad N `{}`", &rec[2])))?;
        if rec[3].is_empty() {
            continue;
        }
        let t: f64 = rec[3]
            .parse()
            .map_err(|_| Failure::usage(format!("bad T `{}`", &rec[3])))?;
        points.push((n, t));
    }
    let fit = analysis::fit_log2(&points, a.window)?;
    println!("{}", output::fit_json(&fit));
    Ok(0)
}
