use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dsncp::cluster::{ClusterSimulator, Extension, ModelFamily, ModelParams};
use dsncp::dpp::most_repulsive_intensity;
use dsncp::envelope::{envelope_test_with, TestOptions, DEFAULT_LEVEL, DEFAULT_N_SIM, FAST_N_SIM};
use dsncp::fit::{min_contrast_fit, ContrastOptions, FitResult};
use dsncp::io::{read_json_file, read_pattern_file, write_json, write_pattern_csv};
use dsncp::study::{run_cell, StudyConfig, STUDY_CSV_HEADER};
use dsncp::summaries::{k_theoretical, linspace, pcf_crossover_radius, pcf_theoretical, Statistic};
use dsncp::{Error, RngStream, Window};

#[derive(Parser)]
#[command(name = "dsncp", version, about = "Simulate, fit and test determinantal shot noise Cox processes")]
struct Cli {
    /// Master seed for all random streams.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Suppress progress and summary output on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a pattern and write it as `x,y` CSV.
    Simulate(SimulateArgs),
    /// Tabulate theoretical pcf, K or K − πr², or print the pcf crossover radius.
    Curves(CurvesArgs),
    /// Fit one or all families by minimum contrast.
    Fit(FitArgs),
    /// Global envelope test of a fitted model against data.
    Envelope(EnvelopeArgs),
    /// Run a simulation study from a JSON config.
    Study(StudyArgs),
    /// Dump the eigenvalues of the DPP centre process on the extended window.
    Spectrum(SpectrumArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// thomas, gaussian-dpp-thomas or ginibre-dpp-thomas.
    #[arg(long)]
    model: ModelFamily,
    /// Offspring standard deviation.
    #[arg(long)]
    alpha: f64,
    /// DPP scale; DPP families only.
    #[arg(long)]
    beta: Option<f64>,
    /// Centre intensity; defaults to 1/(πβ²) for DPP families.
    #[arg(long = "rhoY")]
    rho_y: Option<f64>,
    /// Mean cluster size.
    #[arg(long)]
    gamma: Option<f64>,
    /// Intensity of the observed process; sets gamma = rhoX / rhoY.
    #[arg(long = "rhoX")]
    rho_x: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// rect:xmin,xmax,ymin,ymax or disc:cx,cy,r
    #[arg(long)]
    window: Window,
    /// Extension margin for centres (default 4·alpha).
    #[arg(long)]
    margin: Option<f64>,
    /// Output CSV (default stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveStat {
    Pcf,
    #[value(name = "K")]
    K,
    #[value(name = "Kcentered")]
    Kcentered,
    Crossover,
}

#[derive(Args)]
struct CurvesArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum)]
    stat: CurveStat,
    /// Grid as start:stop:count.
    #[arg(long = "r", default_value = "0:8:401")]
    grid: GridSpec,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct GridSpec(Vec<f64>);

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("grid `{s}`: expected start:stop:count");
        if parts.len() != 3 {
            return Err(bad());
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(a >= 0.0 && b > a && b.is_finite()) || n < 2 {
            return Err(format!("grid `{s}`: need 0 <= start < stop and count >= 2"));
        }
        Ok(GridSpec(linspace(a, b, n)))
    }
}

#[derive(Args)]
struct FitArgs {
    /// Pattern CSV with header `x,y`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    window: Window,
    /// Family to fit.
    #[arg(long, required_unless_present = "all_families", conflicts_with = "all_families")]
    model: Option<ModelFamily>,
    /// Fit all three families and print a comparison table.
    #[arg(long)]
    all_families: bool,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    grid_size: Option<usize>,
    /// Output JSON (default stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EnvelopeArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    window: Window,
    /// Fit JSON written by `dsncp fit`.
    #[arg(long)]
    fit: PathBuf,
    /// pcf, K, F, G or J.
    #[arg(long, default_value = "J")]
    stat: Statistic,
    #[arg(long = "nsim", default_value_t = DEFAULT_N_SIM)]
    n_sim: usize,
    /// Use 199 simulations.
    #[arg(long, conflicts_with = "n_sim")]
    fast: bool,
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    #[arg(long)]
    margin: Option<f64>,
    /// Envelope CSV (r,obs,lo,hi,central).
    #[arg(short, long)]
    output: PathBuf,
    /// Summary JSON (default: the CSV path with a .json extension).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    /// Study config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Results CSV; existing cells are kept and skipped.
    #[arg(short, long)]
    output: PathBuf,
    /// Override the number of replicates.
    #[arg(long)]
    replicates: Option<usize>,
    /// Override simulations per test.
    #[arg(long = "nsim")]
    n_sim: Option<usize>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    window: Window,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Failure classes, each with its own exit code.
enum CliError {
    /// Inconsistent or missing flags.
    Usage(String),
    /// Parameters violating a model constraint.
    Model(Error),
    /// Result written, but the optimizer did not converge.
    NotConverged(String),
    /// I/O, data and other runtime failures.
    Runtime(Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Model(_) => 3,
            CliError::NotConverged(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Model(e) => write!(f, "model constraint violated: {e}"),
            CliError::NotConverged(m) => write!(f, "{m}"),
            CliError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

type CliResult<T> = Result<T, CliError>;

fn model_error(e: Error) -> CliError {
    match e {
        Error::ExistenceViolation { .. } | Error::InvalidParameter(_) => CliError::Model(e),
        other => CliError::Runtime(other),
    }
}

impl ModelArgs {
    /// Resolves `(γ, ρ_Y)` from the flags; `gamma_required` is false where the
    /// cluster size does not matter (theoretical curves, spectra).
    fn params(&self, gamma_required: bool) -> CliResult<ModelParams> {
        let family = self.model;
        if !family.is_dpp() && self.beta.is_some() {
            return Err(CliError::Usage("--beta applies to DPP families only".into()));
        }
        let beta = match (family.is_dpp(), self.beta) {
            (true, None) => return Err(CliError::Usage(format!("{family} requires --beta"))),
            (_, b) => b,
        };
        let rho_y = match (self.rho_y, beta, self.gamma, self.rho_x) {
            (Some(r), _, _, _) => r,
            (None, Some(b), _, _) => most_repulsive_intensity(b),
            (None, None, Some(g), Some(x)) => x / g,
            (None, None, _, _) => {
                return Err(CliError::Usage(
                    "thomas requires --rhoY (or both --gamma and --rhoX)".into(),
                ))
            }
        };
        let gamma = match (self.gamma, self.rho_x) {
            (Some(_), Some(_)) if self.rho_y.is_some() || beta.is_some() => {
                return Err(CliError::Usage("give at most two of --gamma, --rhoX and --rhoY".into()))
            }
            (Some(g), _) => g,
            (None, Some(x)) => x / rho_y,
            (None, None) if gamma_required => {
                return Err(CliError::Usage("give --gamma or --rhoX".into()))
            }
            (None, None) => 1.0,
        };
        let m = match beta {
            Some(b) => ModelParams::dpp(family, gamma, self.alpha, rho_y, b),
            None => ModelParams::thomas(gamma, self.alpha, rho_y),
        };
        m.map_err(model_error)
    }
}

fn extension(margin: Option<f64>, m: &ModelParams) -> CliResult<Extension> {
    match margin {
        Some(v) => Extension::new(v).map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(Extension::default_for(m)),
    }
}

fn writer(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

struct Reporter {
    quiet: bool,
}

impl Reporter {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn describe(m: &ModelParams) -> String {
    let mut s = format!(
        "{}: alpha={} gamma={} rhoY={} rhoX={}",
        m.family,
        m.alpha,
        m.gamma,
        m.rho_y,
        m.intensity()
    );
    if let Some(b) = m.beta {
        s.push_str(&format!(" beta={b}"));
    }
    s
}

fn cmd_simulate(a: &SimulateArgs, seed: u64, out: &Reporter) -> CliResult<()> {
    let m = a.model.params(true)?;
    let ext = extension(a.margin, &m)?;
    let sim = ClusterSimulator::new(m, a.window, ext).map_err(model_error)?;
    let x = sim.sample(&mut RngStream::new(seed, 0))?;
    let mut w = writer(a.output.as_deref())?;
    write_pattern_csv(&x, &mut w)?;
    w.flush()?;
    out.say(format!("{} points; {}", x.len(), describe(&m)));
    Ok(())
}

fn cmd_curves(a: &CurvesArgs, out: &Reporter) -> CliResult<()> {
    let m = a.model.params(false)?;
    let mut w = writer(a.output.as_deref())?;
    let f: fn(&ModelParams, f64) -> f64 = match a.stat {
        CurveStat::Crossover => {
            let r = pcf_crossover_radius(&m).map_err(|e| match e {
                Error::Unsupported(msg) => CliError::Usage(format!("crossover: {msg}")),
                other => model_error(other),
            })?;
            writeln!(w, "{r}")?;
            w.flush()?;
            return Ok(());
        }
        CurveStat::Pcf => pcf_theoretical,
        CurveStat::K => k_theoretical,
        CurveStat::Kcentered => |m, r| k_theoretical(m, r) - std::f64::consts::PI * r * r,
    };
    writeln!(w, "r,value")?;
    for &r in &a.grid.0 {
        writeln!(w, "{},{}", r, f(&m, r))?;
    }
    w.flush()?;
    out.say(describe(&m));
    Ok(())
}

fn contrast_options(a: &FitArgs, n: usize) -> CliResult<ContrastOptions> {
    let base = ContrastOptions::default_for(&a.window, n);
    let mut o = ContrastOptions::with_range(&a.window, n, a.rmin.unwrap_or(base.r_min), a.rmax.unwrap_or(base.r_max));
    o.q = a.q.unwrap_or(o.q);
    o.p = a.p.unwrap_or(o.p);
    o.grid_size = a.grid_size.unwrap_or(o.grid_size);
    o.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(o)
}

fn cmd_fit(a: &FitArgs, out: &Reporter) -> CliResult<()> {
    let x = read_pattern_file(&a.data, a.window)?;
    let opts = contrast_options(a, x.len())?;
    let families: Vec<ModelFamily> = match a.model {
        Some(f) => vec![f],
        None => ModelFamily::ALL.to_vec(),
    };
    let fits = families
        .iter()
        .map(|&f| min_contrast_fit(&x, f, &opts))
        .collect::<dsncp::Result<Vec<_>>>()?;
    let mut w = writer(a.output.as_deref())?;
    if a.all_families {
        write_json(&mut w, &fits)?;
        out.say(format!("{} points, |W| = {}", x.len(), a.window.area()));
        out.say(format!("{:<20} {:>10} {:>10} {:>10} {:>10}", "model", "beta", "rhoY", "gamma", "alpha"));
        for f in &fits {
            let beta = f.beta.map_or("-".to_string(), |b| format!("{b:.4}"));
            out.say(format!(
                "{:<20} {:>10} {:>10.2} {:>10.2} {:>10.4}",
                f.family.as_str(),
                beta,
                f.rho_y,
                f.gamma,
                f.alpha
            ));
        }
    } else {
        write_json(&mut w, &fits[0])?;
    }
    w.flush()?;
    let failed: Vec<&str> = fits.iter().filter(|f| !f.converged).map(|f| f.family.as_str()).collect();
    if !failed.is_empty() {
        return Err(CliError::NotConverged(format!(
            "fit did not converge for {}; best point written",
            failed.join(", ")
        )));
    }
    Ok(())
}

fn cmd_envelope(a: &EnvelopeArgs, seed: u64, out: &Reporter) -> CliResult<()> {
    let x = read_pattern_file(&a.data, a.window)?;
    let fit: FitResult = read_json_file(&a.fit)?;
    let m = fit.model().map_err(model_error)?;
    let ext = extension(a.margin, &m)?;
    let n_sim = if a.fast { FAST_N_SIM } else { a.n_sim };
    let opts = TestOptions {
        level: a.level,
        ..TestOptions::default()
    };
    let res = envelope_test_with(&x, &fit, a.stat, n_sim, Some(ext), &RngStream::new(seed, 0), &opts).map_err(
        |e| match e {
            Error::InvalidParameter(msg) => CliError::Usage(msg),
            other => CliError::Runtime(other),
        },
    )?;
    let mut w = writer(Some(&a.output))?;
    res.write_csv(&mut w)?;
    w.flush()?;
    let json_path = a.json.clone().unwrap_or_else(|| a.output.with_extension("json"));
    let mut j = writer(Some(&json_path))?;
    write_json(&mut j, &EnvelopeReport {
        model: &fit,
        summary: res.summary(),
        seed,
    })?;
    j.flush()?;
    out.say(format!(
        "{} vs {}: p = {} ({} simulations, {} grid points)",
        a.stat,
        fit.family,
        res.p_value,
        res.n_sim,
        res.r.len()
    ));
    Ok(())
}

#[derive(Serialize)]
struct EnvelopeReport<'a> {
    model: &'a FitResult,
    #[serde(flatten)]
    summary: dsncp::envelope::EnvelopeSummary,
    seed: u64,
}

fn done_cells(path: &Path) -> CliResult<HashSet<String>> {
    let mut done = HashSet::new();
    if !path.exists() {
        return Ok(done);
    }
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != STUDY_CSV_HEADER {
                return Err(CliError::Runtime(Error::Parse {
                    line: 1,
                    message: format!("{} is not a study results file", path.display()),
                }));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() == 7 {
            done.insert(fields[..1].iter().chain(&fields[2..5]).copied().collect::<Vec<_>>().join(","));
        }
    }
    Ok(done)
}

fn cmd_study(a: &StudyArgs, seed_flag: Option<u64>, out: &Reporter) -> CliResult<()> {
    let mut cfg: StudyConfig = read_json_file(&a.config).map_err(|e| CliError::Usage(format!("{}: {e}", a.config.display())))?;
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    if let Some(n) = a.n_sim {
        cfg.n_sim = n;
    }
    if let Some(s) = seed_flag {
        cfg.seed = s;
    }
    cfg.validate().map_err(model_error)?;
    let done = done_cells(&a.output)?;
    let fresh = !a.output.exists();
    let mut csv = OpenOptions::new().create(true).append(true).open(&a.output)?;
    if fresh {
        writeln!(csv, "{STUDY_CSV_HEADER}")?;
    }
    let sidecar = a.output.with_extension("errors.jsonl");
    let cells = cfg.cells();
    let mut failures = 0;
    for cell in &cells {
        if done.contains(&cell.key()) {
            out.say(format!("cell {}/{} already done", cell.index + 1, cells.len()));
            continue;
        }
        out.say(format!(
            "cell {}/{}: {} alpha={} gamma={} rhoY={}",
            cell.index + 1,
            cells.len(),
            cell.true_family,
            cell.alpha,
            cell.gamma,
            cell.rho_y
        ));
        match run_cell(&cfg, cell) {
            Ok(rows) => {
                let mut buf = Vec::new();
                for r in &rows {
                    r.write_csv_line(&mut buf)?;
                }
                csv.write_all(&buf)?;
                csv.flush()?;
            }
            Err(e) => {
                failures += 1;
                let mut log = OpenOptions::new().create(true).append(true).open(&sidecar)?;
                let entry = serde_json::json!({ "cell": cell, "error": e.to_string() });
                writeln!(log, "{entry}")?;
                out.say(format!("  failed: {e}"));
            }
        }
    }
    if failures > 0 {
        out.say(format!("{failures} cell(s) failed; see {}", sidecar.display()));
    }
    Ok(())
}

fn cmd_spectrum(a: &SpectrumArgs, out: &Reporter) -> CliResult<()> {
    let m = a.model.params(false)?;
    if !m.family.is_dpp() {
        return Err(CliError::Usage("spectrum needs a DPP family".into()));
    }
    let ext = extension(a.margin, &m)?;
    let sim = ClusterSimulator::new(m, a.window, ext).map_err(model_error)?;
    let spec = sim.spectrum().expect("DPP family has a spectrum");
    let mut w = writer(a.output.as_deref())?;
    writeln!(w, "index,eigenvalue")?;
    for (i, v) in spec.eigenvalues().iter().enumerate() {
        writeln!(w, "{i},{v}")?;
    }
    w.flush()?;
    out.say(format!(
        "{} eigenvalues; expected count {}; truncation error {}",
        spec.len(),
        spec.expected_count(),
        spec.truncation_error()
    ));
    Ok(())
}

fn run(cli: &Cli, seed_given: bool) -> CliResult<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let out = Reporter { quiet: cli.quiet };
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, cli.seed, &out),
        Command::Curves(a) => cmd_curves(a, &out),
        Command::Fit(a) => cmd_fit(a, &out),
        Command::Envelope(a) => cmd_envelope(a, cli.seed, &out),
        Command::Study(a) => cmd_study(a, seed_given.then_some(cli.seed), &out),
        Command::Spectrum(a) => cmd_spectrum(a, &out),
    }
}

fn main() -> ExitCode {
    let matches = <Cli as clap::CommandFactory>::command().get_matches();
    let seed_given = matches
        .subcommand()
        .map(|(_, sub)| sub.value_source("seed") == Some(clap::parser::ValueSource::CommandLine))
        .unwrap_or(false)
        || matches.value_source("seed") == Some(clap::parser::ValueSource::CommandLine);
    let cli = match <Cli as clap::FromArgMatches>::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(&cli, seed_given) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(Error::Io(e))) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
