//! `symrad`: phantoms, projections, inversions and the method benchmark.
//!
//! Exit status 0 on success, 1 for usage and input errors, 2 when a
//! numerical contract is violated (support, dimensions, capability caps).
//! Failures print one `error kind=<tag> detail="<message>"` line on stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use symrad::bench::{run_benchmark, ExperimentConfig, Method};
use symrad::forward::{radon_forward, SinogramSpec};
use symrad::inversion::{
    invert_helgason_with, reconstruction_error, CircleMeanParams, ErrorNorm, Multiplier,
    SliceInterp, SpectralParams,
};
use symrad::io::{self, FileKind};
use symrad::ndim::{invert_m2_fourier_nd, radon_forward_nd, DirectionScheme, TomogramSpec};
use symrad::phasespace::{Field, GaussianTerm, GridSpec, Phantom};
use symrad::quadrature::{QuadratureRule, QuadratureSpec};
use symrad::{selftest, Error};

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "SYMRAD_THREADS";

#[derive(Parser)]
#[command(name = "symrad", version, about = "Radon and M2 tomography toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a Gaussian phantom file.
    Phantom(PhantomArgs),
    /// Project a phantom into a sinogram (2-D) or tomogram (3-D) file.
    Forward(ForwardArgs),
    /// Reconstruct a field from a sinogram or tomogram file.
    Invert(InvertArgs),
    /// Time every configured inverter and write CSV and text reports.
    Benchmark(BenchmarkArgs),
    /// Run the closed-form oracle suite.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct PhantomArgs {
    /// Output phantom file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    /// A term as `weight,alpha,c1,...,cn`; repeatable. Without terms the
    /// centered Gaussian of width `--alpha` is written.
    #[arg(long = "term", value_name = "W,ALPHA,C...")]
    terms: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Write a phantom with no terms.
    #[arg(long, conflicts_with_all = ["terms"])]
    empty: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Midpoint,
    GaussLegendre,
}

#[derive(Args)]
struct ForwardArgs {
    #[arg(long)]
    phantom: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Projection angles (2-D) or fibonacci directions (3-D).
    #[arg(long, default_value_t = 180)]
    angles: usize,
    #[arg(long, default_value_t = 256)]
    offsets: usize,
    #[arg(long, default_value_t = 8.0)]
    x_max: f64,
    #[arg(long, value_enum, default_value_t = RuleArg::GaussLegendre)]
    rule: RuleArg,
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    /// Half-length of the integration window along each line.
    #[arg(long, default_value_t = 10.0)]
    s_halfwidth: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    M2,
    CircleMean,
    Helgason,
}

#[derive(Clone, Copy, ValueEnum)]
enum InterpArg {
    Linear,
    Cubic,
}

#[derive(Args)]
struct InvertArgs {
    /// Sinogram or tomogram file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Output field file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 128)]
    samples: usize,
    #[arg(long, default_value_t = 5.0)]
    half_width: f64,
    /// Phantom file to compare against; prints max_abs and l2.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pad: usize,
    #[arg(long, value_enum, default_value_t = InterpArg::Linear)]
    interp: InterpArg,
    /// Circle-mean truncation radius.
    #[arg(long, default_value_t = 6.5)]
    r_max: f64,
    #[arg(long, default_value_t = 256)]
    n_r: usize,
    #[arg(long, default_value_t = 180)]
    n_theta: usize,
    /// Comma-separated decreasing cutoffs for the circle-mean limit.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.04,0.02,0.01,0.005,0.0025"
    )]
    epsilons: Vec<f64>,
    /// Shrink the circle-mean radius to the sinogram support per point.
    #[arg(long)]
    clip: bool,
    /// Helgason only: use the literal `(k1 + k2)^(1/2)` multiplier.
    #[arg(long)]
    printed_multiplier: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    config: PathBuf,
    /// Report directory; overrides the config's `output_dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Also check that this experiment config loads and validates.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Failure routed to an exit status.
enum Failure {
    Usage(String),
    Core(Error),
    /// Oracle checks that did not hold.
    Oracle(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn parse_term(text: &str, dims: usize) -> CliResult<GaussianTerm> {
    let nums = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(format!("bad --term `{text}`: {e}")))?;
    if nums.len() != dims + 2 {
        return Err(Failure::Usage(format!(
            "--term `{text}` needs weight, alpha and {dims} center coordinates"
        )));
    }
    Ok(GaussianTerm {
        weight: nums[0],
        alpha: nums[1],
        center: nums[2..].to_vec(),
    })
}

fn cmd_phantom(a: PhantomArgs) -> CliResult<()> {
    let ph = if a.empty {
        Phantom::new(a.dims, Vec::new())?
    } else if a.terms.is_empty() {
        Phantom::centered_gaussian(a.dims, a.alpha)?
    } else {
        let terms = a
            .terms
            .iter()
            .map(|t| parse_term(t, a.dims))
            .collect::<CliResult<_>>()?;
        Phantom::new(a.dims, terms)?
    };
    io::write_phantom(&ph, &a.out)?;
    println!(
        "wrote {} ({} terms, dims {})",
        a.out.display(),
        ph.terms().len(),
        ph.dims()
    );
    Ok(())
}

fn cmd_forward(a: ForwardArgs) -> CliResult<()> {
    let ph = io::read_phantom(&a.phantom)?;
    match ph.dims() {
        2 => {
            let rule = match a.rule {
                RuleArg::Midpoint => QuadratureRule::Midpoint,
                RuleArg::GaussLegendre => QuadratureRule::GaussLegendre,
            };
            let quad = QuadratureSpec::new(rule, a.nodes, a.s_halfwidth)?;
            let spec = SinogramSpec::new(a.angles, a.offsets, a.x_max)?;
            let sg = radon_forward(&ph, &spec, &quad)?;
            io::write_sinogram(&sg, &a.out)?;
            println!(
                "wrote sinogram {} ({} x {})",
                a.out.display(),
                a.angles,
                a.offsets
            );
        }
        3 => {
            let spec = TomogramSpec::new(
                DirectionScheme::FibonacciSphere,
                a.angles,
                a.offsets,
                a.x_max,
            )?;
            let tg = radon_forward_nd(&ph, &spec)?;
            io::write_tomogram(&tg, &a.out)?;
            println!(
                "wrote tomogram {} ({} x {})",
                a.out.display(),
                a.angles,
                a.offsets
            );
        }
        n => {
            return Err(Failure::Core(Error::Unsupported(format!(
                "forward projection of a {n}-dimensional phantom"
            ))))
        }
    }
    Ok(())
}

fn report_errors(f: &Field, reference: Option<&Path>) -> CliResult<()> {
    if let Some(path) = reference {
        let ph = io::read_phantom(path)?;
        let max_abs = reconstruction_error(f, &ph, ErrorNorm::MaxAbs)?;
        let l2 = reconstruction_error(f, &ph, ErrorNorm::L2CellWeighted)?;
        println!("max_abs={max_abs:e} l2={l2:e}");
    }
    Ok(())
}

fn cmd_invert(a: InvertArgs) -> CliResult<()> {
    let slice_interp = match a.interp {
        InterpArg::Linear => SliceInterp::Linear,
        InterpArg::Cubic => SliceInterp::Cubic,
    };
    let sp = SpectralParams::new(a.pad, slice_interp)?;
    let bytes = fs::read(&a.input).map_err(Error::from)?;
    let field = match io::peek_kind(&bytes)? {
        FileKind::Sinogram => {
            let sg = io::decode_sinogram(&bytes)?;
            let grid = GridSpec::new(2, a.half_width, a.samples)?;
            match a.method {
                MethodArg::M2 => {
                    Method::M2.invert(&sg, &grid, &sp, &CircleMeanParams::default())?
                }
                MethodArg::Helgason => {
                    let mult = if a.printed_multiplier {
                        Multiplier::PrintedSum
                    } else {
                        Multiplier::Modulus
                    };
                    invert_helgason_with(&sg, &grid, &sp, mult)?
                }
                MethodArg::CircleMean => {
                    let cp = CircleMeanParams {
                        epsilon_schedule: a.epsilons.clone(),
                        r_max: a.r_max,
                        n_r: a.n_r,
                        n_theta: a.n_theta,
                        clip_to_support: a.clip,
                    };
                    Method::CircleMean.invert(&sg, &grid, &sp, &cp)?
                }
            }
        }
        FileKind::Tomogram => {
            let tg = io::decode_tomogram(&bytes)?;
            if !matches!(a.method, MethodArg::M2) {
                return Err(Failure::Core(Error::Unsupported(
                    "tomograms are inverted with the m2 method only".into(),
                )));
            }
            let grid = GridSpec::new(tg.spec().dims(), a.half_width, a.samples)?;
            invert_m2_fourier_nd(&tg, &grid, &sp)?
        }
        FileKind::Field => {
            return Err(Failure::Usage(format!(
                "{} is a field file, not projection data",
                a.input.display()
            )))
        }
    };
    io::write_field(&field, &a.out)?;
    println!("wrote field {}", a.out.display());
    report_errors(&field, a.reference.as_deref())
}

fn cmd_benchmark(a: BenchmarkArgs) -> CliResult<()> {
    let text = fs::read_to_string(&a.config).map_err(Error::from)?;
    let mut cfg: ExperimentConfig = toml::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", a.config.display())))?;
    let base = a.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    // an explicit --out-dir is relative to the working directory; made
    // absolute so the core does not join it onto `base` a second time
    let cwd = std::env::current_dir().map_err(Error::from)?;
    let out_dir = match a.out_dir {
        Some(dir) => cwd.join(dir),
        None => cwd.join(&base).join(
            cfg.output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("bench-out")),
        ),
    };
    cfg.output_dir = Some(out_dir.clone());
    let report = run_benchmark(&cfg, &base)?;
    fs::write(out_dir.join("report.csv"), report.to_csv()).map_err(Error::from)?;
    fs::write(out_dir.join("report.txt"), report.to_table()).map_err(Error::from)?;
    print!("{}", report.to_table());
    println!("reports in {}", out_dir.display());
    Ok(())
}

fn cmd_selftest(a: SelftestArgs) -> CliResult<()> {
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).map_err(Error::from)?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.phantom.load(base)?;
        println!("PASS config {}", path.display());
    }
    let checks = selftest::run()?;
    let mut failed = 0;
    for c in &checks {
        println!(
            "{} {} ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(Failure::Oracle(format!(
            "{failed} of {} oracle checks failed",
            checks.len()
        )));
    }
    Ok(())
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn fail(kind: &str, detail: &str, code: u8) -> ExitCode {
    let detail = detail
        .replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', " ");
    eprintln!("error kind={kind} detail=\"{detail}\"");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return fail("usage", e.kind().to_string().as_str(), 1);
        }
    };
    if let Err(msg) = configure_threads() {
        return fail("usage", &msg, 1);
    }
    let result = match cli.command {
        Command::Phantom(a) => cmd_phantom(a),
        Command::Forward(a) => cmd_forward(a),
        Command::Invert(a) => cmd_invert(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => fail("usage", &msg, 1),
        Err(Failure::Oracle(msg)) => fail("oracle", &msg, 2),
        Err(Failure::Core(e)) => {
            let code = if e.is_contract_violation() { 2 } else { 1 };
            fail(&e.kind().to_string(), &e.to_string(), code)
        }
    }
}
