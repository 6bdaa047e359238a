use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use divrbf::direct::{fit_direct, TangentFieldSamples};
use divrbf::geom::{hammersley_nodes, SpherePoint};
use divrbf::harness::io::{read_nodes, read_samples, write_field, write_nodes_to, write_report, write_report_to};
use divrbf::harness::metrics::surface_curl_fd;
use divrbf::harness::{
    parse_epsilons, relative_max_error_values, run_sweep, stream_error_values, EvalPoints, Method, SweepSettings,
    TargetField, TargetKind,
};
use divrbf::kernels::{KernelConfig, KernelKind, TruncationOptions, DEFAULT_MU_MAX, DEFAULT_TRUNCATION_TOL};
use divrbf::rbfqr::{build_stable_basis_with, eval_qr, fit_qr, stream_qr};
use divrbf::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "divrbf", version, about = "Divergence-free RBF interpolation on the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare RBF-Direct and RBF-QR errors over a range of shape parameters.
    Sweep(SweepArgs),
    /// Fit one interpolant and write it at the evaluation points.
    Interp(InterpArgs),
    /// Write a Hammersley node set.
    Nodes(NodesArgs),
    /// Run a short numerical self-check.
    Verify,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "mq")]
    kernel: KernelKind,
    /// Node file with one `x y z` per line.
    #[arg(long, conflicts_with = "hammersley")]
    nodes: Option<PathBuf>,
    /// Use this many Hammersley nodes.
    #[arg(long)]
    hammersley: Option<usize>,
    /// `hammersley4n` or `grid:<nlat>x<nlon>`.
    #[arg(long, default_value = "hammersley4n")]
    eval: EvalPoints,
    #[arg(long, default_value_t = DEFAULT_TRUNCATION_TOL)]
    tol: f64,
    #[arg(long = "mu-max", default_value_t = DEFAULT_MU_MAX)]
    mu_max: usize,
    /// Read the last Gaussian exponent of paper-gaussians verbatim.
    #[arg(long = "literal-typo")]
    literal_typo: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "paper-gaussians")]
    target: TargetKind,
    /// Comma list or geometric range `lo:hi:count`.
    #[arg(long)]
    eps: String,
    #[arg(long, default_value = "both")]
    method: Method,
}

#[derive(Args)]
struct InterpArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, conflicts_with = "samples")]
    target: Option<TargetKind>,
    /// Sample file with one `x y z ux uy uz` per line.
    #[arg(long, conflicts_with_all = ["nodes", "hammersley"])]
    samples: Option<PathBuf>,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value = "qr")]
    method: Method,
}

#[derive(Args)]
struct NodesArgs {
    #[arg(long)]
    hammersley: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Parse { .. } => Failure::Io(e.to_string()),
            Error::InvalidArgument(_) | Error::InvalidEpsilon(_) | Error::UnknownTarget(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Interp(a) => interp(a),
        Command::Nodes(a) => nodes(a),
        Command::Verify => verify(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Numerical(m) => (EXIT_NUMERICAL, m),
                Failure::Io(m) => (EXIT_IO, m),
            };
            eprintln!("divrbf: {msg}");
            ExitCode::from(code)
        }
    }
}

impl Common {
    fn truncation(&self) -> Result<TruncationOptions, Failure> {
        if !(self.tol > 0.0 && self.tol <= 1e-8) {
            return Err(Failure::Usage(format!("--tol must lie in (0, 1e-8], got {}", self.tol)));
        }
        Ok(TruncationOptions {
            tol: self.tol,
            mu_max: self.mu_max,
        })
    }

    fn node_set(&self) -> Result<(Vec<SpherePoint>, String), Failure> {
        match (&self.nodes, self.hammersley) {
            (Some(path), _) => Ok((read_nodes(path)?, path.display().to_string())),
            (None, Some(0)) => Err(Failure::Usage("--hammersley needs at least one node".into())),
            (None, Some(n)) => Ok((hammersley_nodes(n), format!("hammersley:{n}"))),
            (None, None) => Err(Failure::Usage("one of --nodes or --hammersley is required".into())),
        }
    }
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    let opts = a.common.truncation()?;
    let (nodes, source) = a.common.node_set()?;
    let target = TargetField::new(a.target).with_literal_typo(a.common.literal_typo);
    let eval = a.common.eval.points(nodes.len());
    let mut settings = SweepSettings::new(a.common.kernel, parse_epsilons(&a.eps)?);
    settings.method = a.method;
    settings.truncation = opts;
    settings.node_source = source;
    settings.eval_source = a.common.eval.to_string();
    let report = run_sweep(&settings, &nodes, &target, &eval)?;
    match &a.common.out {
        Some(path) => write_report(path, &report)?,
        None => write_report_to(&mut std::io::stdout().lock(), &report)?,
    }
    if report.all_failed() {
        return Err(Failure::Numerical("every requested fit failed".into()));
    }
    Ok(())
}

fn interp(a: InterpArgs) -> Result<(), Failure> {
    let opts = a.common.truncation()?;
    let config = KernelConfig::new(a.common.kernel, a.eps)?;
    let samples = match (&a.samples, a.target) {
        (Some(path), _) => read_samples(path)?,
        (None, Some(kind)) => {
            let target = TargetField::new(kind).with_literal_typo(a.common.literal_typo);
            TangentFieldSamples::from_field(a.common.node_set()?.0, |p| target.field(p))?
        }
        (None, None) => return Err(Failure::Usage("one of --target or --samples is required".into())),
    };
    let out = a
        .common
        .out
        .as_ref()
        .ok_or_else(|| Failure::Usage("interp needs --out".into()))?;
    let eval = a.common.eval.points(samples.len());
    let (field, stream) = match a.method {
        Method::Direct => {
            let fit = fit_direct(&config, &samples)?;
            eprintln!("residual {:e}, condition estimate {:e}", fit.residual(), fit.condition_estimate());
            (fit.eval_many(&eval), fit.stream_many(&eval))
        }
        Method::Qr => {
            let basis = build_stable_basis_with(&config, samples.nodes(), opts)?;
            let fit = fit_qr(basis, &samples)?;
            eprintln!("residual {:e}", fit.residual());
            (fit.eval_many(&eval), fit.stream_many(&eval))
        }
        Method::Both => return Err(Failure::Usage("interp fits one method: direct or qr".into())),
    };
    write_field(out, &eval, &field, &stream)?;
    Ok(())
}

fn nodes(a: NodesArgs) -> Result<(), Failure> {
    if a.hammersley == 0 {
        return Err(Failure::Usage("--hammersley needs at least one node".into()));
    }
    let pts = hammersley_nodes(a.hammersley);
    match &a.out {
        Some(path) => divrbf::harness::io::write_nodes(path, &pts)?,
        None => {
            let mut out = std::io::stdout().lock();
            write_nodes_to(&mut out, &pts)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn verify() -> Result<(), Failure> {
    let mut ok = true;
    let mut report = |name: &str, value: f64, limit: f64| {
        let pass = value <= limit;
        ok &= pass;
        println!("{} {name}: {value:e} (limit {limit:e})", if pass { "PASS" } else { "FAIL" });
    };

    // Direct and QR agree where both are well conditioned.
    let nodes = hammersley_nodes(100);
    let target = TargetField::new(TargetKind::PaperGaussians);
    let samples = TangentFieldSamples::from_field(nodes.clone(), |p| target.field(p))?;
    let config = KernelConfig::new(KernelKind::Mq, 2.0)?;
    let direct = fit_direct(&config, &samples)?;
    let qr = fit_qr(build_stable_basis_with(&config, &nodes, TruncationOptions::default())?, &samples)?;
    let pts = hammersley_nodes(400);
    let d = direct.eval_many(&pts);
    report("direct/qr agreement at eps=2", relative_max_error_values(&qr.eval_many(&pts), &d)?, 1e-8);

    // Flat-limit reproduction of a low-degree field.
    let nodes4 = hammersley_nodes(4);
    let low = TargetField::new(TargetKind::VshLowDegree);
    let s4 = TangentFieldSamples::from_field(nodes4.clone(), |p| low.field(p))?;
    let flat = KernelConfig::new(KernelKind::Mq, 1e-6)?;
    let fit = fit_qr(build_stable_basis_with(&flat, &nodes4, TruncationOptions::default())?, &s4)?;
    let pts = hammersley_nodes(200);
    let approx: Vec<_> = pts.iter().map(|p| eval_qr(&fit, p)).collect();
    let truth: Vec<_> = pts.iter().map(|p| low.field(p)).collect();
    report("flat-limit field error", relative_max_error_values(&approx, &truth)?, 1e-8);
    let approx: Vec<_> = pts.iter().map(|p| stream_qr(&fit, p)).collect();
    let truth: Vec<_> = pts.iter().map(|p| low.stream(p)).collect();
    report("flat-limit stream error", stream_error_values(&approx, &truth)?, 1e-8);

    // The stream function generates the field.
    let pts = hammersley_nodes(50);
    let fd: Vec<_> = pts.iter().map(|p| surface_curl_fd(|q| stream_qr(&qr, q), p, 1e-4)).collect();
    let ev: Vec<_> = pts.iter().map(|p| eval_qr(&qr, p)).collect();
    report("stream/field consistency", relative_max_error_values(&fd, &ev)?, 1e-5);

    if ok {
        Ok(())
    } else {
        Err(Failure::Numerical("self-check failed".into()))
    }
}
