//! Thin command-line front end. All functionality lives in the library;
//! this binary only merges flags with an optional key-value config file,
//! dispatches, writes report files and maps errors to exit codes:
//! 0 success, 1 usage/parse, 2 numerical failure, 3 verification violation.

use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use transversal::cli::{
    self, AnalyzeConfig, BuildCmdConfig, Document, ScanCmdConfig, VerifyCmdConfig,
};
use transversal::constructions::{ExampleKind, ExampleSpec};
use transversal::error::Error;

#[derive(Parser)]
#[command(
    name = "transversal",
    version,
    about = "Detect sphere-tangency exceptional centers of a parametrized submanifold \
             and fit the affine planes they lie on"
)]
struct Cli {
    /// Key-value config file supplying defaults for the flags below.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical points, transversality verdicts and the tangency measure
    /// for one sphere center.
    Analyze(AnalyzeArgs),
    /// Sweep a grid of centers, flag exceptional ones and fit planes.
    Scan(ScanArgs),
    /// Emit a reference manifold as a manifold file.
    BuildExample(BuildArgs),
    /// Run the verification battery; nonzero exit on violation.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Manifold file.
    #[arg(long)]
    manifold: Option<String>,
    /// Sphere center, comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    /// Quadrature nodes per parameter axis.
    #[arg(long)]
    nodes: Option<usize>,
    /// Newton seeds per parameter axis.
    #[arg(long)]
    seeds: Option<usize>,
    /// Relative tangency tolerance.
    #[arg(long)]
    tau: Option<f64>,
    /// Relative Newton convergence tolerance.
    #[arg(long)]
    newton_tau: Option<f64>,
    /// Exceptional-fraction threshold.
    #[arg(long)]
    delta: Option<f64>,
    /// Report file (JSON); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    manifold: Option<String>,
    /// Center box, comma-separated lo1,hi1,lo2,hi2,...
    #[arg(long = "box", allow_hyphen_values = true)]
    scan_box: Option<String>,
    /// Center-grid nodes per ambient axis.
    #[arg(long)]
    center_nodes: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Single-linkage radius; 1.5x grid spacing when omitted.
    #[arg(long)]
    linking_radius: Option<f64>,
    /// Report file (JSON); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-center measure table (CSV).
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    /// sigma0 | sigma2 | sphere-chain | circle | sphere
    kind: Option<String>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    /// Ambient dimension (sphere kinds).
    #[arg(long)]
    n: Option<usize>,
    /// Intrinsic dimension (sphere kinds).
    #[arg(long)]
    d: Option<usize>,
    /// Component radius.
    #[arg(long)]
    scale: Option<f64>,
    /// Center-to-center spacing.
    #[arg(long)]
    spacing: Option<f64>,
    /// Manifold file to write; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a point-cloud CSV here.
    #[arg(long)]
    cloud: Option<PathBuf>,
    /// Samples per parameter axis for the point cloud.
    #[arg(long)]
    cloud_samples: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Manifold file to verify (claim1 + dichotomy checks).
    #[arg(long)]
    manifold: Option<String>,
    /// Built-in example to verify against its predicted planes.
    #[arg(long)]
    example: Option<String>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random (a, P) trials per Grassmann dimension.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    center_nodes: Option<usize>,
    /// Report file (JSON); stdout summary either way.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through this path too
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let defaults = match &cli.config {
        Some(path) => cli::parse_config_map(&std::fs::read_to_string(path)?)?,
        None => BTreeMap::new(),
    };
    match cli.command {
        Command::Analyze(args) => run_analyze(args, &defaults),
        Command::Scan(args) => run_scan(args, &defaults),
        Command::BuildExample(args) => run_build(args, &defaults),
        Command::Verify(args) => run_verify(args, &defaults),
    }
}

fn run_analyze(args: AnalyzeArgs, defaults: &BTreeMap<String, String>) -> Result<ExitCode, Error> {
    let manifold = require(
        args.manifold.or_else(|| defaults.get("manifold").cloned()),
        "--manifold",
    )?;
    let center = parse_coordinates(&require(
        args.center.or_else(|| defaults.get("center").cloned()),
        "--center",
    )?)?;
    let mut config = AnalyzeConfig::new(manifold, center);
    config.measure_nodes = merged(args.nodes, defaults, "nodes", config.measure_nodes)?;
    config.seeds_per_axis = merged(args.seeds, defaults, "seeds", config.seeds_per_axis)?;
    config.tau = merged(args.tau, defaults, "tau", config.tau)?;
    config.newton_tol = merged(args.newton_tau, defaults, "newton-tau", config.newton_tol)?;
    config.delta = merged(args.delta, defaults, "delta", config.delta)?;
    let report = cli::run_analyze(&config)?;
    println!(
        "{} critical point(s){}; measured fraction {:.6}; verdict: {}",
        report.critical_points.len(),
        if report.continuum { " (continuum)" } else { "" },
        report.measure.fraction,
        report.verdict
    );
    emit(args.out.as_deref(), &Document::new(report))?;
    Ok(ExitCode::SUCCESS)
}

fn run_scan(args: ScanArgs, defaults: &BTreeMap<String, String>) -> Result<ExitCode, Error> {
    let manifold = require(
        args.manifold.or_else(|| defaults.get("manifold").cloned()),
        "--manifold",
    )?;
    let box_values = parse_coordinates(&require(
        args.scan_box.or_else(|| defaults.get("box").cloned()),
        "--box",
    )?)?;
    if box_values.len() % 2 != 0 || box_values.is_empty() {
        return Err(Error::Config(
            "--box expects lo1,hi1,lo2,hi2,... pairs".into(),
        ));
    }
    let (lo, hi): (Vec<f64>, Vec<f64>) = box_values
        .chunks(2)
        .map(|pair| (pair[0], pair[1]))
        .unzip();
    let center_nodes = merged(args.center_nodes, defaults, "center-nodes", 11)?;
    let mut config = ScanCmdConfig::new(manifold, lo, hi, center_nodes);
    config.measure_nodes = merged(args.nodes, defaults, "nodes", config.measure_nodes)?;
    config.tau = merged(args.tau, defaults, "tau", config.tau)?;
    config.delta = merged(args.delta, defaults, "delta", config.delta)?;
    config.linking_radius = match args.linking_radius {
        Some(r) => Some(r),
        None => defaults
            .get("linking-radius")
            .map(|v| parse_value(v, "linking-radius"))
            .transpose()?,
    };
    let report = cli::run_scan(&config)?;
    println!(
        "{} centers, {} exceptional, {} fitted plane(s)",
        report.scan.centers.len(),
        report.scan.exceptional.len(),
        report.scan.planes.len()
    );
    for (plane, residual) in report.scan.planes.iter().zip(&report.scan.fit_residuals) {
        println!(
            "  plane dim {} through {:?}, max fit residual {:.3e}",
            plane.k, plane.base, residual
        );
    }
    if let Some(path) = &args.table {
        std::fs::write(path, cli::scan_table_csv(&report.scan))?;
    }
    emit(args.out.as_deref(), &Document::new(report))?;
    Ok(ExitCode::SUCCESS)
}

fn run_build(args: BuildArgs, defaults: &BTreeMap<String, String>) -> Result<ExitCode, Error> {
    let kind: ExampleKind = require(
        args.kind.or_else(|| defaults.get("kind").cloned()),
        "KIND",
    )?
    .parse()?;
    let mut spec = match kind {
        ExampleKind::SingleCircle => ExampleSpec::single_circle(),
        ExampleKind::Sigma0 => ExampleSpec::sigma0(2),
        ExampleKind::Sigma2 => ExampleSpec::sigma2(2, 0.01),
        ExampleKind::SingleSphere => ExampleSpec::single_sphere(
            merged(args.n, defaults, "n", 4)?,
            merged(args.d, defaults, "d", 2)?,
        ),
        ExampleKind::SphereChain => ExampleSpec::sphere_chain(
            merged(args.n, defaults, "n", 4)?,
            merged(args.d, defaults, "d", 2)?,
            1,
        ),
    };
    if let Some(count) = args.count {
        spec.count = count;
    } else if let Some(count) = defaults.get("count") {
        spec.count = parse_value(count, "count")?;
    }
    spec.eps = merged(args.eps, defaults, "eps", spec.eps)?;
    spec.scale = merged(args.scale, defaults, "scale", spec.scale)?;
    spec.spacing = merged(args.spacing, defaults, "spacing", spec.spacing)?;
    let cloud_samples = merged(args.cloud_samples, defaults, "cloud-samples", 32)?;
    let config = BuildCmdConfig {
        spec,
        cloud_samples: if args.cloud.is_some() { cloud_samples } else { 0 },
    };
    let (manifold_text, cloud) = cli::run_build(&config)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, &manifold_text)?;
            println!(
                "wrote {} ({} chart(s))",
                path.display(),
                manifold_text.lines().filter(|l| *l == "chart").count()
            );
        }
        None => print!("{manifold_text}"),
    }
    if let (Some(path), Some(csv)) = (&args.cloud, cloud) {
        std::fs::write(path, csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_verify(args: VerifyArgs, defaults: &BTreeMap<String, String>) -> Result<ExitCode, Error> {
    let example = match args.example.or_else(|| defaults.get("example").cloned()) {
        Some(kind_text) => {
            let kind: ExampleKind = kind_text.parse()?;
            let mut spec = match kind {
                ExampleKind::SingleCircle => ExampleSpec::single_circle(),
                ExampleKind::Sigma0 => ExampleSpec::sigma0(2),
                ExampleKind::Sigma2 => ExampleSpec::sigma2(2, 0.01),
                ExampleKind::SingleSphere => ExampleSpec::single_sphere(
                    merged(args.n, defaults, "n", 4)?,
                    merged(args.d, defaults, "d", 2)?,
                ),
                ExampleKind::SphereChain => ExampleSpec::sphere_chain(
                    merged(args.n, defaults, "n", 4)?,
                    merged(args.d, defaults, "d", 2)?,
                    1,
                ),
            };
            if let Some(count) = args.count {
                spec.count = count;
            }
            if let Some(eps) = args.eps {
                spec.eps = eps;
            }
            if let Some(scale) = args.scale {
                spec.scale = scale;
            }
            if let Some(spacing) = args.spacing {
                spec.spacing = spacing;
            }
            Some(spec)
        }
        None => None,
    };
    let mut config = match (example, args.manifold.or_else(|| defaults.get("manifold").cloned())) {
        (Some(spec), _) => VerifyCmdConfig::for_example(spec),
        (None, Some(path)) => VerifyCmdConfig::for_manifold(path),
        (None, None) => {
            return Err(Error::Config(
                "verify needs --manifold or --example".into(),
            ))
        }
    };
    config.seed = merged(args.seed, defaults, "seed", 0)?;
    config.trials = merged(args.trials, defaults, "trials", 100)?;
    config.measure_nodes = merged(args.nodes, defaults, "nodes", 0)?;
    config.tau = merged(args.tau, defaults, "tau", config.tau)?;
    config.delta = merged(args.delta, defaults, "delta", config.delta)?;
    config.center_nodes = match args.center_nodes {
        Some(v) => Some(v),
        None => defaults
            .get("center-nodes")
            .map(|v| parse_value(v, "center-nodes"))
            .transpose()?,
    };
    let report = cli::run_verify(&config)?;
    for check in &report.checks {
        println!(
            "{} {}: {}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    let failed = report.first_failure().map(|c| c.name.clone());
    emit(args.out.as_deref(), &Document::new(report))?;
    match failed {
        None => Ok(ExitCode::SUCCESS),
        Some(name) => {
            eprintln!("verification violation: {name}");
            Ok(ExitCode::from(3))
        }
    }
}

fn emit<T: serde::Serialize>(path: Option<&Path>, document: &Document<T>) -> Result<(), Error> {
    let rendered = document.render()?;
    match path {
        Some(path) => std::fs::write(path, rendered)?,
        None => println!("{rendered}"),
    }
    Ok(())
}

fn require<T>(value: Option<T>, what: &str) -> Result<T, Error> {
    value.ok_or_else(|| Error::Config(format!("missing required {what}")))
}

fn parse_coordinates(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|field| parse_value(field.trim(), "coordinate"))
        .collect()
}

fn parse_value<T: std::str::FromStr>(text: &str, what: &str) -> Result<T, Error> {
    text.parse()
        .map_err(|_| Error::Config(format!("malformed {what} `{text}`")))
}

fn merged<T: std::str::FromStr + Copy>(
    flag: Option<T>,
    defaults: &BTreeMap<String, String>,
    key: &str,
    fallback: T,
) -> Result<T, Error> {
    if let Some(value) = flag {
        return Ok(value);
    }
    match defaults.get(key) {
        Some(text) => parse_value(text, key),
        None => Ok(fallback),
    }
}
