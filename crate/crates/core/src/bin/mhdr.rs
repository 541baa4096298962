//! Command-line front end: region estimation from sample files, level
//! queries, seeded studies, case-study ingestion, and plot-data export.
//!
//! Exit codes: 0 success, 2 invalid configuration or data, 3 file
//! ingestion or I/O failure, 64 usage error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use manifold_hdr::density::{
    cv_select_concentration, default_cv_grid, DensityModel, KernelConfig,
    KernelDensity,
};
use manifold_hdr::grid::{build_grid, GridSpec};
use manifold_hdr::harness::{run_study, StudyKind};
use manifold_hdr::hdr::{
    ball_union_components, estimate_hdr, estimate_hdr_by_probability, estimate_level,
    split_sample_with_values, HdrEstimate,
};
use manifold_hdr::pipeline::{
    export_boundary, ingest_comets, ingest_phases, read_estimate_json, read_sample_csv,
    write_estimate_json, write_sample_csv, AngleUnit,
};
use manifold_hdr::{Error, Sample};

#[derive(Parser)]
#[command(
    name = "mhdr",
    version,
    about = "Highest-density regions on manifolds by granulometric smoothing",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a highest-density region from a sample file.
    Estimate(EstimateArgs),
    /// Print the empirical level for a probability mass target.
    Level(LevelArgs),
    /// Run the study described by a JSON config file.
    Simulate(StudyArgs),
    /// Run the config as a convergence study (overrides its study kind).
    Convergence(StudyArgs),
    /// Convert a raw case-study file into the sample CSV format.
    Ingest(IngestArgs),
    /// Export the discretized boundary of a saved estimate for plotting.
    ExportBoundary(ExportBoundaryArgs),
    /// Print the connected component count of a saved estimate.
    Components(ComponentsArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Sample CSV (header manifold,dim,c1..).
    #[arg(long)]
    input: PathBuf,
    /// Probability mass target in (0, 1); the threshold is estimated.
    #[arg(long, conflicts_with = "lambda")]
    gamma: Option<f64>,
    /// Fixed density threshold.
    #[arg(long)]
    lambda: Option<f64>,
    /// Ball radius r_n.
    #[arg(long = "rn")]
    r_n: f64,
    /// Kernel concentration; omitted means leave-one-out cross-validation.
    #[arg(long)]
    concentration: Option<f64>,
    /// Output path for the estimate JSON.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct LevelArgs {
    /// Sample CSV (header manifold,dim,c1..).
    #[arg(long)]
    input: PathBuf,
    /// Probability mass target in (0, 1).
    #[arg(long)]
    gamma: f64,
    /// Kernel concentration; omitted means leave-one-out cross-validation.
    #[arg(long)]
    concentration: Option<f64>,
}

#[derive(Args)]
struct StudyArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's replicate count.
    #[arg(long)]
    reps: Option<usize>,
    /// Override the config's grid resolution.
    #[arg(long = "grid-res", env = "MHDR_GRID_RES")]
    grid_res: Option<usize>,
    /// Directory for records.csv (appended) and summary.json.
    #[arg(long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IngestFormat {
    /// Orbit angles (inclination, ascending node) to sphere normals.
    Comets,
    /// Paired phases in hours to torus angles.
    Phases,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UnitArg {
    Deg,
    Rad,
}

#[derive(Args)]
struct IngestArgs {
    /// Raw case-study CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: IngestFormat,
    /// Unit of the orbit angles (comets format only).
    #[arg(long = "angle-unit", value_enum, default_value = "deg")]
    angle_unit: UnitArg,
    /// Output path for the sample CSV.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ExportBoundaryArgs {
    /// Estimate JSON produced by the estimate subcommand.
    #[arg(long)]
    estimate: PathBuf,
    /// Grid resolution for the membership discretization.
    #[arg(long = "grid-res", env = "MHDR_GRID_RES", default_value_t = 4096)]
    grid_res: usize,
    /// Projection center for sphere estimates, as x,y,z.
    #[arg(long, value_delimiter = ',')]
    center: Option<Vec<f64>>,
    /// Output path for the boundary CSV.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ComponentsArgs {
    /// Estimate JSON produced by the estimate subcommand.
    #[arg(long)]
    estimate: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("mhdr: {err}");
            let code = match err {
                Error::Config(_) | Error::Domain(_) => 2,
                Error::Ingestion(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => 3,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Level(args) => cmd_level(args),
        Command::Simulate(args) => cmd_study(args, None),
        Command::Convergence(args) => cmd_study(args, Some(StudyKind::Convergence)),
        Command::Ingest(args) => cmd_ingest(args),
        Command::ExportBoundary(args) => cmd_export_boundary(args),
        Command::Components(args) => cmd_components(args),
    }
}

/// Kernel fit shared by estimate and level: fixed concentration when
/// given, cross-validated otherwise.
fn fit_kernel(points: &Sample, concentration: Option<f64>) -> Result<(DensityModel, f64), Error> {
    let family = KernelConfig::family_for(points.kind());
    let kappa = match concentration {
        Some(k) => k,
        None => cv_select_concentration(points, family, &default_cv_grid(family))?,
    };
    let kde = KernelDensity::new(points.clone(), KernelConfig::new(family, kappa)?)?;
    Ok((DensityModel::Kernel(kde), kappa))
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Error> {
    let points = read_sample_csv(&args.input)?;
    let (density, kappa) = fit_kernel(&points, args.concentration)?;
    let est: HdrEstimate = match (args.gamma, args.lambda) {
        (Some(gamma), None) => {
            estimate_hdr_by_probability(&points, &density, gamma, args.r_n)?
        }
        (None, Some(lambda)) => {
            let values = density.evaluate_sample(&points)?;
            let labeled = split_sample_with_values(&points, values, lambda)?;
            estimate_hdr(&labeled, args.r_n)?
        }
        _ => {
            return Err(Error::Config(
                "exactly one of --gamma or --lambda is required".into(),
            ))
        }
    };
    if est.is_empty() {
        eprintln!(
            "mhdr: estimate is empty (threshold {:.6} erased every center); \
             the output file records an empty region",
            est.lambda()
        );
    }
    write_estimate_json(&args.output, &est)?;
    let (components, _) = ball_union_components(est.set());
    println!(
        "n={} selected={} components={} lambda={:.6e} kappa={:.4} r_n={}",
        points.len(),
        est.selected().len(),
        components,
        est.lambda(),
        kappa,
        est.radius()
    );
    Ok(())
}

fn cmd_level(args: LevelArgs) -> Result<(), Error> {
    let points = read_sample_csv(&args.input)?;
    let (density, _) = fit_kernel(&points, args.concentration)?;
    let values = density.evaluate_sample(&points)?;
    let lambda_hat = estimate_level(&values, args.gamma)?;
    println!("{lambda_hat}");
    Ok(())
}

fn cmd_study(args: StudyArgs, force_kind: Option<StudyKind>) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut config: manifold_hdr::harness::ExperimentConfig = serde_json::from_str(&text)?;
    if let Some(kind) = force_kind {
        config.study = kind;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(reps) = args.reps {
        config.replicates = reps;
    }
    if let Some(res) = args.grid_res {
        config.grid_resolution = res;
    }
    let record = run_study(&config)?;
    std::fs::create_dir_all(&args.out_dir)?;
    record.append_csv(args.out_dir.join("records.csv"))?;
    record.write_summary_json(args.out_dir.join("summary.json"))?;
    for s in &record.summaries {
        match s.gamma {
            Some(g) => println!(
                "n={} gamma={} median_dH={:.6} median_level_err={:.6} empty={}",
                s.n,
                g,
                s.median_d_hausdorff,
                s.median_level_abs_error.unwrap_or(f64::NAN),
                s.empty_count
            ),
            None => println!(
                "n={} median_dH={:.6} median_Dsup={:.6} empty={}",
                s.n, s.median_d_hausdorff, s.median_d_sup_density, s.empty_count
            ),
        }
    }
    println!(
        "config={} records={} dispersion={:.6}",
        record.config_hash,
        record.records.len(),
        record.grid_dispersion
    );
    Ok(())
}

fn cmd_ingest(args: IngestArgs) -> Result<(), Error> {
    let sample = match args.format {
        IngestFormat::Comets => {
            let unit = match args.angle_unit {
                UnitArg::Deg => AngleUnit::Degrees,
                UnitArg::Rad => AngleUnit::Radians,
            };
            ingest_comets(&args.input, unit)?
        }
        IngestFormat::Phases => ingest_phases(&args.input)?,
    };
    write_sample_csv(&args.output, &sample)?;
    println!("ingested {} points onto {}", sample.len(), sample.kind());
    Ok(())
}

fn cmd_export_boundary(args: ExportBoundaryArgs) -> Result<(), Error> {
    if let Some(center) = &args.center {
        if center.len() != 3 {
            return Err(Error::Config(
                "--center needs exactly three coordinates, as x,y,z".into(),
            ));
        }
    }
    let doc = read_estimate_json(&args.estimate)?;
    let set = doc.ball_union()?;
    let grid = Arc::new(build_grid(&GridSpec::new(doc.manifold, args.grid_res))?);
    let mask = set.membership_mask(&grid)?;
    let rows = export_boundary(&args.output, &mask, args.center.as_deref())?;
    println!(
        "wrote {rows} boundary nodes at resolution {} (dispersion {:.6})",
        grid.len(),
        grid.dispersion()
    );
    Ok(())
}

fn cmd_components(args: ComponentsArgs) -> Result<(), Error> {
    let doc = read_estimate_json(&args.estimate)?;
    let set = doc.ball_union()?;
    let (count, _) = ball_union_components(&set);
    println!("{count}");
    Ok(())
}
