//! phaselens: simulate Lorenz/KdV systems, embed their outputs into
//! trajectory matrices, and reconstruct reduced phase spaces with
//! covariance PCA.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phaselens_core::embed::hankel_embed;
use phaselens_core::ode::StepSpec;
use phaselens_core::pca::{
    covariance, normalized_spectrum, project, select_components, svd, SelectionRule,
};
use phaselens_core::systems::{lorenz_trajectory, simulate_kdv, KdvParams, LorenzParams};
use phaselens_pipeline::runner::{
    write_field_csv, write_grid_csv, write_lorenz_timeseries_csv, write_matrix_csv,
};
use phaselens_pipeline::table::{emit_csv, read_matrix_csv, read_series_csv, Cell, Table};
use phaselens_pipeline::{run_experiment, ExperimentConfig, PipelineError, SystemKind};

/// Presets compiled into the binary; `run` also accepts them by name when
/// the given path does not exist on disk.
const PRESETS: [(&str, &str); 4] = [
    (
        "lorenz-fig123",
        include_str!("../../../presets/lorenz-fig123.json"),
    ),
    (
        "kdv-evolution-fig4",
        include_str!("../../../presets/kdv-evolution-fig4.json"),
    ),
    (
        "kdv-reconstruction-fig678",
        include_str!("../../../presets/kdv-reconstruction-fig678.json"),
    ),
    (
        "kdv-spectrum-fig5-9",
        include_str!("../../../presets/kdv-spectrum-fig5-9.json"),
    ),
];

#[derive(Parser)]
#[command(
    name = "phaselens",
    version,
    about = "Simulate Lorenz/KdV dynamics and reconstruct reduced phase spaces via covariance PCA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a system and emit its raw output as CSV
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Hankel-embed a scalar series CSV into a trajectory-matrix CSV
    Embed(EmbedArgs),
    /// Singular spectrum and principal components of a matrix CSV
    Pca(PcaArgs),
    /// Run a full experiment from a JSON config file or named preset
    Run(RunArgs),
    /// Inspect the built-in preset configurations
    #[command(subcommand)]
    Presets(PresetsCommand),
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Integrate the Lorenz equations (sigma=10, r=28, b=8/3 from (0,1,0))
    Lorenz(SimulateLorenzArgs),
    /// Run the pseudo-spectral KdV soliton simulation
    Kdv(SimulateKdvArgs),
}

#[derive(Args)]
struct SimulateLorenzArgs {
    /// Integration step size
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Number of RK4 steps
    #[arg(long, default_value_t = 5000)]
    steps: usize,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateKdvArgs {
    /// Fourier collocation points (power of two)
    #[arg(long, default_value_t = 128)]
    grid: usize,
    /// Soliton velocity
    #[arg(long, default_value_t = 16.0)]
    velocity: f64,
    /// Time step (default: the stability bound 0.4/N^2)
    #[arg(long)]
    dt: Option<f64>,
    /// Iteration count (default: 1000, or 256 for N=16)
    #[arg(long)]
    steps: Option<usize>,
    /// Domain half-length l, domain is [-l, l] (default: pi)
    #[arg(long = "half-length")]
    half_length: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    /// Series CSV; the first column not named `t` is embedded
    #[arg(long)]
    input: PathBuf,
    /// Window length L, constrained to 2 <= L <= N/2
    #[arg(long)]
    window: usize,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PcaArgs {
    /// Matrix CSV with a header row; rows are observations
    #[arg(long)]
    input: PathBuf,
    /// Keep exactly k components
    #[arg(long)]
    k: Option<usize>,
    /// Keep the smallest k whose singular-value mass reaches this fraction
    #[arg(long)]
    energy: Option<f64>,
    /// Skip mean-centering when forming the covariance
    #[arg(long = "no-center")]
    no_center: bool,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Path to a config JSON, or the name of a built-in preset
    config: String,
    /// Output root (overrides config `out` and PHASELENS_OUT)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the portrait window (Lorenz)
    #[arg(long)]
    window: Option<usize>,
    /// Override the component count
    #[arg(long)]
    k: Option<usize>,
    /// Override the energy threshold
    #[arg(long)]
    energy: Option<f64>,
    /// Disable mean-centering
    #[arg(long = "no-center")]
    no_center: bool,
    /// Replace the KdV run list with a single run at this grid size
    #[arg(long)]
    grid: Option<usize>,
    /// Replace the KdV run list with a single run at this velocity
    #[arg(long)]
    velocity: Option<f64>,
    /// Override the time step for every run
    #[arg(long)]
    dt: Option<f64>,
    /// Override the step count for every run
    #[arg(long)]
    steps: Option<usize>,
    /// Override the KdV domain half-length
    #[arg(long = "half-length")]
    half_length: Option<f64>,
    /// Override the KdV snapshot stride
    #[arg(long)]
    stride: Option<usize>,
    /// Override the KdV snapshot row count
    #[arg(long)]
    rows: Option<usize>,
}

#[derive(Subcommand)]
enum PresetsCommand {
    /// List the built-in presets
    List,
}

enum CliError {
    Usage(String),
    Pipeline(PipelineError),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Pipeline(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };

    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Pipeline(e)) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(SimulateCommand::Lorenz(args)) => simulate_lorenz(args),
        Command::Simulate(SimulateCommand::Kdv(args)) => simulate_kdv_cmd(args),
        Command::Embed(args) => embed_cmd(args),
        Command::Pca(args) => pca_cmd(args),
        Command::Run(args) => run_cmd(args),
        Command::Presets(PresetsCommand::List) => {
            for (name, text) in PRESETS {
                let cfg = ExperimentConfig::from_json(text, Path::new(name))
                    .expect("embedded presets are valid");
                let detail = match cfg.system {
                    SystemKind::Lorenz => format!(
                        "lorenz, windows {:?}, k={}",
                        cfg.windows(),
                        cfg.pca.k.unwrap_or_default()
                    ),
                    SystemKind::Kdv => {
                        let runs = cfg.runs.as_ref().map(Vec::len).unwrap_or(0);
                        format!("kdv, {runs} runs, k={}", cfg.pca.k.unwrap_or_default())
                    }
                };
                println!("{name:<28} {detail}");
            }
            Ok(())
        }
    }
}

/// Output root: flag, then config `out`, then PHASELENS_OUT, then ./out.
fn resolve_out(flag: Option<PathBuf>, config_out: Option<&Path>) -> PathBuf {
    flag.or_else(|| config_out.map(Path::to_path_buf))
        .or_else(|| std::env::var_os("PHASELENS_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Pipeline(PipelineError::io(dir, e)))
}

fn simulate_lorenz(args: SimulateLorenzArgs) -> Result<(), CliError> {
    let out = resolve_out(args.out, None);
    ensure_dir(&out)?;
    let spec = StepSpec::new(0.0, args.dt, args.steps).map_err(PipelineError::from)?;
    let states = lorenz_trajectory(
        &LorenzParams::classic(),
        &phaselens_core::systems::LorenzState::new(0.0, 1.0, 0.0),
        &spec,
    )
    .map_err(PipelineError::from)?;
    let path = out.join("timeseries.csv");
    write_lorenz_timeseries_csv(&states, &spec, &path)?;
    println!("timeseries-csv         {}", path.display());
    Ok(())
}

fn simulate_kdv_cmd(args: SimulateKdvArgs) -> Result<(), CliError> {
    let out = resolve_out(args.out, None);
    ensure_dir(&out)?;
    let steps = args
        .steps
        .unwrap_or_else(|| KdvParams::default_steps(args.grid));
    let mut params =
        KdvParams::new(args.grid, args.velocity, steps).map_err(PipelineError::from)?;
    if let Some(dt) = args.dt {
        params = params.with_dt(dt).map_err(PipelineError::from)?;
    }
    if let Some(l) = args.half_length {
        params = params.with_half_length(l).map_err(PipelineError::from)?;
    }
    let field = simulate_kdv(&params).map_err(PipelineError::from)?;
    let field_path = out.join("field.csv");
    write_field_csv(&field, &field_path)?;
    let grid_path = out.join("grid.csv");
    write_grid_csv(&field, &grid_path)?;
    println!("field-csv              {}", field_path.display());
    println!("grid-csv               {}", grid_path.display());
    Ok(())
}

fn embed_cmd(args: EmbedArgs) -> Result<(), CliError> {
    let out = resolve_out(args.out, None);
    ensure_dir(&out)?;
    let series = read_series_csv(&args.input)?;
    let traj = hankel_embed(&series, args.window).map_err(PipelineError::from)?;
    // Rows of the emitted file are the lagged window vectors, ready to be
    // consumed as observations by `pca`.
    let obs = traj.observations();
    let path = out.join("trajectory.csv");
    write_matrix_csv(&obs, "w", &path)?;
    println!("embedding-csv          {}", path.display());
    Ok(())
}

fn pca_cmd(args: PcaArgs) -> Result<(), CliError> {
    let rule = match (args.k, args.energy) {
        (Some(k), None) => SelectionRule::FixedCount(k),
        (None, Some(e)) => SelectionRule::EnergyThreshold(e),
        _ => return Err(CliError::Usage("set exactly one of --k or --energy".into())),
    };
    let out = resolve_out(args.out, None);
    ensure_dir(&out)?;

    let (_, matrix) = read_matrix_csv(&args.input)?;
    let cov = covariance(&matrix, !args.no_center).map_err(PipelineError::from)?;
    let decomposition = svd(cov.matrix()).map_err(PipelineError::from)?;
    let spectrum = normalized_spectrum(&decomposition).map_err(PipelineError::from)?;

    let spectrum_path = out.join("spectrum.csv");
    let mut table = Table::new(vec!["index", "sigma", "normalized"]);
    for (i, (&sigma, &norm)) in decomposition
        .singular_values()
        .iter()
        .zip(&spectrum)
        .enumerate()
    {
        table.push_row(vec![
            Cell::Int((i + 1) as i64),
            Cell::Real(sigma),
            Cell::Real(norm),
        ]);
    }
    emit_csv(&table, &spectrum_path)?;

    let projection = select_components(&decomposition, rule).map_err(PipelineError::from)?;
    let reduced = project(&matrix, &projection, "c").map_err(PipelineError::from)?;
    let components_path = out.join("components.csv");
    let mut table = Table::new(reduced.names().to_vec());
    for i in 0..reduced.entries().rows() {
        table.push_row(
            reduced
                .entries()
                .row(i)
                .iter()
                .map(|&v| Cell::Real(v))
                .collect(),
        );
    }
    emit_csv(&table, &components_path)?;

    println!("spectrum-csv           {}", spectrum_path.display());
    println!("components-csv         {}", components_path.display());
    Ok(())
}

fn load_config(arg: &str) -> Result<ExperimentConfig, CliError> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(ExperimentConfig::from_file(path)?);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
    for (name, text) in PRESETS {
        if name == stem {
            return Ok(ExperimentConfig::from_json(text, Path::new(name))?);
        }
    }
    let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
    Err(CliError::Usage(format!(
        "no config file or preset named {arg:?}; presets: {}",
        names.join(", ")
    )))
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &RunArgs) -> Result<(), CliError> {
    if args.k.is_some() && args.energy.is_some() {
        return Err(CliError::Usage(
            "set either --k or --energy, not both".into(),
        ));
    }
    if let Some(k) = args.k {
        cfg.pca.k = Some(k);
        cfg.pca.energy = None;
    }
    if let Some(e) = args.energy {
        cfg.pca.energy = Some(e);
        cfg.pca.k = None;
    }
    if args.no_center {
        cfg.pca.center = false;
    }
    if let Some(w) = args.window {
        cfg.portrait_window = Some(w);
        if let Some(windows) = &mut cfg.windows {
            if !windows.contains(&w) {
                windows.push(w);
            }
        }
    }
    if let Some(l) = args.half_length {
        cfg.half_length = Some(l);
    }
    if let Some(s) = args.stride {
        cfg.stride = Some(s);
    }
    if let Some(r) = args.rows {
        cfg.rows = Some(r);
    }

    match cfg.system {
        SystemKind::Lorenz => {
            if args.grid.is_some() || args.velocity.is_some() {
                return Err(CliError::Usage(
                    "--grid/--velocity apply only to kdv configs".into(),
                ));
            }
            if args.dt.is_some() || args.steps.is_some() {
                let mut lz = cfg.lorenz();
                if let Some(dt) = args.dt {
                    lz.dt = dt;
                }
                if let Some(steps) = args.steps {
                    lz.steps = steps;
                }
                cfg.lorenz = Some(lz);
            }
        }
        SystemKind::Kdv => {
            if args.grid.is_some() || args.velocity.is_some() {
                let first = cfg
                    .runs
                    .as_ref()
                    .and_then(|r| r.first())
                    .cloned()
                    .ok_or_else(|| CliError::Usage("config has no runs to override".into()))?;
                cfg.runs = Some(vec![phaselens_pipeline::KdvRunConfig {
                    grid: args.grid.unwrap_or(first.grid),
                    velocity: args.velocity.unwrap_or(first.velocity),
                    dt: first.dt,
                    steps: first.steps,
                }]);
            }
            if args.dt.is_some() || args.steps.is_some() {
                if let Some(runs) = &mut cfg.runs {
                    for run in runs {
                        if let Some(dt) = args.dt {
                            run.dt = Some(dt);
                        }
                        if let Some(steps) = args.steps {
                            run.steps = Some(steps);
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn run_cmd(args: RunArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.config)?;
    apply_overrides(&mut cfg, &args)?;
    cfg.validate().map_err(CliError::from)?;

    let out_root = resolve_out(args.out.clone(), cfg.out.as_deref());
    ensure_dir(&out_root)?;
    let artifacts = run_experiment(&cfg, &out_root)?;
    for entry in artifacts.entries() {
        println!("{:<22} {}", entry.kind.label(), entry.path.display());
    }
    println!(
        "{} artifacts under {}",
        artifacts.entries().len(),
        out_root.join(&cfg.experiment).display()
    );
    Ok(())
}
