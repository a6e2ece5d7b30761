//! Command-line front end for the rim-fitting pipeline: fit ellipses in
//! images, score predictions against ground truth, and render synthetic
//! scenes.

mod eval;
mod fit;
mod overlay;
mod synth;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rimfit_core::config::{load_config, Config, ConfigError};
use rimfit_core::eval::EvalError;
use rimfit_core::synth::SynthError;

/// Rim ellipse fitting for plates and bowls.
#[derive(Parser, Debug)]
#[command(name = "rimfit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit rim ellipses in images and write per-image prediction files.
    Fit(FitArgs),
    /// Score prediction files against a ground-truth annotation file.
    Eval(EvalArgs),
    /// Render synthetic scenes with ground-truth and detection sidecars.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    /// PNG image, or a directory whose *.png files are all processed.
    images: PathBuf,

    /// Directory holding per-image `<stem>.det.json` detection files.
    /// Defaults to each image's own directory.
    #[arg(long)]
    detections_dir: Option<PathBuf>,

    /// Run without detection boxes: geometric fitting only.
    #[arg(long)]
    no_detections: bool,

    /// Config file; overrides the RIMFIT_CONFIG environment variable.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Directory receiving `<stem>.pred.json` files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,

    /// Also write `<stem>.overlay.png` with predictions drawn in red.
    #[arg(long)]
    overlay: bool,

    /// Ground-truth file; overlays gain the annotated ellipses in green.
    #[arg(long)]
    gt: Option<PathBuf>,

    /// Fail on a missing detection file or unreadable image instead of
    /// skipping the image with a warning.
    #[arg(long)]
    strict: bool,

    /// Worker threads. Defaults to one per core.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Directory of `*.pred.json` prediction files.
    #[arg(long)]
    preds_dir: PathBuf,

    /// Ground-truth annotation file.
    #[arg(long)]
    gt: PathBuf,

    /// Matching protocol to report.
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    method: MethodArg,

    /// Config file; overrides the RIMFIT_CONFIG environment variable.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    A,
    B,
    Both,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Scene-set file: a JSON list of scene specs.
    spec: PathBuf,

    /// Directory receiving rasters and sidecars.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads. Defaults to one per core.
    #[arg(long)]
    jobs: Option<usize>,
}

/// Anything that stops a command, carrying the process exit code: 1 for
/// I/O and config problems, 2 for data problems promoted by --strict.
#[derive(Debug)]
enum CliError {
    Io { path: PathBuf, source: std::io::Error },
    Image { path: PathBuf, source: image::ImageError },
    Config(ConfigError),
    Eval(EvalError),
    Synth(SynthError),
    Threads(rayon::ThreadPoolBuildError),
    Strict(String),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Strict(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Image { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Config(e) => write!(f, "config: {e}"),
            CliError::Eval(e) => write!(f, "{e}"),
            CliError::Synth(e) => write!(f, "{e}"),
            CliError::Threads(e) => write!(f, "worker pool: {e}"),
            CliError::Strict(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Io { source, .. } => Some(source),
            CliError::Image { source, .. } => Some(source),
            CliError::Config(e) => Some(e),
            CliError::Eval(e) => Some(e),
            CliError::Synth(e) => Some(e),
            CliError::Threads(e) => Some(e),
            CliError::Strict(_) => None,
        }
    }
}

/// Loads the config named by --config, then by RIMFIT_CONFIG, then the
/// built-in defaults.
fn resolve_config(flag: Option<&Path>) -> Result<Config, CliError> {
    let path = flag
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os("RIMFIT_CONFIG").map(PathBuf::from));
    match path {
        Some(p) => load_config(&p).map_err(CliError::Config),
        None => Ok(Config::default()),
    }
}

/// Runs `f` inside a worker pool sized by --jobs; `None` keeps one thread
/// per core.
fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(CliError::Threads)?;
    Ok(pool.install(f))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let outcome = match cli.command {
        Command::Fit(args) => fit::run(&args),
        Command::Eval(args) => eval::run(&args),
        Command::Synth(args) => synth::run(&args),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
