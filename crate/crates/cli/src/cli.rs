use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use repcnot_core::{Basis, CodeSpec, DetectorOrdering};

use crate::commands::{self, Format, SweepConfig};
use crate::config::{
    parse_bases, parse_list, parse_orderings, parse_state, CalibrationSource, RunConfig,
};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "repcnot",
    version,
    about = "Simulate, decode and analyse a transversal CNOT between repetition codes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the qubit layout as JSON.
    Layout {
        #[arg(long = "d")]
        distance: usize,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a calibration table and report broken edges on the layout.
    Validate {
        #[arg(long = "d", default_value_t = 3)]
        distance: usize,
        #[command(flatten)]
        calib: CalibArgs,
    },
    /// Run one experiment end to end and write all artifacts.
    Run(RunArgs),
    /// Run every (d, rounds, basis, state) combination.
    Sweep(SweepArgs),
    /// Export the decoding graph.
    Graph {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        calib: CalibArgs,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pairwise detector error probabilities from a detection file.
    Corr {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "space")]
        ordering: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-detector firing probabilities from a detection file.
    Detprob {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Combine run results into logical error rates with aggregates.
    Lograte {
        /// Run directories, or directories containing them.
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Args)]
pub struct CalibArgs {
    /// Calibration JSON file.
    #[arg(long, conflicts_with = "device")]
    calib: Option<PathBuf>,
    /// Bundled median table: sherbrooke, brisbane, torino or fakewashington.
    #[arg(long)]
    device: Option<String>,
    /// JSON physical map placing the layout on device qubits.
    #[arg(long)]
    map: Option<PathBuf>,
}

impl CalibArgs {
    fn source(&self) -> CalibrationSource {
        match (&self.calib, &self.device) {
            (Some(path), _) => CalibrationSource::File(path.clone()),
            (None, Some(dev)) => CalibrationSource::Device(dev.clone()),
            (None, None) => CalibrationSource::Device("sherbrooke".into()),
        }
    }
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    #[arg(long = "d")]
    distance: usize,
    #[arg(long)]
    rounds: usize,
    /// Optional check on the basis of `--state`.
    #[arg(long)]
    basis: Option<String>,
    /// Initial logical state: 00, 01, 10, 11, ++, +-, -+ or --.
    #[arg(long, allow_hyphen_values = true)]
    state: String,
}

impl SpecArgs {
    fn spec(&self) -> Result<CodeSpec> {
        let basis = self.basis.as_deref().map(str::parse::<Basis>).transpose()?;
        Ok(CodeSpec::new(
            self.distance,
            self.rounds,
            parse_state(&self.state, basis)?,
        )?)
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Re-run the config stored in a manifest or config file.
    #[arg(long, conflicts_with_all = ["distance", "rounds", "state"])]
    config: Option<PathBuf>,
    #[arg(long = "d")]
    distance: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    basis: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    #[command(flatten)]
    calib: CalibArgs,
    #[arg(long, default_value_t = 100_000)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Correlation orderings to export: space, time or both.
    #[arg(long, default_value = "space,time")]
    orderings: String,
    /// Also write detections.csv.
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: PathBuf,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        if let Some(path) = &self.config {
            return read_config(path);
        }
        let missing =
            |what: &str| CliError::Validation(format!("--{what} is required without --config"));
        let basis = self.basis.as_deref().map(str::parse::<Basis>).transpose()?;
        Ok(RunConfig {
            distance: self.distance.ok_or_else(|| missing("d"))?,
            rounds: self.rounds.ok_or_else(|| missing("rounds"))?,
            state: parse_state(
                self.state.as_deref().ok_or_else(|| missing("state"))?,
                basis,
            )?,
            calibration: self.calib.source(),
            physical_map: self.calib.map.clone(),
            shots: self.shots,
            seed: self.seed,
            orderings: parse_orderings(&self.orderings)?,
            detections_csv: self.csv,
        })
    }
}

/// Reads a bare config or the config inside a manifest.
fn read_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let inner = value.get("config").cloned().unwrap_or(value);
    serde_json::from_value(inner)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Distances, e.g. `3,5,7`.
    #[arg(long = "d")]
    distances: String,
    /// Rounds per side, e.g. `1..5` or `1,3,5`.
    #[arg(long)]
    rounds: String,
    #[arg(long, default_value = "z,x")]
    basis: String,
    #[command(flatten)]
    calib: CalibArgs,
    #[arg(long, default_value_t = 100_000)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "space,time")]
    orderings: String,
    #[arg(long)]
    csv: bool,
    /// Concurrent runs.
    #[arg(long, env = "REPCNOT_JOBS", default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: PathBuf,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value).map_err(repcnot_core::Error::from)? + "\n")
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Layout { distance, map, out } => emit(
            out.as_deref(),
            &(commands::layout(distance, map.as_deref())?.to_json()? + "\n"),
        ),
        Command::Validate { distance, calib } => {
            let report = commands::validate(distance, &calib.source(), calib.map.as_deref())?;
            emit(None, &json(&report)?)
        }
        Command::Run(args) => {
            let manifest = commands::run(&args.config()?, &args.out)?;
            eprintln!(
                "wrote {} artifacts to {}",
                manifest.outputs.len(),
                args.out.display()
            );
            Ok(())
        }
        Command::Sweep(args) => {
            let config = SweepConfig {
                distances: parse_list(&args.distances)?,
                rounds: parse_list(&args.rounds)?,
                bases: parse_bases(&args.basis)?,
                calibration: args.calib.source(),
                physical_map: args.calib.map.clone(),
                shots: args.shots,
                seed: args.seed,
                orderings: parse_orderings(&args.orderings)?,
                detections_csv: args.csv,
            };
            let rows = commands::sweep(&config, &args.out, args.jobs)?;
            eprintln!("{} runs written to {}", rows.len(), args.out.display());
            Ok(())
        }
        Command::Graph {
            spec,
            calib,
            format,
            out,
        } => emit(
            out.as_deref(),
            &commands::graph(
                &spec.spec()?,
                &calib.source(),
                calib.map.as_deref(),
                format.into(),
            )?,
        ),
        Command::Corr {
            input,
            ordering,
            format,
            out,
        } => {
            let ordering: DetectorOrdering = ordering.parse()?;
            emit(
                out.as_deref(),
                &commands::corr(&input, ordering, format.into())?,
            )
        }
        Command::Detprob { input, format, out } => {
            emit(out.as_deref(), &commands::detprob(&input, format.into())?)
        }
        Command::Lograte { dirs, format, out } => {
            let rows = commands::lograte(&dirs)?;
            emit(
                out.as_deref(),
                &commands::lograte_output(&rows, format.into())?,
            )
        }
    }
}

/// Parses arguments and runs the command, returning the process exit code.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
