use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pointerlab::lab::{self, Experiment, ExperimentConfig, Format, LabError, Timing};

/// Pointer-state and decoherence experiments with reproducible CSV/JSON output.
#[derive(Parser)]
#[command(name = "pointerlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvectors of the dephased uniform density on a ring.
    CirculantSpectrum(CommonArgs),
    /// Effective rank of Gaussian pointer-state frames.
    FrameRank(CommonArgs),
    /// Localization of the two-well record eigenvectors versus asymmetry b.
    DoubleWellSweep(CommonArgs),
    /// Parity of the three-site chain eigenvectors versus asymmetry epsilon.
    NearSymmetrySweep(CommonArgs),
    /// Parity counts of random reflection-symmetric matrices.
    ParityCensus(CommonArgs),
    /// Numerical versus closed-form three-site eigenpairs.
    OracleCheck(CommonArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment parameter as key=value (repeatable); see --list-params.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,

    /// Seed for randomized experiments.
    #[arg(long, env = "POINTERLAB_SEED", default_value_t = 1)]
    seed: u64,

    /// Overwrite an existing output file.
    #[arg(long)]
    force: bool,

    /// Run the experiment's built-in assertions; exit 1 if any fails.
    #[arg(long)]
    check: bool,

    /// Print the experiment's parameters, defaults and ranges, then exit.
    #[arg(long)]
    list_params: bool,
}

impl Command {
    fn split(self) -> (Experiment, CommonArgs) {
        match self {
            Command::CirculantSpectrum(a) => (Experiment::CirculantSpectrum, a),
            Command::FrameRank(a) => (Experiment::FrameRank, a),
            Command::DoubleWellSweep(a) => (Experiment::DoubleWellSweep, a),
            Command::NearSymmetrySweep(a) => (Experiment::NearSymmetrySweep, a),
            Command::ParityCensus(a) => (Experiment::ParityCensus, a),
            Command::OracleCheck(a) => (Experiment::OracleCheck, a),
        }
    }
}

fn list_params(experiment: Experiment) {
    println!("parameters for {experiment}:");
    for spec in experiment.params() {
        println!(
            "  {:<16} default {:<24} {} ({})",
            spec.key,
            spec.default,
            spec.help,
            spec.range_description()
        );
    }
}

fn execute(experiment: Experiment, args: CommonArgs) -> Result<bool, LabError> {
    let overrides = args
        .params
        .iter()
        .map(|raw| ExperimentConfig::parse_assignment(raw))
        .collect::<Result<Vec<_>, _>>()?;
    let format = match args.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let config = ExperimentConfig::new(experiment, &overrides, args.seed, args.out, format)?;
    if let Some(path) = &config.output_path {
        if path.exists() && !args.force {
            return Err(LabError::Refused(path.clone()));
        }
    }

    let started = Instant::now();
    let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let mut result = lab::run(&config)?;
    result.metadata.timing = Some(Timing { timestamp, wall_time_seconds: started.elapsed().as_secs_f64() });
    lab::emit(&result, &config, args.force)?;

    if !args.check {
        return Ok(true);
    }
    let outcomes = lab::self_check(&result);
    for c in &outcomes {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(outcomes.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = cli.command.split();
    if args.list_params {
        list_params(experiment);
        return ExitCode::SUCCESS;
    }
    match execute(experiment, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("pointerlab: {err}");
            match err {
                LabError::Config(_) | LabError::Refused(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
