use std::path::PathBuf;
use std::process::ExitCode;

use cfcuc::cli::{self, RunConfig, LOW_SCORE};
use cfcuc::sysmodel::Mode;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cfcuc", version, about = "Continuous-time frequency-constrained unit commitment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and solve a case, then evaluate its frequency security.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Nadir model file for cfcuc.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Train the nadir model first when no model file is given.
        #[arg(long)]
        train: bool,
    },
    /// Generate a dataset and fit the nadir surrogate.
    Train {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Count minutes above each threshold for a saved schedule.
    Evaluate {
        #[arg(long)]
        case: PathBuf,
        /// Directory holding schedule.csv and schedule.json.
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "2.5")]
        thresholds: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    case: PathBuf,
    /// cuc, rocof-cuc or cfcuc (defaults to the case file's mode).
    #[arg(long)]
    mode: Option<Mode>,
    /// Hz
    #[arg(long)]
    nadir_limit: Option<f64>,
    /// highs, or external (binary from CFCUC_SOLVER_BIN).
    #[arg(long, default_value = "highs")]
    backend: String,
    /// Seconds.
    #[arg(long, default_value_t = 1800.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 1e-6)]
    gap: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset size for training.
    #[arg(long, default_value_t = cli::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl RunArgs {
    fn config(self) -> RunConfig {
        let mut c = RunConfig::new(self.case, self.out);
        c.mode = self.mode;
        c.nadir_limit_hz = self.nadir_limit;
        c.backend = self.backend;
        c.time_limit_s = self.time_limit;
        c.mip_gap = self.gap;
        c.seed = self.seed;
        c.samples = self.samples;
        c
    }
}

fn run(cli: Cli) -> cfcuc::Result<()> {
    match cli.command {
        Command::Solve { run, model, train } => {
            let mut config = run.config();
            config.model_path = model;
            config.train_on_the_fly = train;
            let outcome = cli::cmd_solve(&config)?;
            println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
        }
        Command::Train { run } => {
            let (model, path) = cli::cmd_train(&run.config())?;
            if model.score < LOW_SCORE {
                eprintln!("warning: held-out score {:.4} is below {LOW_SCORE}", model.score);
            }
            println!("{} (score {:.4})", path.display(), model.score);
        }
        Command::Evaluate {
            case,
            schedule,
            thresholds,
            out,
        } => {
            for r in cli::cmd_evaluate(schedule, case, &thresholds, out)? {
                println!("{} Hz: {} minutes above", r.threshold_hz, r.minutes_above);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
