//! The solve / train / evaluate pipeline behind the `cfcuc` binary.
//!
//! Every command writes its artifacts under the output directory:
//!
//! | command  | files |
//! |----------|-------|
//! | solve    | `model.mps`, `schedule.csv`, `schedule.json`, `nadir_minutes.csv`, `summary.json` |
//! | train    | `dataset.csv`, `nadir_model_<L>hz.json` |
//! | evaluate | `evaluation.json`, `nadir_minutes.csv` |

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::cuc::{self, Schedule};
use crate::error::{Error, Result};
use crate::freq::{self, NadirReport};
use crate::milp::{self, export_mps, SolveOptions};
use crate::nadirlearn::{self, NadirModel};
use crate::sysmodel::{self, CaseInput, Mode};

/// Threshold of the headline security metric, Hz.
pub const REPORT_THRESHOLD_HZ: f64 = 2.5;

/// Scores below this are reported as a warning by the binary.
pub const LOW_SCORE: f64 = 0.9;

pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case_path: PathBuf,
    /// Overrides the mode in the case file.
    pub mode: Option<Mode>,
    /// Overrides the nadir limit in the case file, Hz.
    pub nadir_limit_hz: Option<f64>,
    pub backend: String,
    pub time_limit_s: f64,
    pub mip_gap: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Trained surrogate for cfcuc runs.
    pub model_path: Option<PathBuf>,
    /// Train the surrogate before solving when no model file is given.
    pub train_on_the_fly: bool,
    pub samples: usize,
}

impl RunConfig {
    pub fn new(case_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        let opts = SolveOptions::default();
        Self {
            case_path: case_path.into(),
            mode: None,
            nadir_limit_hz: None,
            backend: "highs".into(),
            time_limit_s: opts.time_limit_s,
            mip_gap: opts.mip_gap,
            seed: 0,
            output_dir: output_dir.into(),
            model_path: None,
            train_on_the_fly: false,
            samples: DEFAULT_SAMPLES,
        }
    }

    /// Loads the case and applies the mode / limit overrides.
    pub fn load_case(&self) -> Result<CaseInput> {
        let mut case = sysmodel::load_case(&self.case_path)?;
        if let Some(mode) = self.mode {
            case.params.mode = mode;
        }
        if let Some(limit) = self.nadir_limit_hz {
            case.params.nadir_limit = limit;
        }
        case.validate()?;
        Ok(case)
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            time_limit_s: self.time_limit_s,
            mip_gap: self.mip_gap,
        }
    }

    fn prepare_out(&self) -> Result<&Path> {
        let out = self.output_dir.as_path();
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        Ok(out)
    }
}

/// The row written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nadir_limit_hz: Option<f64>,
    /// Rounded to two decimals.
    pub objective_keur: f64,
    pub runtime_s: f64,
    pub minutes_above_2p5hz: usize,
    /// Minutes above the case's own nadir limit.
    pub minutes_above_limit: usize,
    pub worst_nadir_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    pub status: milp::SolveStatus,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub summary: SolveSummary,
    pub schedule: Schedule,
    pub sweep: freq::NadirSweep,
}

fn write(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

fn model_file_name(threshold: f64) -> String {
    format!("nadir_model_{threshold}hz.json")
}

/// Solves one case end to end and writes its artifacts.
pub fn cmd_solve(config: &RunConfig) -> Result<SolveOutcome> {
    let out = config.prepare_out()?;
    let case = config.load_case()?;
    let mode = case.params.mode;
    let surrogate = if mode.has_nadir() {
        Some(match (&config.model_path, config.train_on_the_fly) {
            (Some(path), _) => NadirModel::load(path)?,
            (None, true) => train(&case, config.samples, config.seed)?.0,
            (None, false) => {
                return Err(Error::validation(
                    "config",
                    "model_path",
                    "cfcuc needs a nadir model file or the train-on-the-fly flag",
                ))
            }
        })
    } else {
        None
    };
    outcome_for(&case, surrogate.as_ref(), config, out)
}

/// Solves an already-loaded case; shared by [`cmd_solve`] and the examples.
pub fn solve_case(
    case: &CaseInput,
    surrogate: Option<&NadirModel>,
    config: &RunConfig,
) -> Result<SolveOutcome> {
    let out = config.prepare_out()?;
    outcome_for(case, surrogate, config, out)
}

fn outcome_for(case: &CaseInput, surrogate: Option<&NadirModel>, config: &RunConfig, out: &Path) -> Result<SolveOutcome> {
    let started = Instant::now();
    let mode = case.params.mode;
    let profiles = sysmodel::approximate_profiles(case)?;
    let (model, vars) = cuc::assemble(case, &profiles, mode, surrogate)?;
    write(out.join("model.mps"), &export_mps(&model))?;
    let backend = milp::backend_by_name(&config.backend)?;
    let schedule = cuc::solve_schedule(&model, &vars, case, backend.as_ref(), &config.solve_options())?;
    let runtime_s = started.elapsed().as_secs_f64();
    schedule.save(out)?;
    let sweep = freq::nadir_sweep(&schedule, &profiles, case)?;
    sweep.write_csv(out.join("nadir_minutes.csv"))?;
    let worst = sweep.worst();
    let summary = SolveSummary {
        mode,
        nadir_limit_hz: mode.has_nadir().then_some(case.params.nadir_limit),
        objective_keur: (schedule.objective / 1000.0 * 100.0).round() / 100.0,
        runtime_s,
        minutes_above_2p5hz: sweep.minutes_above(REPORT_THRESHOLD_HZ),
        minutes_above_limit: sweep.minutes_above(case.params.nadir_limit),
        worst_nadir_hz: worst.is_finite().then_some(worst),
        score: surrogate.map(|m| m.score),
        status: schedule.status,
    };
    write(out.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    Ok(SolveOutcome {
        summary,
        schedule,
        sweep,
    })
}

fn train(case: &CaseInput, samples: usize, seed: u64) -> Result<(NadirModel, Vec<nadirlearn::SamplePoint>)> {
    let data = nadirlearn::generate_dataset(case, samples, seed)?;
    let model = nadirlearn::fit_linear(&data, case.params.nadir_limit, seed)?;
    Ok((model, data))
}

/// Generates a dataset, fits the surrogate at the case's nadir limit and
/// writes both. Returns the model and the path of its file.
pub fn cmd_train(config: &RunConfig) -> Result<(NadirModel, PathBuf)> {
    let out = config.prepare_out()?;
    let case = config.load_case()?;
    let (model, data) = train(&case, config.samples, config.seed)?;
    nadirlearn::write_dataset_csv(out.join("dataset.csv"), &data)?;
    let path = out.join(model_file_name(model.threshold));
    model.save(&path)?;
    Ok((model, path))
}

/// Re-evaluates a saved schedule against the exact nadir at several thresholds.
pub fn cmd_evaluate(
    schedule_dir: impl AsRef<Path>,
    case_path: impl AsRef<Path>,
    thresholds: &[f64],
    output_dir: impl AsRef<Path>,
) -> Result<Vec<NadirReport>> {
    let out = output_dir.as_ref();
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let case = sysmodel::load_case(case_path)?;
    case.validate()?;
    let schedule = Schedule::load(schedule_dir, &case)?;
    let profiles = sysmodel::approximate_profiles(&case)?;
    let sweep = freq::nadir_sweep(&schedule, &profiles, &case)?;
    let reports: Vec<NadirReport> = thresholds.iter().map(|&t| sweep.report(t)).collect();
    write(out.join("evaluation.json"), &serde_json::to_string_pretty(&reports)?)?;
    sweep.write_csv(out.join("nadir_minutes.csv"))?;
    Ok(reports)
}
