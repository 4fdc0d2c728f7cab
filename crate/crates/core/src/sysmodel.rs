//! Case data: system parameters, the thermal fleet, sampled demand and RES.
//!
//! A case file is one JSON document. Profiles are either inline
//! (`{"resolution_minutes": 5, "values_mw": [...]}`) or point at a CSV file
//! with header `minute,value_mw` (`{"csv": "demand.csv"}`, relative to the
//! case file). See `data/case_schema.md` for the full layout.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bernstein::{basis_eval, PiecewiseBernstein, WORKING_DEGREE};
use crate::error::{Error, Result};

/// Which frequency constraints the scheduling model carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Plain continuous-time UC.
    Cuc,
    /// Adds RoCoF and quasi-steady-state constraints.
    RocofCuc,
    /// Adds the learned nadir constraint on top of `RocofCuc`.
    Cfcuc,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Cuc => "cuc",
            Mode::RocofCuc => "rocof-cuc",
            Mode::Cfcuc => "cfcuc",
        }
    }

    pub fn has_rocof(self) -> bool {
        !matches!(self, Mode::Cuc)
    }

    pub fn has_nadir(self) -> bool {
        matches!(self, Mode::Cfcuc)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cuc" => Ok(Mode::Cuc),
            "rocof-cuc" => Ok(Mode::RocofCuc),
            "cfcuc" => Ok(Mode::Cfcuc),
            other => Err(Error::Domain(format!(
                "unknown mode `{other}` (expected cuc, rocof-cuc or cfcuc)"
            ))),
        }
    }
}

/// Commitment state at the start of the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialStatus {
    pub online: bool,
    /// Hours already spent in that state.
    pub hours: u32,
    /// Output at the first instant of the horizon. `None` leaves it free.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_mw: Option<f64>,
    /// Slope at the first instant (MW/h). `None` leaves it free.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_mw_per_h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSpec {
    pub id: String,
    /// MW
    pub p_min: f64,
    /// MW
    pub p_max: f64,
    /// MW/h
    pub ramp_up: f64,
    /// MW/h, stored positive.
    pub ramp_down: f64,
    /// hours
    pub min_up: u32,
    /// hours
    pub min_down: u32,
    /// Startup trajectory length, hours.
    pub su_duration: u32,
    /// Shutdown trajectory length, hours.
    pub sd_duration: u32,
    /// Inertia constant, seconds.
    pub inertia: f64,
    /// MVA
    pub base_power: f64,
    /// EUR/MWh
    pub marginal_cost: f64,
    /// EUR/h while committed.
    pub no_load_cost: f64,
    /// EUR per startup.
    pub startup_cost: f64,
    pub initial_status: InitialStatus,
}

impl UnitSpec {
    /// Kinetic energy contribution `H * M` in MW·s.
    pub fn stored_energy(&self) -> f64 {
        self.inertia * self.base_power
    }

    pub fn validate(&self) -> Result<()> {
        let entity = format!("unit `{}`", self.id);
        let err = |field: &str, msg: String| Err(Error::validation(&entity, field, msg));
        if !valid_name(&self.id) {
            return err("id", "must be non-empty ASCII without whitespace".into());
        }
        let finite = [
            ("p_min", self.p_min),
            ("p_max", self.p_max),
            ("ramp_up", self.ramp_up),
            ("ramp_down", self.ramp_down),
            ("inertia", self.inertia),
            ("base_power", self.base_power),
            ("marginal_cost", self.marginal_cost),
            ("no_load_cost", self.no_load_cost),
            ("startup_cost", self.startup_cost),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return err(field, format!("is not finite ({v})"));
            }
        }
        if self.p_min <= 0.0 {
            return err("p_min", format!("must be > 0 (got {})", self.p_min));
        }
        if self.p_min > self.p_max {
            return err(
                "p_min",
                format!("{} exceeds p_max {}", self.p_min, self.p_max),
            );
        }
        if self.ramp_up <= 0.0 {
            return err("ramp_up", format!("must be > 0 (got {})", self.ramp_up));
        }
        if self.ramp_down <= 0.0 {
            return err("ramp_down", format!("must be > 0 (got {})", self.ramp_down));
        }
        if self.min_up < 1 {
            return err("min_up", "must be at least 1 hour".into());
        }
        if self.su_duration < 1 {
            return err("su_duration", "must be at least 1 hour".into());
        }
        if self.sd_duration < 1 {
            return err("sd_duration", "must be at least 1 hour".into());
        }
        if self.min_down < self.su_duration + self.sd_duration {
            return err(
                "min_down",
                format!(
                    "{} is shorter than su_duration + sd_duration = {}",
                    self.min_down,
                    self.su_duration + self.sd_duration
                ),
            );
        }
        if self.inertia < 0.0 {
            return err("inertia", "must be >= 0".into());
        }
        if self.base_power < 0.0 {
            return err("base_power", "must be >= 0".into());
        }
        for (field, v) in [
            ("marginal_cost", self.marginal_cost),
            ("no_load_cost", self.no_load_cost),
            ("startup_cost", self.startup_cost),
        ] {
            if v < 0.0 {
                return err(field, format!("must be >= 0 (got {v})"));
            }
        }
        let init = &self.initial_status;
        if let Some(p0) = init.output_mw {
            if !init.online && p0 != 0.0 {
                return err("initial_status.output_mw", "must be 0 for an offline unit".into());
            }
            if init.online && !(self.p_min..=self.p_max).contains(&p0) {
                return err(
                    "initial_status.output_mw",
                    format!("{p0} outside [p_min, p_max]"),
                );
            }
        }
        if let Some(r0) = init.ramp_mw_per_h {
            if !init.online && r0 != 0.0 {
                return err("initial_status.ramp_mw_per_h", "must be 0 for an offline unit".into());
            }
            if !(-self.ramp_down..=self.ramp_up).contains(&r0) {
                return err("initial_status.ramp_mw_per_h", format!("{r0} exceeds ramp limits"));
            }
        }
        Ok(())
    }
}

pub(crate) fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.len() <= 64 && s.chars().all(|c| c.is_ascii_graphic())
}

fn default_f0() -> f64 {
    50.0
}
fn default_damping() -> f64 {
    0.01
}
fn default_t_g() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Nominal frequency, Hz.
    #[serde(default = "default_f0")]
    pub f0: f64,
    /// Load damping factor D.
    #[serde(default = "default_damping")]
    pub damping: f64,
    /// Reserve delivery time, seconds.
    #[serde(default = "default_t_g")]
    pub t_g: f64,
    /// Hz/s
    pub rocof_limit: f64,
    /// Hz
    pub qss_limit: f64,
    /// Hz
    pub nadir_limit: f64,
    pub mode: Mode,
    /// EUR/MWh charged on curtailed RES energy.
    #[serde(default)]
    pub curtailment_penalty: f64,
    /// Caps each reserve coefficient at `ramp_up * t_g / 3600`.
    #[serde(default)]
    pub reserve_deliverability_cap: bool,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let err = |field: &str, msg: String| Err(Error::validation("params", field, msg));
        for (field, v) in [
            ("f0", self.f0),
            ("t_g", self.t_g),
            ("rocof_limit", self.rocof_limit),
            ("qss_limit", self.qss_limit),
            ("nadir_limit", self.nadir_limit),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return err(field, format!("must be finite and > 0 (got {v})"));
            }
        }
        if !(0.0..=1.0).contains(&self.damping) {
            return err("damping", format!("must lie in [0, 1] (got {})", self.damping));
        }
        if !(self.curtailment_penalty.is_finite() && self.curtailment_penalty >= 0.0) {
            return err("curtailment_penalty", "must be finite and >= 0".into());
        }
        Ok(())
    }
}

/// Uniformly sampled profile starting at minute 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub resolution_minutes: u32,
    pub values_mw: Vec<f64>,
}

impl TimeSeries {
    pub fn samples_per_hour(&self) -> usize {
        (60 / self.resolution_minutes.max(1)) as usize
    }

    pub fn min(&self) -> f64 {
        self.values_mw.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values_mw.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseInput {
    #[serde(default)]
    pub name: String,
    pub params: SystemParams,
    pub units: Vec<UnitSpec>,
    pub demand_samples: TimeSeries,
    pub res_samples: TimeSeries,
    /// Hours.
    pub horizon: usize,
}

impl CaseInput {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.horizon == 0 {
            return Err(Error::validation("case", "horizon", "must be at least 1 hour"));
        }
        if self.units.is_empty() {
            return Err(Error::validation("case", "units", "must list at least one unit"));
        }
        for (k, u) in self.units.iter().enumerate() {
            u.validate()?;
            if self.units[..k].iter().any(|o| o.id == u.id) {
                return Err(Error::validation(
                    format!("unit `{}`", u.id),
                    "id",
                    "is duplicated",
                ));
            }
        }
        for (field, ts, positive) in [
            ("demand_samples", &self.demand_samples, true),
            ("res_samples", &self.res_samples, false),
        ] {
            let res = ts.resolution_minutes;
            if res == 0 || 60 % res != 0 {
                return Err(Error::validation(
                    "case",
                    field,
                    format!("resolution {res} min does not divide an hour"),
                ));
            }
            if ts.samples_per_hour() < 4 {
                return Err(Error::validation(
                    "case",
                    field,
                    format!("needs at least 4 samples per hour (resolution {res} min)"),
                ));
            }
            let expected = self.horizon * ts.samples_per_hour();
            if ts.values_mw.len() != expected {
                return Err(Error::validation(
                    "case",
                    field,
                    format!(
                        "has {} samples, horizon of {} h needs {expected}",
                        ts.values_mw.len(),
                        self.horizon
                    ),
                ));
            }
            for (k, v) in ts.values_mw.iter().enumerate() {
                let ok = v.is_finite() && if positive { *v > 0.0 } else { *v >= 0.0 };
                if !ok {
                    let rule = if positive { "> 0" } else { ">= 0" };
                    return Err(Error::validation(
                        "case",
                        field,
                        format!("sample {k} = {v} must be {rule}"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn unit_index(&self, id: &str) -> Option<usize> {
        self.units.iter().position(|u| u.id == id)
    }

    /// Canonical JSON (inline profiles).
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProfileSource {
    Inline(TimeSeries),
    Csv { csv: PathBuf },
}

#[derive(Deserialize)]
struct CaseFile {
    #[serde(default)]
    name: String,
    params: SystemParams,
    units: Vec<UnitSpec>,
    demand_samples: ProfileSource,
    res_samples: ProfileSource,
    horizon: usize,
}

/// Reads and validates a case file.
pub fn load_case(path: impl AsRef<Path>) -> Result<CaseInput> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_case(&text, path, base)
}

/// Parses case JSON; CSV profile paths resolve against `base`.
pub fn parse_case(text: &str, origin: &Path, base: &Path) -> Result<CaseInput> {
    let file: CaseFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let resolve = |src: ProfileSource| -> Result<TimeSeries> {
        match src {
            ProfileSource::Inline(ts) => Ok(ts),
            ProfileSource::Csv { csv } => read_profile_csv(base.join(csv)),
        }
    };
    let case = CaseInput {
        name: file.name,
        params: file.params,
        units: file.units,
        demand_samples: resolve(file.demand_samples)?,
        res_samples: resolve(file.res_samples)?,
        horizon: file.horizon,
    };
    case.validate()?;
    Ok(case)
}

#[derive(Deserialize, Serialize)]
struct ProfileRow {
    minute: u32,
    value_mw: f64,
}

/// Reads a `minute,value_mw` CSV. Minutes must start at 0 and be evenly spaced.
pub fn read_profile_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            column: 0,
            message: format!("{other:?}"),
        },
    })?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["minute", "value_mw"] {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            column: 1,
            message: "expected header `minute,value_mw`".into(),
        });
    }
    let mut rows = Vec::new();
    for rec in reader.deserialize::<ProfileRow>() {
        let row = rec.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            column: 0,
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column: 1,
        message,
    };
    if rows.len() < 2 {
        return Err(parse_err(2, "profile needs at least two rows".into()));
    }
    if rows[0].minute != 0 {
        return Err(parse_err(2, "first sample must be at minute 0".into()));
    }
    let step = rows[1].minute;
    for (k, r) in rows.iter().enumerate() {
        if r.minute as usize != k * step as usize {
            return Err(parse_err(
                k + 2,
                format!("minute {} breaks the {step}-minute spacing", r.minute),
            ));
        }
    }
    Ok(TimeSeries {
        resolution_minutes: step,
        values_mw: rows.into_iter().map(|r| r.value_mw).collect(),
    })
}

pub fn write_profile_csv(path: impl AsRef<Path>, ts: &TimeSeries) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Model(format!("{other:?}")),
    })?;
    for (k, v) in ts.values_mw.iter().enumerate() {
        w.serialize(ProfileRow {
            minute: k as u32 * ts.resolution_minutes,
            value_mw: *v,
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Hourly cubic approximations of the demand and RES profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximatedProfiles {
    pub demand: PiecewiseBernstein,
    pub res: PiecewiseBernstein,
    /// Per-hour RMS residual of the demand fit against the raw samples, MW.
    pub demand_rms: Vec<f64>,
    pub res_rms: Vec<f64>,
}

/// Least-squares cubic approximation that is C0 and C1 continuous by
/// construction.
///
/// The unknowns are the value `y_k` and slope `s_k` (MW/h) at every hour
/// boundary; hour `t` then has coefficients
/// `(y_t, y_t + s_t/3, y_{t+1} - s_{t+1}/3, y_{t+1})`. All samples are fitted
/// in one solve. Fitting hour by hour with value and slope carried forward
/// amplifies the error from one hour to the next.
pub fn approximate_series(ts: &TimeSeries, horizon: usize) -> Result<(PiecewiseBernstein, Vec<f64>)> {
    let per_hour = ts.samples_per_hour();
    if per_hour < 4 {
        return Err(Error::Fit {
            hour: None,
            reason: format!("{per_hour} samples per hour; at least 4 needed"),
        });
    }
    if horizon == 0 || ts.values_mw.len() < horizon * per_hour {
        return Err(Error::Fit {
            hour: None,
            reason: "profile shorter than the horizon".into(),
        });
    }
    let n = WORKING_DEGREE as f64;
    let knots = horizon + 1;
    // column of y_k is k, column of s_k is knots + k
    let rows = horizon * per_hour;
    let mut a = DMatrix::<f64>::zeros(rows, 2 * knots);
    let mut y = DVector::<f64>::zeros(rows);
    for t in 0..horizon {
        for k in 0..per_hour {
            let r = t * per_hour + k;
            let tau = k as f64 / per_hour as f64;
            let bs: Vec<f64> = (0..=WORKING_DEGREE)
                .map(|b| basis_eval(b, WORKING_DEGREE, tau))
                .collect::<Result<_>>()?;
            a[(r, t)] += bs[0] + bs[1];
            a[(r, knots + t)] += bs[1] / n;
            a[(r, t + 1)] += bs[2] + bs[3];
            a[(r, knots + t + 1)] -= bs[2] / n;
            y[r] = ts.values_mw[r];
        }
    }
    let x = a
        .svd(true, true)
        .solve(&y, 0.0)
        .map_err(|e| Error::Fit {
            hour: None,
            reason: e.to_string(),
        })?;
    let per_hour_coeffs: Vec<Vec<f64>> = (0..horizon)
        .map(|t| {
            vec![
                x[t],
                x[t] + x[knots + t] / n,
                x[t + 1] - x[knots + t + 1] / n,
                x[t + 1],
            ]
        })
        .collect();
    let pw = PiecewiseBernstein::from_coeffs(per_hour_coeffs)?;
    let rms = (0..horizon)
        .map(|t| {
            let seg = pw.segment(t);
            let sq: f64 = (0..per_hour)
                .map(|k| (seg.value_at(k as f64 / per_hour as f64) - ts.values_mw[t * per_hour + k]).powi(2))
                .sum();
            (sq / per_hour as f64).sqrt()
        })
        .collect();
    Ok((pw, rms))
}

pub fn approximate_profiles(case: &CaseInput) -> Result<ApproximatedProfiles> {
    let (demand, demand_rms) = approximate_series(&case.demand_samples, case.horizon)?;
    let (res, res_rms) = approximate_series(&case.res_samples, case.horizon)?;
    Ok(ApproximatedProfiles {
        demand,
        res,
        demand_rms,
        res_rms,
    })
}
