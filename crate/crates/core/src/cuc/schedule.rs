use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{UcVariables, NC};
use crate::bernstein::PiecewiseBernstein;
use crate::error::{Error, Result};
use crate::milp::{Solution, SolveStatus};
use crate::sysmodel::CaseInput;

/// Largest accepted value (MW) or slope (MW/h) jump at an hour boundary.
pub const CONTINUITY_TOL: f64 = 1e-6;
const BOUND_TOL: f64 = 1e-6;

/// Rounded binaries, indexed `[unit][hour]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitmentMatrix {
    pub u: Vec<Vec<u8>>,
    pub v: Vec<Vec<u8>>,
    pub w: Vec<Vec<u8>>,
}

impl CommitmentMatrix {
    pub fn is_on(&self, unit: usize, hour: usize) -> bool {
        self.u[unit][hour] == 1
    }

    pub fn startups(&self) -> usize {
        self.v.iter().flatten().map(|&x| x as usize).sum()
    }
}

/// Objective split, EUR.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub energy: f64,
    pub no_load: f64,
    pub startup: f64,
    pub curtailment: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.energy + self.no_load + self.startup + self.curtailment
    }
}

/// A solved commitment and dispatch.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub unit_ids: Vec<String>,
    pub commitment: CommitmentMatrix,
    /// Merged dispatch + SU/SD trajectory per unit.
    pub power: Vec<PiecewiseBernstein>,
    pub reserve: Vec<PiecewiseBernstein>,
    pub curtailment: PiecewiseBernstein,
    /// EUR
    pub objective: f64,
    pub breakdown: CostBreakdown,
    pub status: SolveStatus,
    pub gap: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct Summary {
    objective: f64,
    breakdown: CostBreakdown,
    status: SolveStatus,
    gap: Option<f64>,
    units: Vec<String>,
    commitment: CommitmentMatrix,
    curtailment: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct CoeffRow {
    unit: String,
    hour: usize,
    b: usize,
    coeff_mw: f64,
    reserve_mw: f64,
}

/// Reads a schedule out of a solution and checks its invariants.
pub fn extract_schedule(solution: &Solution, vars: &UcVariables, case: &CaseInput) -> Result<Schedule> {
    if !solution.status.has_values() {
        return Err(Error::Model(format!("solution has status {:?}; no schedule", solution.status)));
    }
    let val = |h| solution.value(h).unwrap_or(0.0);
    let bin = |h| u8::from(val(h) > 0.5);
    let horizon = vars.horizon;
    let mut commitment = CommitmentMatrix {
        u: Vec::new(),
        v: Vec::new(),
        w: Vec::new(),
    };
    let mut power = Vec::new();
    let mut reserve = Vec::new();
    let mut breakdown = CostBreakdown::default();

    for (i, unit) in case.units.iter().enumerate() {
        let (mut u, mut v, mut w) = (Vec::new(), Vec::new(), Vec::new());
        let mut p_hours = Vec::new();
        let mut r_hours = Vec::new();
        for t in 0..horizon {
            let cell = vars.at(t, i);
            u.push(bin(cell.u));
            v.push(bin(cell.v));
            w.push(bin(cell.w));
            let p: Vec<f64> = (0..NC)
                .map(|b| vars.power_terms(t, i, b, 1.0).iter().map(|(h, k)| k * val(*h)).sum())
                .collect();
            let r: Vec<f64> = cell.cr.iter().map(|h| val(*h)).collect();
            breakdown.energy += unit.marginal_cost * p.iter().sum::<f64>() / NC as f64;
            p_hours.push(p);
            r_hours.push(r);
        }
        breakdown.no_load += unit.no_load_cost * u.iter().map(|&x| x as f64).sum::<f64>();
        breakdown.startup += unit.startup_cost * v.iter().map(|&x| x as f64).sum::<f64>();
        commitment.u.push(u);
        commitment.v.push(v);
        commitment.w.push(w);
        power.push(PiecewiseBernstein::from_coeffs(p_hours)?);
        reserve.push(PiecewiseBernstein::from_coeffs(r_hours)?);
    }
    let curt_hours: Vec<Vec<f64>> = vars.curt.iter().map(|c| c.iter().map(|h| val(*h)).collect()).collect();
    breakdown.curtailment =
        case.params.curtailment_penalty * curt_hours.iter().flatten().sum::<f64>() / NC as f64;

    let schedule = Schedule {
        unit_ids: case.units.iter().map(|u| u.id.clone()).collect(),
        commitment,
        power,
        reserve,
        curtailment: PiecewiseBernstein::from_coeffs(curt_hours)?,
        objective: solution.objective,
        breakdown,
        status: solution.status,
        gap: solution.gap,
    };
    schedule.check(case)?;
    Ok(schedule)
}

impl Schedule {
    pub fn horizon(&self) -> usize {
        self.curtailment.horizon()
    }

    pub fn unit_index(&self, id: &str) -> Option<usize> {
        self.unit_ids.iter().position(|u| u == id)
    }

    /// Continuity and bound invariants; the first violation is reported.
    pub fn check(&self, case: &CaseInput) -> Result<()> {
        for (i, unit) in case.units.iter().enumerate() {
            let fail = |hour, constraint: String| Error::Schedule {
                unit: unit.id.clone(),
                hour,
                constraint,
            };
            let p = &self.power[i];
            for (k, r) in p.c0_residuals().iter().enumerate() {
                if r.abs() > CONTINUITY_TOL {
                    return Err(fail(k + 1, format!("c0 continuity (jump {r:.3e} MW)")));
                }
            }
            for (k, r) in p.c1_residuals().iter().enumerate() {
                if r.abs() > CONTINUITY_TOL {
                    return Err(fail(k + 1, format!("c1 continuity (jump {r:.3e} MW/h)")));
                }
            }
            for (t, seg) in p.segments().iter().enumerate() {
                let (lo, hi) = seg.coeff_bounds();
                if lo < -BOUND_TOL || hi > unit.p_max + BOUND_TOL {
                    return Err(fail(t, format!("power range [{lo:.6}, {hi:.6}] outside [0, {}]", unit.p_max)));
                }
            }
            for (t, seg) in self.reserve[i].segments().iter().enumerate() {
                let (lo, _) = seg.coeff_bounds();
                if lo < -BOUND_TOL {
                    return Err(fail(t, format!("negative reserve {lo:.3e}")));
                }
            }
        }
        Ok(())
    }

    /// Writes `schedule.csv` (one row per unit, hour and coefficient).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        for (i, id) in self.unit_ids.iter().enumerate() {
            for t in 0..self.horizon() {
                let p = self.power[i].segment(t).coeffs();
                let r = self.reserve[i].segment(t).coeffs();
                for b in 0..p.len() {
                    w.serialize(CoeffRow {
                        unit: id.clone(),
                        hour: t,
                        b,
                        coeff_mw: p[b],
                        reserve_mw: r[b],
                    })?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn summary_json(&self) -> Result<String> {
        let summary = Summary {
            objective: self.objective,
            breakdown: self.breakdown,
            status: self.status,
            gap: self.gap,
            units: self.unit_ids.clone(),
            commitment: self.commitment.clone(),
            curtailment: self.curtailment.segments().iter().map(|s| s.coeffs().to_vec()).collect(),
        };
        Ok(serde_json::to_string_pretty(&summary)?)
    }

    /// Writes `schedule.csv` and `schedule.json` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        self.write_csv(dir.join("schedule.csv"))?;
        let json = dir.join("schedule.json");
        fs::write(&json, self.summary_json()?).map_err(|e| Error::io(&json, e))
    }

    /// Reads a schedule written by [`Schedule::save`]; unit ids must match the case.
    pub fn load(dir: impl AsRef<Path>, case: &CaseInput) -> Result<Self> {
        let dir = dir.as_ref();
        let json_path = dir.join("schedule.json");
        let text = fs::read_to_string(&json_path).map_err(|e| Error::io(&json_path, e))?;
        let summary: Summary = serde_json::from_str(&text)?;
        let case_ids: Vec<String> = case.units.iter().map(|u| u.id.clone()).collect();
        if summary.units != case_ids {
            return Err(Error::validation(
                "schedule",
                "units",
                format!("ids {:?} do not match the case units {:?}", summary.units, case_ids),
            ));
        }
        let horizon = summary.curtailment.len();
        if horizon != case.horizon {
            return Err(Error::validation(
                "schedule",
                "horizon",
                format!("{horizon} hours but the case has {}", case.horizon),
            ));
        }
        let n = case_ids.len();
        let mut p = vec![vec![vec![f64::NAN; NC]; horizon]; n];
        let mut r = p.clone();
        let csv_path = dir.join("schedule.csv");
        let mut rd = csv::Reader::from_path(&csv_path)?;
        for row in rd.deserialize() {
            let row: CoeffRow = row?;
            let i = summary.units.iter().position(|u| *u == row.unit).ok_or_else(|| {
                Error::validation("schedule", "unit", format!("unknown unit `{}` in csv", row.unit))
            })?;
            if row.hour >= horizon || row.b >= NC {
                return Err(Error::validation(
                    "schedule",
                    "hour",
                    format!("row ({}, {}) outside the horizon", row.hour, row.b),
                ));
            }
            p[i][row.hour][row.b] = row.coeff_mw;
            r[i][row.hour][row.b] = row.reserve_mw;
        }
        if p.iter().flatten().flatten().any(|x| x.is_nan()) {
            return Err(Error::validation("schedule", "coeff_mw", "csv is missing coefficients"));
        }
        let schedule = Schedule {
            unit_ids: summary.units,
            commitment: summary.commitment,
            power: p.into_iter().map(PiecewiseBernstein::from_coeffs).collect::<Result<_>>()?,
            reserve: r.into_iter().map(PiecewiseBernstein::from_coeffs).collect::<Result<_>>()?,
            curtailment: PiecewiseBernstein::from_coeffs(summary.curtailment)?,
            objective: summary.objective,
            breakdown: summary.breakdown,
            status: summary.status,
            gap: summary.gap,
        };
        Ok(schedule)
    }
}
