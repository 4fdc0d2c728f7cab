//! Continuous-time unit commitment over cubic Bernstein coefficients.
//!
//! Binaries (`u` on, `v` startup, `w` shutdown) change only at hour starts.
//! Each unit's output in hour `t` is the merged trajectory
//! `P = Cp + Csu + Csd`: dispatch while committed, plus the startup and
//! shutdown ramps during which the unit is synchronised but `u = 0`. A startup
//! at hour `t` occupies `[t - SU, t)` and climbs from 0 to `p_min`; a shutdown
//! at hour `t` occupies `[t, t + SD)` and descends from `p_min` to 0. Value and
//! slope continuity are imposed on `P` at every hour boundary, so the merged
//! trajectory is C1 over the whole horizon.

mod schedule;

use crate::bernstein::WORKING_DEGREE;
use crate::error::{Error, Result};
use crate::freq;
use crate::milp::{self, ConstraintHandle, ConstraintSense, Model, Solution, SolveOptions, SolverBackend, VarHandle};
use crate::nadirlearn::NadirModel;
use crate::sysmodel::{ApproximatedProfiles, CaseInput, Mode};

pub use schedule::{extract_schedule, CommitmentMatrix, CostBreakdown, Schedule, CONTINUITY_TOL};

/// Coefficients per hourly segment.
pub const NC: usize = WORKING_DEGREE + 1;

type Coeffs = [VarHandle; NC];

/// Columns belonging to one unit in one hour.
#[derive(Debug, Clone)]
pub struct UnitHourVars {
    pub u: VarHandle,
    pub v: VarHandle,
    pub w: VarHandle,
    /// Dispatch coefficients.
    pub cp: Coeffs,
    /// Reserve coefficients.
    pub cr: Coeffs,
    /// Startup-trajectory coefficients; absent where no startup window can fall.
    pub su: Option<Coeffs>,
    /// Shutdown-trajectory coefficients.
    pub sd: Coeffs,
}

/// Handles of every decision variable of the UC model.
#[derive(Debug, Clone)]
pub struct UcVariables {
    pub horizon: usize,
    pub n_units: usize,
    cells: Vec<UnitHourVars>,
    /// RES curtailment coefficients per hour.
    pub curt: Vec<Coeffs>,
}

impl UcVariables {
    pub fn at(&self, t: usize, i: usize) -> &UnitHourVars {
        &self.cells[t * self.n_units + i]
    }

    /// Terms of the merged output coefficient `P[b, t, i]`.
    pub fn power_terms(&self, t: usize, i: usize, b: usize, scale: f64) -> Vec<(VarHandle, f64)> {
        let c = self.at(t, i);
        let mut terms = vec![(c.cp[b], scale), (c.sd[b], scale)];
        if let Some(su) = &c.su {
            terms.push((su[b], scale));
        }
        terms
    }

    /// `sum_{i != lost} H_i M_i u[t, i]` as linear terms, scaled.
    pub fn inertia_terms(&self, case: &CaseInput, t: usize, lost: usize, scale: f64) -> Vec<(VarHandle, f64)> {
        case.units
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != lost)
            .map(|(i, u)| (self.at(t, i).u, scale * u.stored_energy()))
            .collect()
    }

    /// `sum_{i != lost} Cr[b, t, i]` as linear terms, scaled.
    pub fn reserve_terms(&self, t: usize, lost: usize, b: usize, scale: f64) -> Vec<(VarHandle, f64)> {
        (0..self.n_units)
            .filter(|i| *i != lost)
            .map(|i| (self.at(t, i).cr[b], scale))
            .collect()
    }
}

fn le(model: &mut Model, name: String, terms: &[(VarHandle, f64)], rhs: f64) -> Result<ConstraintHandle> {
    model.add_constraint(name, terms, ConstraintSense::Le, rhs)
}

fn ge(model: &mut Model, name: String, terms: &[(VarHandle, f64)], rhs: f64) -> Result<ConstraintHandle> {
    model.add_constraint(name, terms, ConstraintSense::Ge, rhs)
}

fn eq(model: &mut Model, name: String, terms: &[(VarHandle, f64)], rhs: f64) -> Result<ConstraintHandle> {
    model.add_constraint(name, terms, ConstraintSense::Eq, rhs)
}

/// Creates all UC columns. Binaries first per (hour, unit), then coefficients.
pub fn create_variables(model: &mut Model, case: &CaseInput, profiles: &ApproximatedProfiles) -> Result<UcVariables> {
    let horizon = case.horizon;
    let n_units = case.units.len();
    let params = &case.params;
    let mut cells = Vec::with_capacity(horizon * n_units);
    for t in 0..horizon {
        for unit in &case.units {
            let id = &unit.id;
            let u = model.add_binary(format!("b_u_{t}_{id}"))?;
            let v = model.add_binary(format!("b_v_{t}_{id}"))?;
            let w = model.add_binary(format!("b_w_{t}_{id}"))?;
            let coeffs = |model: &mut Model, kind: &str, hi: f64| -> Result<Coeffs> {
                let mut out = Vec::with_capacity(NC);
                for b in 0..NC {
                    out.push(model.add_continuous(format!("c_{kind}_{t}_{b}_{id}"), 0.0, hi)?);
                }
                Ok(out.try_into().unwrap())
            };
            let cp = coeffs(model, "cp", unit.p_max)?;
            let reserve_hi = if params.reserve_deliverability_cap {
                unit.p_max.min(unit.ramp_up * params.t_g / 3600.0)
            } else {
                unit.p_max
            };
            let cr = coeffs(model, "cr", reserve_hi)?;
            // a startup window can only cover hours strictly before the last one
            let su = if t + 1 < horizon {
                Some(coeffs(model, "su", unit.p_min)?)
            } else {
                None
            };
            let sd = coeffs(model, "sd", unit.p_min)?;
            cells.push(UnitHourVars { u, v, w, cp, cr, su, sd });
        }
    }
    let mut curt = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let res = profiles.res.segment(t).coeffs();
        let mut c = Vec::with_capacity(NC);
        for (b, &r) in res.iter().enumerate() {
            c.push(model.add_continuous(format!("c_curt_{t}_{b}"), 0.0, r.max(0.0))?);
        }
        curt.push(c.try_into().unwrap());
    }
    Ok(UcVariables {
        horizon,
        n_units,
        cells,
        curt,
    })
}

/// `u[t] - u[t-1] = v[t] - w[t]` and `v[t] + w[t] <= 1`.
pub fn build_commitment_logic(model: &mut Model, vars: &UcVariables, case: &CaseInput) -> Result<Vec<ConstraintHandle>> {
    let mut rows = Vec::new();
    for (i, unit) in case.units.iter().enumerate() {
        let id = &unit.id;
        for t in 0..vars.horizon {
            let c = vars.at(t, i);
            let mut terms = vec![(c.u, 1.0), (c.v, -1.0), (c.w, 1.0)];
            let rhs = if t == 0 {
                if unit.initial_status.online { 1.0 } else { 0.0 }
            } else {
                terms.push((vars.at(t - 1, i).u, -1.0));
                0.0
            };
            rows.push(eq(model, format!("logic_{t}_{id}"), &terms, rhs)?);
            rows.push(le(model, format!("vw_{t}_{id}"), &[(c.v, 1.0), (c.w, 1.0)], 1.0)?);
        }
    }
    Ok(rows)
}

/// Minimum up/down time in window form, with the initial state carried over.
pub fn build_min_up_down(model: &mut Model, vars: &UcVariables, case: &CaseInput) -> Result<Vec<ConstraintHandle>> {
    let mut rows = Vec::new();
    for (i, unit) in case.units.iter().enumerate() {
        let id = &unit.id;
        let up = unit.min_up as usize;
        let down = unit.min_down as usize;
        for t in 0..vars.horizon {
            let c = vars.at(t, i);
            let mut terms: Vec<_> = (t.saturating_sub(up - 1)..=t).map(|s| (vars.at(s, i).v, 1.0)).collect();
            terms.push((c.u, -1.0));
            rows.push(le(model, format!("minup_{t}_{id}"), &terms, 0.0)?);
            let mut terms: Vec<_> = (t.saturating_sub(down - 1)..=t).map(|s| (vars.at(s, i).w, 1.0)).collect();
            terms.push((c.u, 1.0));
            rows.push(le(model, format!("mindown_{t}_{id}"), &terms, 1.0)?);
        }
        let init = &unit.initial_status;
        let held = init.hours as usize;
        let (required, state) = if init.online { (up, 1.0) } else { (down, 0.0) };
        for t in 0..required.saturating_sub(held).min(vars.horizon) {
            rows.push(eq(model, format!("init_hold_{t}_{id}"), &[(vars.at(t, i).u, 1.0)], state)?);
        }
    }
    Ok(rows)
}

/// Value (C0) and slope (C1) continuity of the merged trajectory.
pub fn build_continuity(model: &mut Model, vars: &UcVariables, case: &CaseInput) -> Result<Vec<ConstraintHandle>> {
    let n = WORKING_DEGREE;
    let mut rows = Vec::new();
    for (i, unit) in case.units.iter().enumerate() {
        let id = &unit.id;
        // hour 0 against the initial state
        let init = &unit.initial_status;
        let (start_value, start_slope) = if init.online {
            (init.output_mw, init.ramp_mw_per_h)
        } else {
            (Some(0.0), Some(0.0))
        };
        if let Some(p0) = start_value {
            rows.push(eq(model, format!("c0_0_{id}"), &vars.power_terms(0, i, 0, 1.0), p0)?);
        }
        if let Some(r0) = start_slope {
            let mut terms = vars.power_terms(0, i, 1, 1.0);
            terms.extend(vars.power_terms(0, i, 0, -1.0));
            rows.push(eq(model, format!("c1_0_{id}"), &terms, r0 / n as f64)?);
        }
        for t in 1..vars.horizon {
            // C0_t = C3_{t-1}
            let mut terms = vars.power_terms(t, i, 0, 1.0);
            terms.extend(vars.power_terms(t - 1, i, n, -1.0));
            rows.push(eq(model, format!("c0_{t}_{id}"), &terms, 0.0)?);
            // C1_t - C0_t = C3_{t-1} - C2_{t-1}
            let mut terms = vars.power_terms(t, i, 1, 1.0);
            terms.extend(vars.power_terms(t, i, 0, -1.0));
            terms.extend(vars.power_terms(t - 1, i, n, -1.0));
            terms.extend(vars.power_terms(t - 1, i, n - 1, 1.0));
            rows.push(eq(model, format!("c1_{t}_{id}"), &terms, 0.0)?);
        }
    }
    Ok(rows)
}

/// Startup/shutdown windows: big-M activation and the 0 -> p_min -> 0 endpoints.
pub fn build_su_sd_trajectories(model: &mut Model, vars: &UcVariables, case: &CaseInput) -> Result<Vec<ConstraintHandle>> {
    let horizon = vars.horizon;
    let last = WORKING_DEGREE;
    let mut rows = Vec::new();
    for (i, unit) in case.units.iter().enumerate() {
        let id = &unit.id;
        let su_len = unit.su_duration as usize;
        let sd_len = unit.sd_duration as usize;
        let pmin = unit.p_min;
        for s in 0..horizon {
            let cell = vars.at(s, i);
            if let Some(su) = &cell.su {
                // active when a startup happens within the next su_len hours
                let starts: Vec<_> = (s + 1..=s + su_len)
                    .filter(|t| *t < horizon)
                    .map(|t| vars.at(t, i).v)
                    .collect();
                for (b, &col) in su.iter().enumerate() {
                    let mut terms = vec![(col, 1.0)];
                    terms.extend(starts.iter().map(|v| (*v, -pmin)));
                    rows.push(le(model, format!("subig_{s}_{b}_{id}"), &terms, 0.0)?);
                }
            }
            let stops: Vec<_> = (s.saturating_sub(sd_len - 1)..=s).map(|t| vars.at(t, i).w).collect();
            for (b, &col) in cell.sd.iter().enumerate() {
                let mut terms = vec![(col, 1.0)];
                terms.extend(stops.iter().map(|w| (*w, -pmin)));
                rows.push(le(model, format!("sdbig_{s}_{b}_{id}"), &terms, 0.0)?);
            }
        }
        for t in 0..horizon {
            let v = vars.at(t, i).v;
            if t < su_len {
                // the window would begin before the horizon
                rows.push(le(model, format!("su_early_{t}_{id}"), &[(v, 1.0)], 0.0)?);
            } else {
                let first = vars.at(t - su_len, i).su.as_ref().expect("startup window inside horizon");
                let end = vars.at(t - 1, i).su.as_ref().expect("startup window inside horizon");
                rows.push(le(model, format!("su_start_{t}_{id}"), &[(first[0], 1.0), (v, pmin)], pmin)?);
                rows.push(ge(model, format!("su_end_{t}_{id}"), &[(end[last], 1.0), (v, -pmin)], 0.0)?);
            }
            let w = vars.at(t, i).w;
            let sd = &vars.at(t, i).sd;
            rows.push(ge(model, format!("sd_start_{t}_{id}"), &[(sd[0], 1.0), (w, -pmin)], 0.0)?);
            if t + sd_len - 1 < horizon {
                let end = &vars.at(t + sd_len - 1, i).sd;
                rows.push(le(model, format!("sd_end_{t}_{id}"), &[(end[last], 1.0), (w, pmin)], pmin)?);
            }
        }
    }
    Ok(rows)
}

/// `p_min u <= Cp[b]` and `Cp[b] + Cr[b] <= p_max u` (which also caps `Cp`).
pub fn build_capacity_reserve(model: &mut Model, vars: &UcVariables, case: &CaseInput) -> Result<Vec<ConstraintHandle>> {
    let mut rows = Vec::new();
    for t in 0..vars.horizon {
        for (i, unit) in case.units.iter().enumerate() {
            let id = &unit.id;
            let c = vars.at(t, i);
            for b in 0..NC {
                rows.push(ge(model, format!("pmin_{t}_{b}_{id}"), &[(c.cp[b], 1.0), (c.u, -unit.p_min)], 0.0)?);
                rows.push(le(
                    model,
                    format!("pmax_{t}_{b}_{id}"),
                    &[(c.cp[b], 1.0), (c.cr[b], 1.0), (c.u, -unit.p_max)],
                    0.0,
                )?);
            }
        }
    }
    Ok(rows)
}

/// `-ramp_down <= n (P[b] - P[b-1]) <= ramp_up` on the merged trajectory.
pub fn build_ramping(model: &mut Model, vars: &UcVariables, case: &CaseInput) -> Result<Vec<ConstraintHandle>> {
    let n = WORKING_DEGREE as f64;
    let mut rows = Vec::new();
    for t in 0..vars.horizon {
        for (i, unit) in case.units.iter().enumerate() {
            let id = &unit.id;
            for b in 1..NC {
                let mut terms = vars.power_terms(t, i, b, n);
                terms.extend(vars.power_terms(t, i, b - 1, -n));
                rows.push(le(model, format!("rup_{t}_{b}_{id}"), &terms, unit.ramp_up)?);
                rows.push(ge(model, format!("rdn_{t}_{b}_{id}"), &terms, -unit.ramp_down)?);
            }
        }
    }
    Ok(rows)
}

/// Coefficient-wise balance: `sum_i P + C_res - C_curt = C_demand`.
pub fn build_power_balance(
    model: &mut Model,
    vars: &UcVariables,
    case: &CaseInput,
    profiles: &ApproximatedProfiles,
) -> Result<Vec<ConstraintHandle>> {
    let mut rows = Vec::new();
    for t in 0..vars.horizon {
        let demand = profiles.demand.segment(t).coeffs();
        let res = profiles.res.segment(t).coeffs();
        for b in 0..NC {
            let mut terms: Vec<_> = (0..case.units.len()).flat_map(|i| vars.power_terms(t, i, b, 1.0)).collect();
            terms.push((vars.curt[t][b], -1.0));
            rows.push(eq(model, format!("bal_{t}_{b}"), &terms, demand[b] - res[b])?);
        }
    }
    Ok(rows)
}

/// Startup + no-load + marginal cost on the exact energy of each segment.
pub fn build_objective(model: &mut Model, vars: &UcVariables, case: &CaseInput) -> Result<()> {
    let per_coeff = 1.0 / NC as f64;
    let mut terms = Vec::new();
    for t in 0..vars.horizon {
        for (i, unit) in case.units.iter().enumerate() {
            let c = vars.at(t, i);
            terms.push((c.v, unit.startup_cost));
            terms.push((c.u, unit.no_load_cost));
            for b in 0..NC {
                terms.extend(vars.power_terms(t, i, b, unit.marginal_cost * per_coeff));
            }
        }
        let penalty = case.params.curtailment_penalty;
        if penalty > 0.0 {
            terms.extend(vars.curt[t].iter().map(|c| (*c, penalty * per_coeff)));
        }
    }
    model.set_objective(&terms)
}

/// Builds the complete scheduling model for `mode`.
///
/// `nadir` is required for [`Mode::Cfcuc`]; the nadir limit comes from
/// `case.params.nadir_limit`.
pub fn assemble(
    case: &CaseInput,
    profiles: &ApproximatedProfiles,
    mode: Mode,
    nadir: Option<&NadirModel>,
) -> Result<(Model, UcVariables)> {
    if mode.has_nadir() && nadir.is_none() {
        return Err(Error::Model("cfcuc mode needs a trained nadir model".into()));
    }
    if profiles.demand.horizon() != case.horizon || profiles.res.horizon() != case.horizon {
        return Err(Error::Model("profiles do not match the case horizon".into()));
    }
    let name = if case.name.is_empty() { "cuc".to_string() } else { case.name.clone() };
    let mut model = Model::new(format!("{name}_{mode}"));
    let vars = create_variables(&mut model, case, profiles)?;
    build_commitment_logic(&mut model, &vars, case)?;
    build_min_up_down(&mut model, &vars, case)?;
    build_continuity(&mut model, &vars, case)?;
    build_su_sd_trajectories(&mut model, &vars, case)?;
    build_capacity_reserve(&mut model, &vars, case)?;
    build_ramping(&mut model, &vars, case)?;
    build_power_balance(&mut model, &vars, case, profiles)?;
    if mode.has_rocof() {
        freq::build_rocof_constraints(&mut model, &vars, case)?;
        freq::build_qss_constraints(&mut model, &vars, case, profiles)?;
    }
    if let (true, Some(nm)) = (mode.has_nadir(), nadir) {
        freq::build_nadir_constraints(&mut model, &vars, case, nm)?;
    }
    build_objective(&mut model, &vars, case)?;
    model.freeze();
    Ok((model, vars))
}

/// Raises every reserve coefficient to the unused capacity of its unit.
///
/// Reserve carries no cost, so any value the solver returns below the
/// headroom is an arbitrary tie-break. The raised values are kept only if
/// the model stays feasible (they always do unless a learned nadir row
/// penalises reserve).
pub fn release_headroom(model: &Model, vars: &UcVariables, case: &CaseInput, solution: &Solution) -> Solution {
    if !solution.status.has_values() {
        return solution.clone();
    }
    let mut values = solution.values().to_vec();
    for t in 0..vars.horizon {
        for (i, unit) in case.units.iter().enumerate() {
            let c = vars.at(t, i);
            let on = values[c.u.index()].round();
            for b in 0..NC {
                let hi = model.var(c.cr[b]).hi;
                let headroom = unit.p_max * on - values[c.cp[b].index()];
                values[c.cr[b].index()] = headroom.clamp(0.0, hi);
            }
        }
    }
    let before = model.max_violation(solution.values());
    if model.max_violation(&values) <= before.max(1e-7) {
        Solution::new(solution.status, solution.objective, values, solution.gap)
    } else {
        solution.clone()
    }
}

/// Solves `model`, releases unpriced headroom as reserve and extracts the schedule.
pub fn solve_schedule(
    model: &Model,
    vars: &UcVariables,
    case: &CaseInput,
    backend: &dyn SolverBackend,
    opts: &SolveOptions,
) -> Result<Schedule> {
    let solution = milp::solve(model, backend, opts)?;
    if !solution.status.has_values() {
        return Err(Error::Solver {
            backend: backend.name().to_string(),
            message: format!("no schedule: status {:?}", solution.status),
        });
    }
    extract_schedule(&release_headroom(model, vars, case, &solution), vars, case)
}
