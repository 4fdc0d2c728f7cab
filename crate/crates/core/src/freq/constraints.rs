use crate::cuc::{UcVariables, NC};
use crate::error::Result;
use crate::milp::{ConstraintHandle, ConstraintSense, Model};
use crate::nadirlearn::NadirModel;
use crate::sysmodel::{ApproximatedProfiles, CaseInput};

/// `Cp[b,t,l] <= (2 rocof / f0) * sum_{i != l} H_i M_i u[t,i]`.
pub fn build_rocof_constraints(model: &mut Model, vars: &UcVariables, case: &CaseInput) -> Result<Vec<ConstraintHandle>> {
    let k = 2.0 * case.params.rocof_limit / case.params.f0;
    let mut rows = Vec::new();
    for t in 0..vars.horizon {
        for (l, unit) in case.units.iter().enumerate() {
            for b in 0..NC {
                let mut terms = vec![(vars.at(t, l).cp[b], 1.0)];
                terms.extend(vars.inertia_terms(case, t, l, -k));
                rows.push(model.add_constraint(
                    format!("rocof_{t}_{b}_{}", unit.id),
                    &terms,
                    ConstraintSense::Le,
                    0.0,
                )?);
            }
        }
    }
    Ok(rows)
}

/// `sum_{i != l} Cr[b,t,i] >= Cp[b,t,l] - D * C_demand[b,t] * qss_limit`.
pub fn build_qss_constraints(
    model: &mut Model,
    vars: &UcVariables,
    case: &CaseInput,
    profiles: &ApproximatedProfiles,
) -> Result<Vec<ConstraintHandle>> {
    let params = &case.params;
    let mut rows = Vec::new();
    for t in 0..vars.horizon {
        let demand = profiles.demand.segment(t).coeffs();
        for (l, unit) in case.units.iter().enumerate() {
            for b in 0..NC {
                let mut terms = vars.reserve_terms(t, l, b, 1.0);
                terms.push((vars.at(t, l).cp[b], -1.0));
                rows.push(model.add_constraint(
                    format!("qss_{t}_{b}_{}", unit.id),
                    &terms,
                    ConstraintSense::Ge,
                    -params.damping * demand[b] * params.qss_limit,
                )?);
            }
        }
    }
    Ok(rows)
}

/// Big-M that switches a nadir row off when the candidate unit is offline:
/// the largest value the surrogate can take with `Cp = 0`, minus the limit.
pub fn nadir_big_m(case: &CaseInput, lost: usize, nadir: &NadirModel, limit: f64) -> f64 {
    let [a0, _, a2, a3] = nadir.alpha;
    let others = case.units.iter().enumerate().filter(|(i, _)| *i != lost);
    let hm: f64 = others.clone().map(|(_, u)| u.stored_energy()).sum();
    let headroom: f64 = others.map(|(_, u)| u.p_max).sum();
    (a0 + a2.max(0.0) * hm + a3.max(0.0) * headroom - limit).max(0.0)
}

/// `a0 + a1 Cp[b,t,l] + a2 H_l(u) + a3 sum_{i != l} Cr[b,t,i] <= limit + M (1 - u[t,l])`.
pub fn build_nadir_constraints(
    model: &mut Model,
    vars: &UcVariables,
    case: &CaseInput,
    nadir: &NadirModel,
) -> Result<Vec<ConstraintHandle>> {
    let limit = case.params.nadir_limit;
    let [a0, a1, a2, a3] = nadir.alpha;
    let mut rows = Vec::new();
    for t in 0..vars.horizon {
        for (l, unit) in case.units.iter().enumerate() {
            let big_m = nadir_big_m(case, l, nadir, limit);
            let u = vars.at(t, l).u;
            for b in 0..NC {
                let mut terms = vec![(vars.at(t, l).cp[b], a1), (u, big_m)];
                terms.extend(vars.inertia_terms(case, t, l, a2));
                terms.extend(vars.reserve_terms(t, l, b, a3));
                rows.push(model.add_constraint(
                    format!("nadir_{t}_{b}_{}", unit.id),
                    &terms,
                    ConstraintSense::Le,
                    limit - a0 + big_m,
                )?);
            }
        }
    }
    Ok(rows)
}
