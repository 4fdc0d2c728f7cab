#![allow(dead_code)]

use cfcuc::bernstein::binomial;
use cfcuc::cuc::{assemble, UcVariables};
use cfcuc::milp::{HighsBackend, Model, SolveOptions, SolverBackend, VarHandle};
use cfcuc::sysmodel::{approximate_profiles, CaseInput, InitialStatus, Mode, SystemParams, TimeSeries, UnitSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Direct power-form evaluation of a Bernstein polynomial.
pub fn bern_ref(coeffs: &[f64], tau: f64) -> f64 {
    let n = coeffs.len() - 1;
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * binomial(n, k) * tau.powi(k as i32) * (1.0 - tau).powi((n - k) as i32))
        .sum()
}

pub fn tight() -> SolveOptions {
    SolveOptions {
        time_limit_s: 120.0,
        mip_gap: 1e-9,
    }
}

pub fn unit(id: &str, p_min: f64, p_max: f64) -> UnitSpec {
    UnitSpec {
        id: id.into(),
        p_min,
        p_max,
        ramp_up: 100.0,
        ramp_down: 100.0,
        min_up: 1,
        min_down: 2,
        su_duration: 1,
        sd_duration: 1,
        inertia: 4.0,
        base_power: 20.0,
        marginal_cost: 100.0,
        no_load_cost: 50.0,
        startup_cost: 200.0,
        initial_status: InitialStatus {
            online: true,
            hours: 10,
            output_mw: None,
            ramp_mw_per_h: None,
        },
    }
}

pub fn params(mode: Mode) -> SystemParams {
    SystemParams {
        f0: 50.0,
        damping: 0.01,
        t_g: 3.0,
        rocof_limit: 2.5,
        qss_limit: 1.0,
        nadir_limit: 2.5,
        mode,
        curtailment_penalty: 0.0,
        reserve_deliverability_cap: false,
    }
}

/// Flat profile at quarter-hour resolution.
pub fn flat(horizon: usize, mw: f64) -> TimeSeries {
    TimeSeries {
        resolution_minutes: 15,
        values_mw: vec![mw; horizon * 4],
    }
}

pub fn case(units: Vec<UnitSpec>, demand: TimeSeries, res: TimeSeries, mode: Mode) -> CaseInput {
    let horizon = demand.values_mw.len() / demand.samples_per_hour();
    CaseInput {
        name: "test".into(),
        params: params(mode),
        units,
        demand_samples: demand,
        res_samples: res,
        horizon,
    }
}

/// A random 2-unit, 4-hour case with a smooth demand profile. Unit A alone
/// can always carry the demand, so every case has a feasible schedule.
pub fn random_small_case(rng: &mut ChaCha8Rng) -> CaseInput {
    let horizon = 4;
    let mut units = Vec::new();
    for (k, id) in ["A", "B"].iter().enumerate() {
        let p_min = rng.gen_range(1.0..2.5);
        let mut u = unit(id, p_min, p_min + rng.gen_range(10.0..13.0));
        u.ramp_up = rng.gen_range(8.0..40.0);
        u.ramp_down = u.ramp_up;
        u.min_up = rng.gen_range(1..=2);
        u.min_down = rng.gen_range(2..=3);
        u.marginal_cost = rng.gen_range(40.0..160.0);
        u.no_load_cost = rng.gen_range(10.0..120.0);
        u.startup_cost = rng.gen_range(20.0..400.0);
        u.initial_status = InitialStatus {
            online: k == 0 || rng.gen_bool(0.5),
            hours: rng.gen_range(1..=3),
            output_mw: None,
            ramp_mw_per_h: None,
        };
        units.push(u);
    }
    let base = rng.gen_range(7.0..9.0);
    let swing = rng.gen_range(0.0..2.0);
    let phase = rng.gen_range(0.0..6.0);
    let demand = TimeSeries {
        resolution_minutes: 15,
        values_mw: (0..horizon * 4)
            .map(|k| base + swing * (k as f64 / 4.0 * 0.8 + phase).sin())
            .collect(),
    };
    let sun = rng.gen_range(0.0..2.0);
    let res = TimeSeries {
        resolution_minutes: 15,
        values_mw: (0..horizon * 4).map(|k| sun * (k as f64 / 16.0)).collect(),
    };
    let mut c = case(units, demand, res, Mode::Cuc);
    c.params.curtailment_penalty = rng.gen_range(0.0..50.0);
    c
}

/// The commitment columns of `pattern` (bit `t * n + i` is `u[t, i]`), with
/// startup and shutdown indicators derived from the initial state.
pub fn pattern_fixes(vars: &UcVariables, case: &CaseInput, pattern: u32) -> Vec<(VarHandle, f64)> {
    let n = case.units.len();
    let mut fixes = Vec::new();
    for (i, unit) in case.units.iter().enumerate() {
        let mut prev = unit.initial_status.online as i32;
        for t in 0..case.horizon {
            let u = ((pattern >> (t * n + i)) & 1) as i32;
            let c = vars.at(t, i);
            fixes.push((c.u, u as f64));
            fixes.push((c.v, (u - prev).max(0) as f64));
            fixes.push((c.w, (prev - u).max(0) as f64));
            prev = u;
        }
    }
    fixes
}

/// Cheapest commitment by dispatching every pattern as an LP.
pub fn brute_force(model: &Model, vars: &UcVariables, case: &CaseInput) -> Option<f64> {
    use rayon::prelude::*;
    let bits = case.units.len() * case.horizon;
    (0..1u32 << bits)
        .into_par_iter()
        .filter_map(|p| {
            let lp = model.with_fixed(&pattern_fixes(vars, case, p)).ok()?;
            let sol = HighsBackend.solve(&lp, &tight()).ok()?;
            sol.status.has_values().then_some(sol.objective)
        })
        .reduce_with(f64::min)
}

pub fn build(case: &CaseInput) -> (Model, UcVariables) {
    let profiles = approximate_profiles(case).unwrap();
    assemble(case, &profiles, case.params.mode, None).unwrap()
}

/// Unit B is needed only in hours 3 and 4 and must start and stop around them.
pub fn peak_case() -> CaseInput {
    let a = unit("A", 2.0, 10.0);
    let mut b = unit("B", 2.0, 6.0);
    b.marginal_cost = 150.0;
    b.no_load_cost = 80.0;
    b.initial_status.online = false;
    b.initial_status.hours = 5;
    let horizon = 8;
    let demand = TimeSeries {
        resolution_minutes: 15,
        values_mw: (0..horizon * 4)
            .map(|k| {
                let h = k as f64 / 4.0;
                6.0 + 7.0 * (-((h - 4.0) / 1.2).powi(2)).exp()
            })
            .collect(),
    };
    case(vec![a, b], demand, flat(horizon, 0.0), Mode::Cuc)
}
