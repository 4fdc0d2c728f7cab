//! A small synthetic island system: five diesel-like units over one day.
//!
//! Used by the examples, the acceptance suite and as a template for case
//! files. The profiles are generated analytically so the case can be rebuilt
//! bit-for-bit without reading `data/`.

use std::f64::consts::PI;

use crate::sysmodel::{CaseInput, InitialStatus, Mode, SystemParams, TimeSeries, UnitSpec};

pub const DESK_HORIZON: usize = 24;
pub const DESK_RESOLUTION_MINUTES: u32 = 5;

fn unit(id: &str, p: (f64, f64), ramp: f64, up_down: (u32, u32), hm: (f64, f64), cost: (f64, f64, f64)) -> UnitSpec {
    UnitSpec {
        id: id.into(),
        p_min: p.0,
        p_max: p.1,
        ramp_up: ramp,
        ramp_down: ramp,
        min_up: up_down.0,
        min_down: up_down.1,
        su_duration: 1,
        sd_duration: 1,
        inertia: hm.0,
        base_power: hm.1,
        marginal_cost: cost.0,
        no_load_cost: cost.1,
        startup_cost: cost.2,
        initial_status: InitialStatus {
            online: false,
            hours: 10,
            output_mw: None,
            ramp_mw_per_h: None,
        },
    }
}

/// Demand in MW at time `h` hours: a two-peak daily shape plus a small ripple.
pub fn desk_demand(h: f64) -> f64 {
    let base = 27.0 - 5.0 * (2.0 * PI * (h - 3.0) / 24.0).cos();
    let evening = 3.5 * (-((h - 20.0) / 2.0).powi(2)).exp();
    base + evening + 0.4 * (2.0 * PI * h / 1.5).sin()
}

/// Solar output in MW at time `h` hours.
pub fn desk_solar(h: f64) -> f64 {
    if (6.0..18.0).contains(&h) {
        8.0 * (PI * (h - 6.0) / 12.0).sin().powi(2)
    } else {
        0.0
    }
}

fn sample(f: fn(f64) -> f64) -> TimeSeries {
    let per_hour = (60 / DESK_RESOLUTION_MINUTES) as usize;
    TimeSeries {
        resolution_minutes: DESK_RESOLUTION_MINUTES,
        values_mw: (0..DESK_HORIZON * per_hour)
            .map(|k| {
                let v = f(k as f64 / per_hour as f64);
                // keep the stored values short and exactly reproducible
                (v * 1e4).round() / 1e4
            })
            .collect(),
    }
}

/// The five-unit, 24-hour desk case in `mode`.
pub fn desk_case(mode: Mode, nadir_limit: f64) -> CaseInput {
    let mut units = vec![
        unit("U1", (4.0, 16.0), 30.0, (4, 3), (4.0, 20.0), (130.0, 400.0, 2000.0)),
        unit("U2", (4.0, 16.0), 30.0, (4, 3), (4.0, 20.0), (135.0, 400.0, 2000.0)),
        unit("U3", (2.0, 10.0), 20.0, (3, 2), (3.0, 12.0), (160.0, 150.0, 600.0)),
        unit("U4", (2.0, 10.0), 20.0, (3, 2), (3.0, 12.0), (165.0, 150.0, 600.0)),
        unit("U5", (1.0, 6.0), 15.0, (1, 2), (2.0, 8.0), (220.0, 60.0, 150.0)),
    ];
    for u in &mut units[..4] {
        u.initial_status = InitialStatus {
            online: true,
            hours: 12,
            output_mw: None,
            ramp_mw_per_h: None,
        };
    }
    CaseInput {
        name: "desk".into(),
        params: SystemParams {
            f0: 50.0,
            damping: 0.01,
            t_g: 3.0,
            rocof_limit: 2.5,
            qss_limit: 1.0,
            nadir_limit,
            mode,
            curtailment_penalty: 0.0,
            reserve_deliverability_cap: false,
        },
        units,
        demand_samples: sample(desk_demand),
        res_samples: sample(desk_solar),
        horizon: DESK_HORIZON,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_case_is_valid() {
        let case = desk_case(Mode::Cuc, 2.5);
        case.validate().unwrap();
        assert_eq!(case.demand_samples.values_mw.len(), 288);
        let max_demand = case.demand_samples.max();
        let capacity: f64 = case.units.iter().map(|u| u.p_max).sum();
        assert!(max_demand < capacity);
    }
}
