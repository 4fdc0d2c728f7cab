//! Post-outage frequency security.
//!
//! Closed-form nadir evaluation, its per-coefficient approximation, a
//! swing-equation ODE oracle, the minute-grid security metric, and the
//! RoCoF / quasi-steady-state / learned-nadir constraint builders.

mod constraints;

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernstein::BernsteinSegment;
use crate::cuc::Schedule;
use crate::error::{Error, Result};
use crate::sysmodel::{ApproximatedProfiles, CaseInput, SystemParams};

pub use constraints::{build_nadir_constraints, build_qss_constraints, build_rocof_constraints, nadir_big_m};

/// Minute samples per hour in the security sweep.
pub const MINUTES_PER_HOUR: usize = 60;

/// The instant after losing one unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageContext {
    pub lost_unit: usize,
    pub hour: usize,
    /// Inertia of the surviving committed units, MW s.
    pub inertia: f64,
    /// MW
    pub lost_power: f64,
    /// Reserve of the surviving units, MW.
    pub reserve: f64,
    /// MW
    pub demand: f64,
}

/// Result of a nadir evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NadirOutcome {
    /// Deviation in Hz at which the frequency is arrested.
    Arrested(f64),
    /// Reserve and inertia cannot arrest the decline (non-positive denominator).
    Insecure,
}

impl NadirOutcome {
    /// Deviation in Hz, with `Insecure` mapped to infinity.
    pub fn hz(self) -> f64 {
        match self {
            NadirOutcome::Arrested(v) => v,
            NadirOutcome::Insecure => f64::INFINITY,
        }
    }

    pub fn exceeds(self, threshold: f64) -> bool {
        self.hz() > threshold
    }
}

fn nadir_formula(p: f64, r: f64, h: f64, demand: f64, params: &SystemParams) -> NadirOutcome {
    if p == 0.0 {
        return NadirOutcome::Arrested(0.0);
    }
    let den = 4.0 * r * h - params.damping * params.t_g * params.f0 * demand * p;
    if den > 0.0 {
        NadirOutcome::Arrested(params.f0 * params.t_g * p * p / den)
    } else {
        NadirOutcome::Insecure
    }
}

/// Closed-form nadir `f0 Tg p^2 / (4 r H - D Tg f0 demand p)`.
pub fn nadir_exact(ctx: &OutageContext, params: &SystemParams) -> NadirOutcome {
    nadir_formula(ctx.lost_power, ctx.reserve, ctx.inertia, ctx.demand, params)
}

/// The nadir formula applied coefficient by coefficient.
pub fn nadir_coefficient_approx(
    cp: &BernsteinSegment,
    cr: &BernsteinSegment,
    inertia: f64,
    demand: &BernsteinSegment,
    params: &SystemParams,
) -> Result<Vec<NadirOutcome>> {
    let n = cp.degree();
    if cr.degree() != n || demand.degree() != n {
        return Err(Error::Domain("segments must share a degree".into()));
    }
    Ok((0..=n)
        .map(|b| nadir_formula(cp.coeffs()[b], cr.coeffs()[b], inertia, demand.coeffs()[b], params))
        .collect())
}

/// Numerator and denominator of the exact nadir as degree-2n Bernstein segments.
pub fn nadir_rational(
    cp: &BernsteinSegment,
    cr: &BernsteinSegment,
    inertia: f64,
    demand: &BernsteinSegment,
    params: &SystemParams,
) -> Result<(BernsteinSegment, BernsteinSegment)> {
    let num = cp.multiply(cp)?.scale(params.f0 * params.t_g);
    let target = num.degree();
    let arrest = cr.scale(4.0 * inertia).elevate(target)?;
    let damping = demand
        .multiply(cp)?
        .scale(params.damping * params.t_g * params.f0);
    Ok((num, arrest.sub(&damping)?))
}

/// Largest gap between the exact nadir and the approximation curve built from
/// the per-coefficient values, over `samples + 1` uniform points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproximationReport {
    pub max_abs_deviation_hz: f64,
    pub at_tau: f64,
    /// Samples skipped because either side is insecure.
    pub insecure_samples: usize,
}

pub fn approximation_deviation(
    cp: &BernsteinSegment,
    cr: &BernsteinSegment,
    inertia: f64,
    demand: &BernsteinSegment,
    params: &SystemParams,
    samples: usize,
) -> Result<ApproximationReport> {
    let approx = nadir_coefficient_approx(cp, cr, inertia, demand, params)?;
    let mut report = ApproximationReport {
        max_abs_deviation_hz: 0.0,
        at_tau: 0.0,
        insecure_samples: 0,
    };
    if approx.iter().any(|o| *o == NadirOutcome::Insecure) {
        report.insecure_samples = samples + 1;
        return Ok(report);
    }
    let curve = BernsteinSegment::new(cp.hour(), approx.iter().map(|o| o.hz()).collect())?;
    let (num, den) = nadir_rational(cp, cr, inertia, demand, params)?;
    for k in 0..=samples {
        let tau = k as f64 / samples.max(1) as f64;
        let p = cp.eval(tau)?;
        let d = den.eval(tau)?;
        let exact = if p == 0.0 {
            0.0
        } else if d > 0.0 {
            num.eval(tau)? / d
        } else {
            report.insecure_samples += 1;
            continue;
        };
        let dev = (exact - curve.eval(tau)?).abs();
        if dev > report.max_abs_deviation_hz {
            report.max_abs_deviation_hz = dev;
            report.at_tau = tau;
        }
    }
    Ok(report)
}

/// Integrates the aggregated swing equation with RK4 (1 ms step, 60 s) and
/// returns the largest frequency drop in Hz. Overshoot above nominal is not a
/// nadir and is ignored.
///
/// `(2H/f0) d(df)/dt = -p + min(t/Tg, 1) r - D demand df / f0`, with `df` the
/// frequency drop taken positive.
pub fn ode_nadir_oracle(p_lost: f64, reserve: f64, inertia: f64, demand: f64, params: &SystemParams) -> Result<f64> {
    if !(inertia > 0.0) {
        return Err(Error::Domain(format!("inertia must be positive (got {inertia})")));
    }
    const STEP: f64 = 1e-3;
    const STEPS: usize = 60_000;
    let m = 2.0 * inertia / params.f0;
    let rhs = |t: f64, df: f64| {
        let delivered = (t / params.t_g).min(1.0) * reserve;
        (p_lost - delivered - params.damping * demand * df / params.f0) / m
    };
    let mut df = 0.0f64;
    let mut worst = 0.0f64;
    for k in 0..STEPS {
        let t = k as f64 * STEP;
        let k1 = rhs(t, df);
        let k2 = rhs(t + STEP / 2.0, df + STEP / 2.0 * k1);
        let k3 = rhs(t + STEP / 2.0, df + STEP / 2.0 * k2);
        let k4 = rhs(t + STEP, df + STEP * k3);
        df += STEP / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        worst = worst.max(df);
    }
    Ok(worst)
}

/// Worst nadir over all outage candidates at one minute.
#[derive(Debug, Clone, PartialEq)]
pub struct MinuteNadir {
    pub minute: usize,
    /// Index of the unit whose loss is worst; `None` when nothing is online.
    pub worst_unit: Option<usize>,
    pub nadir: NadirOutcome,
}

/// Minute-by-minute exact nadir of a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct NadirSweep {
    pub unit_ids: Vec<String>,
    pub minutes: Vec<MinuteNadir>,
}

/// Evaluates the exact nadir for every minute and every committed unit.
pub fn nadir_sweep(schedule: &Schedule, profiles: &ApproximatedProfiles, case: &CaseInput) -> Result<NadirSweep> {
    let horizon = schedule.horizon();
    if profiles.demand.horizon() < horizon || schedule.unit_ids.len() != case.units.len() {
        return Err(Error::Model("schedule does not match the case".into()));
    }
    let minutes = (0..horizon * MINUTES_PER_HOUR)
        .into_par_iter()
        .map(|minute| {
            let t = minute / MINUTES_PER_HOUR;
            let tau = (minute % MINUTES_PER_HOUR) as f64 / MINUTES_PER_HOUR as f64;
            let online: Vec<usize> = (0..case.units.len())
                .filter(|&i| schedule.commitment.is_on(i, t))
                .collect();
            let demand = profiles.demand.segment(t).eval(tau)?;
            let reserves: Vec<f64> = (0..case.units.len())
                .map(|i| schedule.reserve[i].segment(t).eval(tau))
                .collect::<Result<_>>()?;
            let total_hm: f64 = online.iter().map(|&i| case.units[i].stored_energy()).sum();
            let mut worst = MinuteNadir {
                minute,
                worst_unit: None,
                nadir: NadirOutcome::Arrested(0.0),
            };
            for &l in &online {
                let ctx = OutageContext {
                    lost_unit: l,
                    hour: t,
                    inertia: total_hm - case.units[l].stored_energy(),
                    lost_power: schedule.power[l].segment(t).eval(tau)?,
                    reserve: online.iter().filter(|&&i| i != l).map(|&i| reserves[i]).sum(),
                    demand,
                };
                let outcome = nadir_exact(&ctx, &case.params);
                if worst.worst_unit.is_none() || outcome.hz() > worst.nadir.hz() {
                    worst.worst_unit = Some(l);
                    worst.nadir = outcome;
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NadirSweep {
        unit_ids: schedule.unit_ids.clone(),
        minutes,
    })
}

impl NadirSweep {
    pub fn minutes_above(&self, threshold: f64) -> usize {
        self.minutes.iter().filter(|m| m.nadir.exceeds(threshold)).count()
    }

    /// Largest nadir per hour (infinite when insecure).
    pub fn per_hour_worst(&self) -> Vec<f64> {
        self.minutes
            .chunks(MINUTES_PER_HOUR)
            .map(|c| c.iter().map(|m| m.nadir.hz()).fold(0.0, f64::max))
            .collect()
    }

    pub fn worst(&self) -> f64 {
        self.minutes.iter().map(|m| m.nadir.hz()).fold(0.0, f64::max)
    }

    pub fn report(&self, threshold: f64) -> NadirReport {
        NadirReport {
            threshold_hz: threshold,
            minutes_above: self.minutes_above(threshold),
            per_hour_worst_nadir: self
                .per_hour_worst()
                .into_iter()
                .map(|v| v.is_finite().then_some(v))
                .collect(),
        }
    }

    /// `minute,worst_unit,nadir_hz`; insecure minutes are written as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("minute,worst_unit,nadir_hz\n");
        for m in &self.minutes {
            let unit = m.worst_unit.map(|i| self.unit_ids[i].as_str()).unwrap_or("");
            let value = match m.nadir {
                NadirOutcome::Arrested(v) => format!("{v}"),
                NadirOutcome::Insecure => "inf".into(),
            };
            writeln!(out, "{},{unit},{value}", m.minute).unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Security metric at one threshold. Insecure hours carry `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NadirReport {
    pub threshold_hz: f64,
    pub minutes_above: usize,
    pub per_hour_worst_nadir: Vec<Option<f64>>,
}

/// Number of minutes whose worst single-outage nadir exceeds `threshold`.
pub fn minutes_above(
    schedule: &Schedule,
    profiles: &ApproximatedProfiles,
    case: &CaseInput,
    threshold: f64,
) -> Result<usize> {
    Ok(nadir_sweep(schedule, profiles, case)?.minutes_above(threshold))
}
