//! Loads the desk case, fits its demand and RES profiles hour by hour and
//! writes the fitted curves next to the raw samples.
//!
//! cargo run --example fit_profiles [-- case.json out.csv]

use std::path::PathBuf;

use cfcuc::sysmodel::{approximate_profiles, load_case};

fn main() -> cfcuc::Result<()> {
    let mut args = std::env::args().skip(1);
    let case_path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/desk_case.json"));
    let out = args.next().unwrap_or_else(|| "target/fitted_profiles.csv".into());

    let case = load_case(&case_path)?;
    let fit = approximate_profiles(&case)?;
    let peak = case.demand_samples.max();
    println!("hour  demand rms (MW)  % of peak   res rms (MW)");
    for t in 0..case.horizon {
        println!(
            "{t:>4}  {:>15.4}  {:>9.3}  {:>13.4}",
            fit.demand_rms[t],
            100.0 * fit.demand_rms[t] / peak,
            fit.res_rms[t]
        );
    }
    let c0 = fit.demand.c0_residuals().iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let c1 = fit.demand.c1_residuals().iter().fold(0.0f64, |m, r| m.max(r.abs()));
    println!("largest boundary jump: {c0:.2e} MW, slope jump: {c1:.2e} MW/h");

    let mut w = csv::Writer::from_path(&out)?;
    w.write_record(["minute", "demand_mw", "demand_fit_mw", "res_mw", "res_fit_mw"])?;
    let step = case.demand_samples.resolution_minutes as usize;
    for (k, (d, r)) in case.demand_samples.values_mw.iter().zip(&case.res_samples.values_mw).enumerate() {
        let time = (k * step) as f64 / 60.0;
        w.write_record([
            (k * step).to_string(),
            d.to_string(),
            fit.demand.eval_time(time)?.to_string(),
            r.to_string(),
            fit.res.eval_time(time)?.to_string(),
        ])?;
    }
    w.flush().map_err(|e| cfcuc::Error::io(&out, e))?;
    println!("wrote {out}");
    Ok(())
}
