//! Frequency nadir after losing one unit: closed form, the per-coefficient
//! approximation, and the swing-equation ODE oracle.
//!
//! cargo run --release --example nadir_evaluation

use cfcuc::bernstein::BernsteinSegment;
use cfcuc::desk::desk_case;
use cfcuc::freq::{approximation_deviation, nadir_coefficient_approx, nadir_exact, ode_nadir_oracle, OutageContext};
use cfcuc::sysmodel::Mode;

fn main() -> cfcuc::Result<()> {
    let mut params = desk_case(Mode::Cfcuc, 2.5).params;
    let ctx = OutageContext {
        lost_unit: 0,
        hour: 0,
        inertia: 100.0,
        lost_power: 5.0,
        reserve: 5.0,
        demand: 40.0,
    };
    println!("closed form, D = {}: {:?}", params.damping, nadir_exact(&ctx, &params));
    let ode = ode_nadir_oracle(ctx.lost_power, ctx.reserve, ctx.inertia, ctx.demand, &params)?;
    println!("ODE oracle,  D = {}: {ode:.4} Hz", params.damping);
    let damping = params.damping;
    params.damping = 0.0;
    println!("closed form, D = 0:    {:?}", nadir_exact(&ctx, &params));
    let ode0 = ode_nadir_oracle(ctx.lost_power, ctx.reserve, ctx.inertia, ctx.demand, &params)?;
    println!("ODE oracle,  D = 0:    {ode0:.4} Hz");
    params.damping = damping;

    // one hour in which the lost unit ramps up while reserve shrinks
    let p = BernsteinSegment::new(0, vec![6.0, 7.0, 9.0, 10.0])?;
    let r = BernsteinSegment::new(0, vec![12.0, 11.0, 9.5, 9.0])?;
    let d = BernsteinSegment::new(0, vec![28.0, 29.0, 31.0, 31.5])?;
    let h = 116.0;
    let approx = nadir_coefficient_approx(&p, &r, h, &d, &params)?;
    println!("\nper-coefficient nadir: {:?}", approx.iter().map(|o| o.hz()).collect::<Vec<_>>());
    for tau in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let ctx = OutageContext {
            lost_unit: 0,
            hour: 0,
            inertia: h,
            lost_power: p.eval(tau)?,
            reserve: r.eval(tau)?,
            demand: d.eval(tau)?,
        };
        println!("  tau={tau:.2} exact {:.4} Hz", nadir_exact(&ctx, &params).hz());
    }
    let report = approximation_deviation(&p, &r, h, &d, &params, 1000)?;
    println!(
        "largest gap between exact and approximated curve: {:.2e} Hz at tau={:.3}",
        report.max_abs_deviation_hz, report.at_tau
    );
    Ok(())
}
