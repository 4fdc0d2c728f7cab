//! Segment algebra on a single hour: evaluation, derivative, elevation,
//! products, bounds, energy, and a least-squares fit.
//!
//! cargo run --example bernstein_algebra

use cfcuc::bernstein::{fit_segment, BernsteinSegment, FitAnchor};

fn main() -> cfcuc::Result<()> {
    // a unit ramping 4 -> 10 MW over the hour
    let p = BernsteinSegment::new(0, vec![4.0, 4.0, 10.0, 10.0])?;
    println!("p(0.5) = {} MW", p.eval(0.5)?);
    println!("dp/dt coefficients = {:?} MW/h", p.derivative().coeffs());
    println!("energy = {} MWh", p.integral());
    let (lo, hi) = p.coeff_bounds();
    println!("bounds from coefficients: [{lo}, {hi}] MW");

    let elevated = p.elevate(5)?;
    println!("degree 5 form = {:?}", elevated.coeffs());

    let r = BernsteinSegment::new(0, vec![6.0, 5.0, 3.0, 2.0])?;
    let sum = p.add(&r)?;
    let prod = p.multiply(&r)?;
    println!("p + r = {:?}", sum.coeffs());
    println!("p * r has degree {} and value {} at 0.3 (direct {})", prod.degree(), prod.eval(0.3)?, p.eval(0.3)? * r.eval(0.3)?);

    // fit a sampled sine with the start value pinned
    let samples: Vec<(f64, f64)> = (0..=12)
        .map(|k| {
            let tau = k as f64 / 12.0;
            (tau, 20.0 + 3.0 * (std::f64::consts::PI * tau).sin())
        })
        .collect();
    let anchor = FitAnchor {
        value: 20.0,
        slope: None,
    };
    let fit = fit_segment(0, &samples, 3, Some(anchor))?;
    println!("fitted coefficients = {:?}", fit.coeffs());
    Ok(())
}
