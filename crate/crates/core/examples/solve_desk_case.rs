//! Solves the bundled desk case through the same pipeline as `cfcuc solve`
//! and prints the merged trajectory of one unit.
//!
//! cargo run --release --example solve_desk_case [-- mode [limit]]

use std::path::PathBuf;

use cfcuc::cli::{cmd_solve, RunConfig};
use cfcuc::sysmodel::Mode;

fn main() -> cfcuc::Result<()> {
    let mut args = std::env::args().skip(1);
    let mode: Mode = args.next().as_deref().unwrap_or("rocof-cuc").parse()?;
    let limit: Option<f64> = args.next().and_then(|s| s.parse().ok());

    let mut config = RunConfig::new(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/desk_case.json"),
        format!("target/solve_desk_case/{mode}"),
    );
    config.mode = Some(mode);
    config.nadir_limit_hz = limit;
    config.train_on_the_fly = true;
    config.seed = 7;

    let run = cmd_solve(&config)?;
    println!("{}", serde_json::to_string_pretty(&run.summary)?);

    let s = &run.schedule;
    for (i, id) in s.unit_ids.iter().enumerate() {
        let hours: String = s.commitment.u[i].iter().map(|&u| if u == 1 { '#' } else { '.' }).collect();
        println!("{id:>4} {hours}");
    }
    // trajectory of the last unit, which starts and stops inside the day
    let last = s.unit_ids.len() - 1;
    println!("\n{} output, quarter-hourly:", s.unit_ids[last]);
    for q in 0..s.horizon() * 4 {
        let t = q as f64 / 4.0;
        let p = s.power[last].eval_time(t)?;
        if p > 1e-9 {
            println!("  t={t:>5.2} h  {p:>7.3} MW");
        }
    }
    println!("artifacts in {}", config.output_dir.display());
    Ok(())
}
