//! Solves the desk case in every mode and prints a cost / security table.
//!
//! cargo run --release --example compare_modes [-- out_dir]

use cfcuc::cli::{solve_case, RunConfig};
use cfcuc::desk::desk_case;
use cfcuc::nadirlearn::{fit_linear, generate_dataset};
use cfcuc::sysmodel::Mode;

fn main() -> cfcuc::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/compare_modes".into());
    let runs = [
        (Mode::Cuc, 2.5),
        (Mode::RocofCuc, 2.5),
        (Mode::Cfcuc, 3.0),
        (Mode::Cfcuc, 2.5),
        (Mode::Cfcuc, 2.0),
    ];
    println!("{:<10} {:>6} {:>10} {:>8} {:>9} {:>9} {:>7}", "mode", "limit", "cost k€", "time s", ">2.5 Hz", ">limit", "score");
    for (mode, limit) in runs {
        let case = desk_case(mode, limit);
        let surrogate = if mode.has_nadir() {
            let data = generate_dataset(&case, 10_000, 7)?;
            Some(fit_linear(&data, limit, 7)?)
        } else {
            None
        };
        let config = RunConfig::new("desk", format!("{out}/{mode}_{limit}"));
        let run = solve_case(&case, surrogate.as_ref(), &config)?;
        let s = &run.summary;
        println!(
            "{:<10} {:>6} {:>10.2} {:>8.1} {:>9} {:>9} {:>7}",
            mode.as_str(),
            if mode.has_nadir() { format!("{limit}") } else { "-".into() },
            s.objective_keur,
            s.runtime_s,
            s.minutes_above_2p5hz,
            if mode.has_nadir() { s.minutes_above_limit.to_string() } else { "-".into() },
            s.score.map(|x| format!("{:.4}", x)).unwrap_or_else(|| "-".into()),
        );
        match s.worst_nadir_hz {
            Some(hz) => println!("{:<10} worst nadir {hz:.3} Hz", ""),
            None => println!("{:<10} worst nadir: not arrested", ""),
        }
    }
    Ok(())
}
