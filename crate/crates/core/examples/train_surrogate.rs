//! Generates the synthetic outage dataset for the desk case and fits the
//! linear nadir surrogate at three thresholds.
//!
//! cargo run --release --example train_surrogate [-- samples seed]

use cfcuc::desk::desk_case;
use cfcuc::nadirlearn::{fit_linear, fit_linear_with, generate_dataset, write_dataset_csv, FitOptions};
use cfcuc::sysmodel::Mode;

fn main() -> cfcuc::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);

    let case = desk_case(Mode::Cfcuc, 2.5);
    let data = generate_dataset(&case, n, seed)?;
    std::fs::create_dir_all("target").ok();
    write_dataset_csv("target/nadir_dataset.csv", &data)?;
    println!("{} points written to target/nadir_dataset.csv", data.len());

    for threshold in [3.0, 2.5, 2.0] {
        let insecure = data.iter().filter(|p| !p.secure(threshold)).count();
        let plain = fit_linear_with(&data, threshold, seed, FitOptions::plain())?;
        let model = fit_linear(&data, threshold, seed)?;
        println!(
            "{threshold} Hz: {insecure} insecure points, plain score {:.4}, fitted score {:.4}, alpha {:?}",
            plain.score, model.score, model.alpha
        );
    }
    Ok(())
}
