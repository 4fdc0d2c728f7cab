//! Builds the desk-case scheduling model and writes it as MPS, so it can be
//! handed to any MILP solver.
//!
//! cargo run --example export_mps [-- cuc|rocof-cuc out.mps]

use cfcuc::cuc::assemble;
use cfcuc::desk::desk_case;
use cfcuc::milp::export_mps;
use cfcuc::sysmodel::{approximate_profiles, Mode};

fn main() -> cfcuc::Result<()> {
    let mut args = std::env::args().skip(1);
    let mode: Mode = args.next().as_deref().unwrap_or("rocof-cuc").parse()?;
    let out = args.next().unwrap_or_else(|| "target/desk.mps".into());
    if mode.has_nadir() {
        eprintln!("cfcuc needs a trained surrogate; see the train_surrogate example");
        std::process::exit(2);
    }
    let case = desk_case(mode, 2.5);
    let profiles = approximate_profiles(&case)?;
    let (model, _) = assemble(&case, &profiles, mode, None)?;
    let text = export_mps(&model);
    std::fs::write(&out, &text).map_err(|e| cfcuc::Error::io(&out, e))?;
    let binaries = model.vars().iter().filter(|v| v.kind == cfcuc::milp::VarKind::Binary).count();
    println!(
        "{out}: {} columns ({binaries} binary), {} rows, {} bytes",
        model.num_vars(),
        model.num_constraints(),
        text.len()
    );
    for prefix in ["logic_", "minup_", "c0_", "c1_", "subig_", "pmax_", "rup_", "bal_", "rocof_", "qss_"] {
        println!("  {prefix:<8} {:>5} rows", model.count_rows_with_prefix(prefix));
    }
    Ok(())
}
