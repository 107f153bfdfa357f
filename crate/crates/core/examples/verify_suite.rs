//! The verification suite at a reduced scale, through the library API.
//! `banach-zeros verify configs/verify.toml` runs it at full scale.
//!
//! cargo run --release --example verify_suite

use banach_zeros::cli::config::{Tolerances, VerifyScale};
use banach_zeros::cli::verify::run_all;

fn main() -> banach_zeros::Result<()> {
    let scale = VerifyScale {
        circle_trials: 4000,
        torus_trials: 1000,
        torus_cells: 256,
        ring_families: 20,
        density_frames: 200,
        determinism_trials: 500,
        ..VerifyScale::default()
    };
    let results = run_all(&scale, &Tolerances::default(), None)?;
    for r in &results {
        println!(
            "{} {:<40} worst {:.3e} (tolerance {:.1e}) {}",
            r.id,
            r.name,
            r.value,
            r.tolerance,
            if r.passed { "PASS" } else { "FAIL" }
        );
        for n in &r.notes {
            println!("    {n}");
        }
    }
    Ok(())
}
