//! Drive a subcommand from an in-memory config and inspect the report,
//! without going through the binary.
//!
//! cargo run --example run_config

use banach_zeros::cli::{run, Command, LoadedConfig, RunOptions};

const CONFIG: &str = r#"
manifold = "circle"
[[spaces]]
kind = "trig"
degrees = [5]
[mc]
trials = 2000
seed = 42
"#;

fn main() -> banach_zeros::Result<()> {
    let lc = LoadedConfig::parse(CONFIG, Default::default())?;
    let opts = RunOptions { threads: Some(2), ..Default::default() };
    for cmd in [Command::ExpectedZeros, Command::McZeros] {
        let report = run(cmd, &lc, &opts)?;
        println!("{} (config {})", cmd.name(), &report.config_hash[..12]);
        for (label, value) in &report.entries {
            println!("  {label}: {value:?}");
        }
    }
    match LoadedConfig::parse("manifold = \"circle\"\nspeed = 3\n", Default::default()) {
        Err(e) => println!("unknown key rejected with exit code {}: {e}", e.exit_code()),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
