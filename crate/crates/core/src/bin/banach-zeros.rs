use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use banach_zeros::cli::{run, Command, LoadedConfig, RunOptions};

#[derive(Parser)]
#[command(version, about = "Expected zeros of random function systems via Banach sets")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration
    config: PathBuf,
    /// Worker threads; results do not depend on this
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the seed in the config
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: `output.dir` from the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multiplies every verification tolerance
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// n!/(2π)ⁿ times the (mixed) volume of the ellipsoid fields
    ExpectedZeros(Common),
    /// Monte Carlo zero counts
    McZeros(Common),
    /// Pairing matrices, ranks and kernels of the generator ring
    RingReport(Common),
    /// Densities of a ring element on frames
    DensityEval(Common),
    /// Full verification suite; exit code 1 on any failure
    Verify(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Cmd::ExpectedZeros(c) => (Command::ExpectedZeros, c),
        Cmd::McZeros(c) => (Command::McZeros, c),
        Cmd::RingReport(c) => (Command::RingReport, c),
        Cmd::DensityEval(c) => (Command::DensityEval, c),
        Cmd::Verify(c) => (Command::Verify, c),
    };
    let opts = RunOptions { threads: common.threads, seed: common.seed, tol_scale: common.tol_scale, out: common.out };
    let result = LoadedConfig::load(&common.config).and_then(|lc| {
        let report = run(cmd, &lc, &opts)?;
        let dir = opts.out.clone().unwrap_or_else(|| lc.config.output.dir.clone());
        report.write(&dir)?;
        Ok((report, dir))
    });
    match result {
        Ok((report, dir)) => {
            print!("{}", report.to_text());
            println!("wrote {}", dir.display());
            if report.passed == Some(false) {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
