use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use frametk_cli::{emit_fixtures, run, ExperimentConfig};

/// Exit status: 0 when every requested verification passes, 1 when one fails,
/// 2 on configuration, parameter or I/O errors.
#[derive(Debug, Parser)]
#[command(name = "frametk", version, about = "Run frame-theory experiments from JSON configs")]
struct Args {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    verbose: bool,
    #[command(subcommand)]
    action: Option<Action>,
}

#[derive(Debug, Subcommand)]
enum Action {
    /// Write every worked example into `--out`.
    EmitFixtures,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(args: &Args) -> Result<bool, Box<dyn std::error::Error>> {
    if let Some(Action::EmitFixtures) = args.action {
        let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("fixtures"));
        for p in emit_fixtures(&dir)? {
            if args.verbose {
                eprintln!("wrote {}", p.display());
            }
        }
        return Ok(true);
    }
    let path = args.config.as_ref().ok_or("--config is required")?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
    let report = run(&cfg, &out)?;
    if args.verbose {
        for c in &report.checks {
            let tag = if c.informational { "INFO" } else if c.pass { "PASS" } else { "FAIL" };
            eprintln!("{tag} {} = {:.6e} {} {:.6e} (tol {:.0e})", c.name, c.value, c.relation, c.threshold, c.tolerance);
        }
        eprintln!("report: {}", out.join(frametk_cli::REPORT_FILE).display());
    }
    println!("{}", if report.pass { "PASS" } else { "FAIL" });
    Ok(report.pass)
}
