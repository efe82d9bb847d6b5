use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use miwave::experiment::{
    format_report, read_report, run_experiment, write_design_outputs, write_outputs,
    write_roc_outputs, ExperimentConfig,
};
use miwave::Error;

/// Matched-illumination waveform design with MTSFM synthesis.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Water-filling MI designs only.
    Design(RunArgs),
    /// Full pipeline: design, MTSFM fit, LFM baseline, ROC.
    Fit(RunArgs),
    /// Monte Carlo ROC of the MI designs.
    Roc(RunArgs),
    /// Print the summary of a previous `fit` run.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides both the fit and the Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (defaults to the config's `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of multistart fits per energy.
    #[arg(long)]
    starts: Option<usize>,
    /// Monte Carlo H1 trials per energy.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Config whose `output_dir` holds the report.
    #[arg(long, required_unless_present = "out")]
    config: Option<PathBuf>,
    /// Directory containing `report.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &RunArgs) -> Result<(ExperimentConfig, PathBuf), Error> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.fit.seed = s;
        cfg.monte_carlo.seed = s;
    }
    if let Some(n) = args.starts {
        cfg.fit.n_starts = n;
    }
    if let Some(n) = args.trials {
        cfg.monte_carlo.trials = n;
    }
    cfg.validate()?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Design(args) => {
            let (cfg, out) = load(&args)?;
            let report = write_design_outputs(&cfg, &out)?;
            for r in &report.records {
                println!(
                    "E={}: lambda={:.6e} active={} d2={:.6}",
                    r.energy, r.lambda, r.active_bins, r.d_squared
                );
            }
        }
        Command::Fit(args) => {
            let (cfg, out) = load(&args)?;
            let run = run_experiment(&cfg)?;
            write_outputs(&run, &out)?;
            print!("{}", format_report(&run.report));
        }
        Command::Roc(args) => {
            let (cfg, out) = load(&args)?;
            for (e, roc) in cfg.energies.iter().zip(write_roc_outputs(&cfg, &out)?) {
                println!("E={e}: d2={:.6}", roc.d_squared);
                for p in &roc.points {
                    println!(
                        "  p_fa={} p_d={:.4} +/- {:.4} (analytic {:.4})",
                        p.p_fa_target, p.p_d_hat, p.p_d_stderr, p.p_d_analytic
                    );
                }
            }
        }
        Command::Report(args) => {
            let dir = match (args.out, args.config) {
                (Some(d), _) => d,
                (None, Some(c)) => ExperimentConfig::load(&c)?.output_dir,
                (None, None) => unreachable!("clap requires one of --out or --config"),
            };
            print!("{}", format_report(&read_report(&Path::new(&dir).join("report.json"))?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
