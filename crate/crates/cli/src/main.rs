//! Command-line front end for the buffer-aided relaying simulator.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error,
//! 4 curves not comparable at the requested BER. The worker count follows
//! `RAYON_NUM_THREADS`.

mod compare;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const EXIT_NOT_COMPARABLE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "bastc",
    version,
    about = "Link-level Monte Carlo simulator for buffer-aided cooperative relaying"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a BER sweep and write ber.csv plus metadata.json.
    Simulate(SimulateArgs),
    /// Horizontal dB gap between two result CSVs at target BER levels.
    Compare(CompareArgs),
    /// Tabulate pairwise-error-probability bounds.
    Pep(PepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario/sweep configuration (TOML).
    #[arg(long, conflicts_with = "from_metadata")]
    config: Option<PathBuf>,
    /// Named preset; applied before --config overrides.
    #[arg(long, conflicts_with = "from_metadata")]
    preset: Option<String>,
    /// Replay a previous run from its metadata.json.
    #[arg(long)]
    from_metadata: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Override the sweep seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the per-point trial cap.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    /// First curve (CSV).
    #[arg(long)]
    a: PathBuf,
    /// Second curve (CSV).
    #[arg(long)]
    b: PathBuf,
    /// Target BER level(s); repeatable.
    #[arg(long = "at-ber", required = true)]
    at_ber: Vec<f64>,
}

#[derive(Args)]
struct PepArgs {
    /// Configuration providing the `[pep]` grid.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; prints to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Simulate(args) => simulate(args),
        Command::Compare(args) => run_compare(args),
        Command::Pep(args) => run_pep(args),
    }
}

fn simulate(args: SimulateArgs) -> ExitCode {
    let cfg = if let Some(meta_path) = &args.from_metadata {
        match output::config_from_metadata(meta_path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    } else {
        match (&args.config, &args.preset) {
            (Some(path), preset) => {
                // --preset beneath --config is the default layer; a preset
                // named inside the file wins.
                let text = match std::fs::read_to_string(path) {
                    Ok(t) => t,
                    Err(e) => {
                        eprintln!("error: cannot read {}: {e}", path.display());
                        return ExitCode::from(EXIT_CONFIG);
                    }
                };
                match config::parse_config_str_with_base(&text, preset.as_deref()) {
                    Ok(cfg) => cfg,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(EXIT_CONFIG);
                    }
                }
            }
            (None, Some(name)) => match config::preset(name) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            },
            (None, None) => {
                eprintln!("error: simulate needs --config, --preset or --from-metadata");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    };

    let mut cfg = cfg;
    if let Some(seed) = args.seed {
        cfg.sweep.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.sweep.max_trials = trials;
    }
    if let Err(e) = cfg.scenario.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }

    match output::run_experiment(&cfg, &args.out) {
        Ok(curve) => {
            for p in &curve.points {
                let flag = if p.reached_min_errors {
                    ""
                } else {
                    "  [floor]"
                };
                println!(
                    "snr {:>6.2} dB  ber {:.6e}  ({} errors / {} bits){flag}",
                    p.snr_db, p.ber, p.errors, p.bits
                );
            }
            println!("wrote {}", args.out.join("ber.csv").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn run_compare(args: CompareArgs) -> ExitCode {
    let a = match compare::read_curve(&args.a) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let b = match compare::read_curve(&args.b) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    for &target in &args.at_ber {
        match compare::compare_curves(&a, &b, target) {
            Ok(report) => {
                println!(
                    "ber {:.3e}: a @ {:.3} dB, b @ {:.3} dB, gap {:.3} dB",
                    report.target_ber, report.snr_a_db, report.snr_b_db, report.gap_db
                );
            }
            Err(compare::CompareError::NotComparable(m)) => {
                eprintln!("not comparable: {m}");
                return ExitCode::from(EXIT_NOT_COMPARABLE);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_RUNTIME);
            }
        }
    }
    ExitCode::SUCCESS
}

fn run_pep(args: PepArgs) -> ExitCode {
    let cfg = match &args.config {
        Some(path) => match config::parse_config(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        None => config::ExperimentConfig::default(),
    };
    let table = output::pep_table(&cfg.pep);
    match &args.out {
        Some(dir) => {
            if let Err(e) = std::fs::create_dir_all(dir)
                .and_then(|_| std::fs::write(dir.join("pep.csv"), &table))
            {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_RUNTIME);
            }
            println!("wrote {}", dir.join("pep.csv").display());
        }
        None => print!("{table}"),
    }
    ExitCode::SUCCESS
}
