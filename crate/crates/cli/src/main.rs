use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lplevel::asymptotics::FormulaId;
use lplevel::fields::{Catalog, CATALOG_NAMES};
use lplevel_cli::{Overrides, RunConfig, EXIT_CONFIG};

/// Runs level-set and Littlewood-Paley verifications described by a TOML
/// config and writes JSON/CSV reports.
#[derive(Parser, Debug)]
#[command(name = "lplevel", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    /// Run seed; overrides `rng_seed` in the config.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    /// Print the available formula ids and exit.
    #[arg(long)]
    list_experiments: bool,
    /// Print the catalog functions and exit.
    #[arg(long)]
    list_functions: bool,
}

fn list_functions() {
    let catalog = Catalog::standard();
    for name in CATALOG_NAMES {
        let u = catalog.get(name, 1).expect("catalog entry");
        let lp = if u.is_in_lp() { "in L^p" } else { "not in L^p" };
        let support = u.support_radius().map_or("unbounded support".to_string(), |r| format!("support radius {r}"));
        println!("{name:<16} dimensions 1-3  {:<13} {lp:<11} {support}", format!("{:?}", u.smoothness()).to_lowercase());
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_experiments || args.list_functions {
        if args.list_experiments {
            for id in FormulaId::ALL {
                println!("{:<18} {}", id.as_str(), id.description());
            }
        }
        if args.list_functions {
            list_functions();
        }
        return ExitCode::SUCCESS;
    }
    let Some(path) = args.config else {
        eprintln!("error: --config PATH is required (see --help)");
        return ExitCode::from(EXIT_CONFIG as u8);
    };
    let cfg = match RunConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let overrides = Overrides { output_dir: args.output, seed: args.seed, jobs: args.jobs.map(|j| j as usize) };
    ExitCode::from(lplevel_cli::run(&cfg, &overrides) as u8)
}
