//! Config-driven runner for the level-set and spectral verifications.
//!
//! Exit status: 0 when every experiment passes, 2 when any fails or stops
//! with an error, 1 on a configuration or I/O problem. Configuration errors
//! are all reported before anything is computed.

pub mod config;
pub mod output;
pub mod plan;
pub mod run;

use std::path::PathBuf;

use lplevel::fields::Catalog;

pub use config::{ConfigError, Experiment, GeometricGrid, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

/// Command-line overrides applied on top of a [`RunConfig`].
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

pub fn run(cfg: &RunConfig, overrides: &Overrides) -> i32 {
    let catalog = Catalog::standard();
    let seed = overrides.seed.unwrap_or(cfg.rng_seed);
    let plans = match plan::validate(cfg, seed, &catalog) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let dir = overrides.output_dir.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let jobs = overrides.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let outcomes = match run::execute_all(&plans, jobs) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    for (plan, outcome) in plans.iter().zip(&outcomes) {
        match outcome {
            Ok(r) => eprintln!(
                "{:<6} {}  measured {:.6} reference {:.6} rel_error {:.3e} (tolerance {:.3e})",
                if r.passed { "PASS" } else { "FAIL" },
                plan.name,
                r.measured,
                r.reference,
                r.rel_error,
                r.tolerance
            ),
            Err(e) => eprintln!("ERROR  {}  {e}", plan.name),
        }
    }
    let counts = match output::write_all(&dir, &plans, &outcomes, seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: cannot write reports to {}: {e}", dir.display());
            return EXIT_CONFIG;
        }
    };
    eprintln!(
        "{} passed, {} failed, {} errored; reports in {}",
        counts.passed,
        counts.failed,
        counts.errored,
        dir.display()
    );
    if counts.failed + counts.errored == 0 {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}
