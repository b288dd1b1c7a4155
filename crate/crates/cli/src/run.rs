//! Execution of validated plans.

use lplevel::asymptotics::{verify_bbm, verify_gradient_formula, verify_lp_formula, verify_msh, FormulaId, Row, VerificationReport};
use lplevel::measure::{measure_profile, QuotientParams};
use lplevel::norms::check_theorem11_bounds_with;
use lplevel::spectral::{
    build_cutoffs, density_report, embedding_ratio_scan, fpp_ratio_scan, kernel_decay_report, scan_report, GridField,
};
use lplevel::{Error, Result};
use rayon::prelude::*;

use crate::plan::{Plan, Task};

/// Result of one experiment: a report, or the error that stopped it.
pub type Outcome = std::result::Result<VerificationReport, Error>;

pub fn execute(plan: &Plan) -> Outcome {
    let u = plan.u.as_ref();
    let need_u = || u.ok_or_else(|| Error::InvalidParameter(format!("{}: no function", plan.name)));
    match &plan.task {
        Task::Profile { p, lambdas, estimator } => {
            let u = need_u()?;
            match plan.formula_id {
                FormulaId::LpFormula => verify_lp_formula(u, *p, estimator, lambdas, plan.tolerance),
                FormulaId::GradientFormula => verify_gradient_formula(u, *p, estimator, lambdas, plan.tolerance),
                _ => {
                    let profile = measure_profile(u, &QuotientParams::new(0.0, *p)?, lambdas, estimator)?;
                    let mut report = check_theorem11_bounds_with(u, *p, &profile, plan.tolerance)?;
                    report.table = profile
                        .entries
                        .iter()
                        .map(|e| Row { x: e.lambda, value: e.scaled_value, error: e.error })
                        .collect();
                    Ok(report)
                }
            }
        }
        Task::Bbm { p, domain, s_grid, seminorm } => verify_bbm(need_u()?, *p, domain, s_grid, seminorm, plan.tolerance),
        Task::Msh { p, s_grid, seminorm } => verify_msh(need_u()?, *p, s_grid, seminorm, plan.tolerance),
        Task::Scan { p, s_grid, scan_mode, scan } => {
            let u = need_u()?;
            let rows = if plan.formula_id == FormulaId::FppScan {
                fpp_ratio_scan(u, *p, s_grid, scan)?
            } else {
                embedding_ratio_scan(u, *p, s_grid, *scan_mode, scan)?
            };
            let mut report = scan_report(plan.formula_id, &rows)?;
            report.passed = report.rel_error <= plan.tolerance;
            report.tolerance = plan.tolerance;
            Ok(report)
        }
        Task::Kernel { s, j_values, t_values, grid, sharpness } => {
            kernel_decay_report(*s, j_values, t_values, grid, &build_cutoffs(*sharpness)?, plan.tolerance)
        }
        Task::Density { params, big_j, grid, sharpness } => {
            let field = GridField::sample(*grid, need_u()?)?;
            density_report(&field, big_j, params, &build_cutoffs(*sharpness)?, plan.tolerance)
        }
    }
}

/// Runs every plan on a pool of `jobs` threads. Results come back in plan
/// order and do not depend on `jobs`.
pub fn execute_all(plans: &[Plan], jobs: usize) -> Result<Vec<Outcome>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| plans.par_iter().map(execute).collect()))
}
