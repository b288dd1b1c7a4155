//! Validation of a [`RunConfig`] into fully resolved experiment plans.
//! Everything that can be checked without computing is checked here.

use std::collections::BTreeSet;

use lplevel::asymptotics::FormulaId;
use lplevel::fields::{Catalog, TestFunction};
use lplevel::measure::{geometric_grid, EstimatorConfig};
use lplevel::norms::SeminormConfig;
use lplevel::spectral::{ScanConfig, ScanMode, SpectralGrid, TLParams};
use serde::Serialize;

use crate::config::{ConfigError, Experiment, RunConfig};

/// Resolved parameters of one experiment.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    Profile {
        p: f64,
        lambdas: Vec<f64>,
        estimator: EstimatorConfig,
    },
    Bbm {
        p: f64,
        domain: Vec<(f64, f64)>,
        s_grid: Vec<f64>,
        seminorm: SeminormConfig,
    },
    Msh {
        p: f64,
        s_grid: Vec<f64>,
        seminorm: SeminormConfig,
    },
    Scan {
        p: f64,
        s_grid: Vec<f64>,
        scan_mode: ScanMode,
        scan: ScanConfig,
    },
    Kernel {
        s: f64,
        j_values: Vec<i32>,
        t_values: Vec<f64>,
        grid: SpectralGrid,
        sharpness: f64,
    },
    Density {
        params: TLParams,
        big_j: Vec<u32>,
        grid: SpectralGrid,
        sharpness: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Plan {
    pub name: String,
    pub formula_id: FormulaId,
    pub function: Option<String>,
    pub dimension: usize,
    pub tolerance: f64,
    pub task: Task,
    #[serde(skip)]
    pub u: Option<TestFunction>,
}

const SCAN_S_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const BBM_S_GRID: [f64; 4] = [0.9, 0.95, 0.975, 0.99];
const MSH_S_GRID: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

/// Seed of the i-th experiment; distinct per experiment and independent of
/// scheduling.
pub fn experiment_seed(run_seed: u64, index: usize) -> u64 {
    run_seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn validate(cfg: &RunConfig, run_seed: u64, catalog: &Catalog) -> Result<Vec<Plan>, ConfigError> {
    if cfg.experiments.is_empty() {
        return Err(ConfigError::Invalid(vec!["no experiments configured".into()]));
    }
    let mut problems = Vec::new();
    let mut plans = Vec::new();
    let mut names = BTreeSet::new();
    for (i, e) in cfg.experiments.iter().enumerate() {
        match resolve(e, i, experiment_seed(run_seed, i), catalog) {
            Ok(plan) => {
                if !names.insert(plan.name.clone()) {
                    problems.push(format!("experiment {}: duplicate name {:?}", i + 1, plan.name));
                }
                plans.push(plan);
            }
            Err(msgs) => problems.extend(msgs.into_iter().map(|m| format!("experiment {}: {m}", i + 1))),
        }
    }
    if problems.is_empty() {
        Ok(plans)
    } else {
        Err(ConfigError::Invalid(problems))
    }
}

struct Checker<'a> {
    e: &'a Experiment,
    problems: Vec<String>,
}

impl Checker<'_> {
    fn fail(&mut self, msg: impl Into<String>) {
        self.problems.push(msg.into());
    }

    /// Rejects fields that the formula does not use.
    fn only(&mut self, allowed: &[&str]) {
        let e = self.e;
        let present = [
            ("function", e.function.is_some()),
            ("p", e.p.is_some()),
            ("s", e.s.is_some()),
            ("q", e.q.is_some()),
            ("lambdas", e.lambdas.is_some()),
            ("lambda_grid", e.lambda_grid.is_some()),
            ("s_grid", e.s_grid.is_some()),
            ("domain", e.domain.is_some()),
            ("estimator", e.estimator.is_some()),
            ("seminorm", e.seminorm.is_some()),
            ("scan", e.scan.is_some()),
            ("scan_mode", e.scan_mode.is_some()),
            ("spectral_grid", e.spectral_grid.is_some()),
            ("sharpness", e.sharpness.is_some()),
            ("j_values", e.j_values.is_some()),
            ("t_values", e.t_values.is_some()),
            ("big_j", e.big_j.is_some()),
        ];
        for (field, set) in present {
            if set && !allowed.contains(&field) {
                self.fail(format!("field `{field}` does not apply to this formula"));
            }
        }
    }

    fn p(&mut self, default: f64, open: bool) -> f64 {
        let p = self.e.p.unwrap_or(default);
        let ok = p.is_finite() && if open { p > 1.0 } else { p >= 1.0 };
        if !ok {
            self.fail(format!("p = {p} must satisfy {}", if open { "1 < p < ∞" } else { "1 <= p < ∞" }));
        }
        p
    }

    fn lambdas(&mut self, default: GridDefault) -> Vec<f64> {
        let e = self.e;
        let grid = match (&e.lambdas, &e.lambda_grid) {
            (Some(_), Some(_)) => {
                self.fail("give either `lambdas` or `lambda_grid`, not both");
                return Vec::new();
            }
            (Some(l), None) => l.clone(),
            (None, Some(g)) => {
                if !(g.start > 0.0 && g.ratio > 1.0 && g.count > 0 && g.start.is_finite() && g.ratio.is_finite()) {
                    self.fail("lambda_grid needs start > 0, ratio > 1, count > 0");
                    return Vec::new();
                }
                geometric_grid(g.start, g.ratio, g.count)
            }
            (None, None) => geometric_grid(default.0, 2.0, 6),
        };
        if grid.len() < 3 {
            self.fail("a limit needs at least 3 lambda values");
        }
        if grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) || grid.windows(2).any(|w| w[1] <= w[0]) {
            self.fail("lambda values must be positive, finite and strictly increasing");
        }
        grid
    }

    fn s_grid(&mut self, default: &[f64], min_len: usize) -> Vec<f64> {
        let grid = self.e.s_grid.clone().unwrap_or_else(|| default.to_vec());
        if grid.len() < min_len {
            self.fail(format!("s_grid needs at least {min_len} values"));
        }
        if grid.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
            self.fail("s_grid values must lie in (0, 1)");
        }
        grid
    }

    fn estimator(&mut self, dim: usize, seed: u64) -> EstimatorConfig {
        let mut est = self.e.estimator.clone().unwrap_or_else(|| default_estimator(dim));
        est.rng_seed = seed;
        if let Err(err) = est.validate(dim) {
            self.fail(err.to_string());
        }
        est
    }

    fn sharpness(&mut self) -> f64 {
        let s = self.e.sharpness.unwrap_or(1.0);
        if !(s > 0.0 && s.is_finite()) {
            self.fail(format!("sharpness {s} must be positive"));
        }
        s
    }

    fn spectral_grid(&mut self, default: SpectralGrid) -> SpectralGrid {
        let g = self.e.spectral_grid.unwrap_or(default);
        if let Err(err) = g.validate() {
            self.fail(err.to_string());
        }
        g
    }
}

struct GridDefault(f64);

/// Estimator defaults per dimension: finer sections in two dimensions.
pub fn default_estimator(dim: usize) -> EstimatorConfig {
    let mut est = EstimatorConfig::default();
    if dim == 2 {
        est.samples_or_nodes = 4096;
    }
    est
}

fn resolve(e: &Experiment, index: usize, seed: u64, catalog: &Catalog) -> Result<Plan, Vec<String>> {
    let Some(formula_id) = e.formula_id else {
        return Err(vec!["missing `formula_id`".into()]);
    };
    let mut c = Checker { e, problems: Vec::new() };
    let dimension = e.dimension.unwrap_or(1);
    if !(1..=3).contains(&dimension) {
        c.fail(format!("dimension {dimension} must be 1, 2 or 3"));
    }
    let tolerance = e.tolerance.unwrap_or_else(|| formula_id.default_tolerance());
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        c.fail(format!("tolerance {tolerance} must be nonnegative"));
    }
    let needs_function = formula_id != FormulaId::KernelDecay;
    let u = match (&e.function, needs_function) {
        (Some(name), true) if (1..=3).contains(&dimension) => match catalog.get(name, dimension) {
            Ok(u) => Some(u),
            Err(err) => {
                c.fail(err.to_string());
                None
            }
        },
        (None, true) => {
            c.fail("missing `function`");
            None
        }
        _ => None,
    };
    let dim_ok = (1..=3).contains(&dimension);
    let task = match formula_id {
        FormulaId::LpFormula | FormulaId::Bounds | FormulaId::GradientFormula => {
            c.only(&["function", "p", "lambdas", "lambda_grid", "estimator"]);
            let default = if formula_id == FormulaId::GradientFormula { GridDefault(4.0) } else { GridDefault(1e-3) };
            let p = c.p(if formula_id == FormulaId::GradientFormula { 2.0 } else { 1.0 }, false);
            let lambdas = c.lambdas(default);
            let estimator = if dim_ok { c.estimator(dimension, seed) } else { EstimatorConfig::default() };
            Task::Profile { p, lambdas, estimator }
        }
        FormulaId::Bbm => {
            c.only(&["function", "p", "s_grid", "domain", "seminorm"]);
            let p = c.p(2.0, false);
            let s_grid = c.s_grid(&BBM_S_GRID, 3);
            let domain: Vec<(f64, f64)> = match (&e.domain, u.as_ref().and_then(|u| u.natural_domain())) {
                (Some(d), _) => d.iter().map(|b| (b[0], b[1])).collect(),
                (None, Some(d)) => d.to_vec(),
                (None, None) => {
                    c.fail("bbm needs `domain` (the function has no natural domain)");
                    Vec::new()
                }
            };
            if !domain.is_empty() && domain.len() != dimension {
                c.fail(format!("domain has {} axes, dimension is {dimension}", domain.len()));
            }
            if domain.iter().any(|&(lo, hi)| !(lo < hi && lo.is_finite() && hi.is_finite())) {
                c.fail("domain intervals must be finite with lo < hi");
            }
            if s_grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max) < 0.9 {
                c.fail("bbm needs max s >= 0.9");
            }
            Task::Bbm { p, domain, s_grid, seminorm: e.seminorm.clone().unwrap_or_default() }
        }
        FormulaId::Msh => {
            c.only(&["function", "p", "s_grid", "seminorm"]);
            let p = c.p(1.0, false);
            let s_grid = c.s_grid(&MSH_S_GRID, 3);
            if s_grid.iter().cloned().fold(f64::INFINITY, f64::min) > 0.05 {
                c.fail("msh needs min s <= 0.05");
            }
            Task::Msh { p, s_grid, seminorm: e.seminorm.clone().unwrap_or_default() }
        }
        FormulaId::EmbeddingScan | FormulaId::FppScan => {
            let mut allowed = vec!["function", "p", "s_grid", "scan"];
            if formula_id == FormulaId::EmbeddingScan {
                allowed.push("scan_mode");
            }
            c.only(&allowed);
            let p = c.p(2.0, true);
            let s_grid = c.s_grid(&SCAN_S_GRID, 1);
            let mut scan = match &e.scan {
                Some(s) => s.clone(),
                None if dim_ok => ScanConfig {
                    grid: SpectralGrid::default_for(dimension).expect("supported dimension"),
                    estimator: EstimatorConfig { ray_samples: 512, ..default_estimator(dimension) },
                    ..ScanConfig::default()
                },
                None => ScanConfig::default(),
            };
            scan.estimator.rng_seed = seed;
            if let Err(err) = scan.grid.validate() {
                c.fail(err.to_string());
            }
            if scan.grid.dimension != dimension {
                c.fail(format!("scan grid dimension {} differs from dimension {dimension}", scan.grid.dimension));
            }
            if dim_ok {
                if let Err(err) = scan.estimator.validate(dimension) {
                    c.fail(err.to_string());
                }
            }
            if scan.lambdas.is_empty() || scan.lambdas.windows(2).any(|w| w[1] <= w[0]) || scan.lambdas[0] <= 0.0 {
                c.fail("scan lambdas must be positive and strictly increasing");
            }
            if !(scan.sharpness > 0.0) {
                c.fail("scan sharpness must be positive");
            }
            Task::Scan { p, s_grid, scan_mode: e.scan_mode.unwrap_or(ScanMode::Bessel), scan }
        }
        FormulaId::KernelDecay => {
            c.only(&["s", "spectral_grid", "sharpness", "j_values", "t_values"]);
            let s = e.s.unwrap_or(0.5);
            if !(s > 0.0 && s < 1.0) {
                c.fail(format!("s = {s} must lie in (0, 1)"));
            }
            let default_grid = SpectralGrid::new(1, 64.0, 1 << 17).expect("valid grid");
            let grid = c.spectral_grid(default_grid);
            if e.dimension.is_some_and(|d| d != grid.dimension) {
                c.fail("dimension differs from spectral_grid.dimension");
            }
            let j_values = e.j_values.clone().unwrap_or_else(|| (-2..=2).collect());
            let t_values = e.t_values.clone().unwrap_or_else(|| vec![0.0, 1.0, 5.0]);
            if j_values.is_empty() || t_values.is_empty() || t_values.iter().any(|t| !t.is_finite()) {
                c.fail("j_values and t_values must be nonempty and finite");
            }
            let sharpness = c.sharpness();
            return finish(c, index, formula_id, None, grid.dimension, tolerance, Task::Kernel { s, j_values, t_values, grid, sharpness }, None);
        }
        FormulaId::Density => {
            c.only(&["function", "p", "s", "q", "spectral_grid", "sharpness", "big_j"]);
            let params = TLParams { s: e.s.unwrap_or(0.5), p: e.p.unwrap_or(2.0), q: e.q.unwrap_or(2.0), homogeneous: true };
            if let Err(err) = params.validate() {
                c.fail(err.to_string());
            }
            let grid = if dim_ok {
                c.spectral_grid(SpectralGrid::default_for(dimension).expect("supported dimension"))
            } else {
                SpectralGrid::default_for(1).expect("valid grid")
            };
            if grid.dimension != dimension {
                c.fail(format!("spectral_grid dimension {} differs from dimension {dimension}", grid.dimension));
            }
            let big_j = e.big_j.clone().unwrap_or_else(|| vec![1, 2, 3, 4]);
            if big_j.is_empty() || big_j.windows(2).any(|w| w[1] <= w[0]) {
                c.fail("big_j must be nonempty and strictly increasing");
            }
            let sharpness = c.sharpness();
            Task::Density { params, big_j, grid, sharpness }
        }
    };
    let function = e.function.clone();
    finish(c, index, formula_id, function, dimension, tolerance, task, u)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    c: Checker<'_>,
    index: usize,
    formula_id: FormulaId,
    function: Option<String>,
    dimension: usize,
    tolerance: f64,
    task: Task,
    u: Option<TestFunction>,
) -> Result<Plan, Vec<String>> {
    if !c.problems.is_empty() {
        return Err(c.problems);
    }
    let name = c.e.name.clone().unwrap_or_else(|| match &function {
        Some(f) => format!("{:02}_{formula_id}_{f}_n{dimension}", index + 1),
        None => format!("{:02}_{formula_id}", index + 1),
    });
    if name.is_empty() || !name.chars().all(|ch| ch.is_ascii_alphanumeric() || "_-.".contains(ch)) || name.starts_with('.') {
        return Err(vec![format!("name {name:?} must be nonempty and use only [A-Za-z0-9_.-]")]);
    }
    if name == "summary" {
        return Err(vec!["name \"summary\" is reserved".into()]);
    }
    Ok(Plan { name, formula_id, function, dimension, tolerance, task, u })
}
