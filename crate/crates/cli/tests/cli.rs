use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lplevel"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("--config").arg(config).arg("--output").arg(out).args(extra).output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs").join(name);
    let value = read_json(&path);
    jsonschema::JSONSchema::compile(&value).unwrap()
}

fn csv_rows(path: &Path) -> Vec<[f64; 3]> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["lambda_or_s", "value", "error"]);
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            [r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap()]
        })
        .collect()
}

const INDICATOR: &str = r#"
rng_seed = 3

[[experiments]]
name = "indicator"
formula_id = "lp_formula"
function = "cube_indicator"
dimension = 1
p = 1.0
lambdas = [0.1, 0.25, 0.5]
tolerance = 0.01
"#;

#[test]
fn indicator_run_reproduces_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), INDICATOR);
    let out = tmp.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["passed"], 1);
    assert_eq!(summary["total"], 1);
    let rows = csv_rows(&out.join("indicator.csv"));
    assert_eq!(rows.len(), 3);
    for [lambda, value, _] in rows {
        let want = 4.0 - 2.0 * lambda;
        assert!((value - want).abs() <= 0.01 * want, "{lambda}: {value}");
    }
    let report = read_json(&out.join("indicator.json"));
    assert_eq!(report["formula_id"], "lp_formula");
    assert_eq!(report["status"], "passed");
}

#[test]
fn csv_uses_seventeen_digits_and_lf() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), INDICATOR);
    let out = tmp.path().join("out");
    assert_eq!(run(&cfg, &out, &[]).status.code(), Some(0));
    let text = fs::read_to_string(out.join("indicator.csv")).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    for line in text.lines().skip(1) {
        for field in line.split(',') {
            let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{field}");
            assert!(!field.contains(';'));
        }
    }
}

#[test]
fn empty_experiment_list_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "rng_seed = 1\n");
    let out = tmp.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no experiments"));
    assert!(!out.exists());
}

#[test]
fn all_config_problems_reported_before_computing() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"
[[experiments]]
formula_id = "lp_formula"
function = "no_such_function"

[[experiments]]
formula_id = "msh"
function = "cube_indicator"
s_grid = [0.3, 0.2, 0.1]

[[experiments]]
formula_id = "lp_formula"
function = "gaussian"
lambdas = [0.5, 0.1, 0.2]

[[experiments]]
formula_id = "kernel_decay"
function = "gaussian"
"#;
    let cfg = write_config(tmp.path(), body);
    let out = tmp.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("experiment 1") && err.contains("no_such_function"), "{err}");
    assert!(err.contains("experiment 2") && err.contains("min s <= 0.05"), "{err}");
    assert!(err.contains("experiment 3") && err.contains("strictly increasing"), "{err}");
    assert!(err.contains("experiment 4") && err.contains("`function`"), "{err}");
    assert!(!out.exists());
}

#[test]
fn unknown_formula_and_fields_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    for body in [
        "[[experiments]]\nformula_id = \"theorem_zero\"\nfunction = \"gaussian\"\n",
        "[[experiments]]\nformula_id = \"lp_formula\"\nfunction = \"gaussian\"\ncolour = 1\n",
        "seeds = 1\n[[experiments]]\nformula_id = \"lp_formula\"\nfunction = \"gaussian\"\n",
        "[[experiments]]\nformula_id = \"lp_formula\"\nfunction = \"gaussian\"\n[experiments.estimator]\nnodes = 3\n",
    ] {
        let cfg = write_config(tmp.path(), body);
        let out = tmp.path().join("out");
        let o = run(&cfg, &out, &[]);
        assert_eq!(o.status.code(), Some(1), "{body}");
        assert!(!out.exists());
    }
}

#[test]
fn refused_input_exits_with_failure_status() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"
[[experiments]]
name = "constant"
formula_id = "lp_formula"
function = "constant_one"

[[experiments]]
name = "strict"
formula_id = "lp_formula"
function = "gaussian"
p = 2.0
tolerance = 0.0
"#;
    let cfg = write_config(tmp.path(), body);
    let out = tmp.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["errored"], 1);
    assert_eq!(summary["failed"], 1);
    let constant = read_json(&out.join("constant.json"));
    assert_eq!(constant["status"], "error");
    assert!(constant["error"].as_str().unwrap().contains("not in L^p"));
    assert!(!out.join("constant.csv").exists());
}

const MIXED: &str = r#"
rng_seed = 11

[[experiments]]
formula_id = "lp_formula"
function = "gaussian"
p = 2.0

[[experiments]]
formula_id = "bounds"
function = "bump"
p = 1.0

[[experiments]]
name = "mc"
formula_id = "bounds"
function = "gaussian"
p = 1.0
lambdas = [0.05, 0.1, 0.2]
tolerance = 0.1
[experiments.estimator]
method = "stratified_mc"
samples_or_nodes = 64
strata_per_axis = 8

[[experiments]]
formula_id = "msh"
function = "cube_indicator"

[[experiments]]
formula_id = "density"
function = "bump"
big_j = [1, 2]
tolerance = 1.0

[[experiments]]
formula_id = "kernel_decay"
j_values = [0, 1]
t_values = [0.0, 1.0]
spectral_grid = { dimension = 1, halfwidth = 32.0, points_per_axis = 16384 }

[[experiments]]
formula_id = "fpp_scan"
function = "gaussian"
p = 2.0
s_grid = [0.3, 0.6]
[experiments.scan]
lambdas = [0.25, 0.5, 1.0, 2.0]
"#;

fn csv_bodies(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn output_is_identical_across_runs_and_job_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), MIXED);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    assert_eq!(run(&cfg, &a, &["--jobs", "1"]).status.code(), Some(0));
    assert_eq!(run(&cfg, &b, &["--jobs", "1"]).status.code(), Some(0));
    assert_eq!(run(&cfg, &c, &["--jobs", "4"]).status.code(), Some(0));
    let first = csv_bodies(&a);
    assert_eq!(first.len(), 7);
    assert_eq!(first, csv_bodies(&b));
    assert_eq!(first, csv_bodies(&c));
    assert_eq!(fs::read(a.join("summary.json")).unwrap(), fs::read(c.join("summary.json")).unwrap());
}

#[test]
fn reports_match_the_documented_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let body = format!("{MIXED}\n[[experiments]]\nname = \"refused\"\nformula_id = \"gradient_formula\"\nfunction = \"cube_indicator\"\n");
    let cfg = write_config(tmp.path(), &body);
    let out = tmp.path().join("out");
    assert_eq!(run(&cfg, &out, &[]).status.code(), Some(2));
    let report_schema = schema("report.schema.json");
    let summary_schema = schema("summary.schema.json");
    let mut checked = 0;
    for entry in fs::read_dir(&out).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|x| x == "json") {
            let doc = read_json(&path);
            let s = if path.file_name().unwrap() == "summary.json" { &summary_schema } else { &report_schema };
            if let Err(errors) = s.validate(&doc) {
                let msgs: Vec<String> = errors.map(|e| e.to_string()).collect();
                panic!("{}: {msgs:?}", path.display());
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 9);
}

#[test]
fn seed_changes_only_stochastic_entries() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), MIXED);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(run(&cfg, &a, &["--seed", "1"]).status.code(), Some(0));
    assert_eq!(run(&cfg, &b, &["--seed", "2"]).status.code(), Some(0));
    for (name, body) in csv_bodies(&a) {
        let other = fs::read(b.join(&name)).unwrap();
        if name == "mc.csv" {
            assert_ne!(body, other);
            let ra = csv_rows(&a.join(&name));
            let rb = csv_rows(&b.join(&name));
            for (x, y) in ra.iter().zip(&rb) {
                assert_eq!(x[0], y[0]);
                let sigma = (x[2] * x[2] + y[2] * y[2]).sqrt();
                assert!((x[1] - y[1]).abs() <= 3.0 * sigma, "{x:?} {y:?}");
            }
        } else {
            assert_eq!(body, other, "{name}");
        }
    }
}

#[test]
fn listings() {
    let o = bin().arg("--list-experiments").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for id in ["lp_formula", "gradient_formula", "bbm", "msh", "bounds", "embedding_scan", "fpp_scan", "kernel_decay", "density"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id}");
    }
    let o = bin().arg("--list-functions").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("constant_one") && text.contains("not in L^p"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn missing_config_flag() {
    let o = bin().output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(["--config", "/nonexistent/run.toml"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
}

#[test]
fn shipped_configs_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let catalog = lplevel::fields::Catalog::standard();
    let mut count = 0;
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|x| x == "toml") {
            let cfg = lplevel_cli::RunConfig::load(&path).unwrap();
            lplevel_cli::plan::validate(&cfg, cfg.rng_seed, &catalog).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 2);
}
