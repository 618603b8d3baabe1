//! Command-line front end.
//!
//! Every subcommand computes all of its artifacts in memory and writes them
//! only once nothing can fail, so a configuration error leaves the output
//! directory untouched. Exit status: 0 when every check passes, 1 when a
//! check fails (named on stderr), 2 on configuration errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::carleman::{decomposition_check, ratio_scan, DecompositionResult, ModeProfile, ScanTable};
use crate::counterexample::{
    build_cutoffs, build_sequences, check_conditions, regularity_report, CounterexampleField, K0Choice,
    RegularityConfig, SignVariant,
};
use crate::modulus::{classify_osgood, validate_modulus, ModulusSpec, ValidationConfig};
use crate::quad::CompositeGauss;
use crate::symbol::CoefficientPath;
use crate::weight::{build_weight, verify_weight, weight_csv, WeightConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Largest relative residual of `Łu + b·∇u + cu` accepted by default.
pub const FIELD_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "osgood-lab", version, about = "Carleman weights, energy identities and non-uniqueness examples for Osgood-type moduli")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Encoding of tabular artifacts; reports are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Tolerance override for the command's main numerical check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a modulus and classify it.
    Modulus {
        /// `family[:param]` or a JSON file.
        #[arg(long)]
        mu: String,
    },
    /// Tabulate and verify the weight `Φ`.
    Weight {
        #[arg(long)]
        mu: String,
        /// Grid `a:b:n` of `τ` values.
        #[arg(long, default_value = "0:5:501")]
        grid: String,
    },
    /// Check the energy identity on seeded random profiles.
    Carleman {
        /// Coefficient path JSON; defaults to the heat operator on `[0, 1]`.
        #[arg(long)]
        coeffs: Option<PathBuf>,
        #[arg(long, default_value = "linear")]
        mu: String,
        /// Comma-separated `γ` values.
        #[arg(long, default_value = "1,10,100")]
        gamma_grid: String,
        #[arg(long, default_value_t = 20)]
        profiles: usize,
    },
    /// Build the non-uniqueness example and check its conditions.
    Counterexample {
        #[arg(long, default_value = "power:0.5")]
        mu: String,
        #[arg(long, default_value = "auto")]
        k0: String,
        #[arg(long, default_value_t = 50)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value = "plus_l")]
        sign: String,
        /// Time grid `a:b:n` of the field dump; defaults to `n = 200` points
        /// spanning the computed bands.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Summarize the artifacts present in the output directory.
    Report,
}

/// Configuration error; check failures travel in [`Run::failed`].
#[derive(Debug)]
enum Failure {
    Config(String),
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Artifact {
    name: String,
    contents: String,
}

impl Artifact {
    fn new(name: &str, contents: String) -> Self {
        Artifact {
            name: name.to_string(),
            contents,
        }
    }

    fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        Artifact::new(name, text)
    }
}

/// Artifacts to write plus the names of failed checks.
struct Run {
    artifacts: Vec<Artifact>,
    failed: Vec<String>,
    message: String,
}

/// Parses arguments and runs; returns the exit status.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    run(&cli)
}

pub fn run(cli: &Cli) -> i32 {
    let outcome = match cli.jobs {
        Some(0) => Err(Failure::Config("--jobs must be at least 1".into())),
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| execute(cli)),
            Err(e) => Err(Failure::Config(format!("cannot start {j} workers: {e}"))),
        },
        None => execute(cli),
    };
    let run = match outcome {
        Ok(r) => r,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_CONFIG;
        }
    };
    if let Err(msg) = write_artifacts(&cli.out, &run.artifacts) {
        eprintln!("error: {msg}");
        return EXIT_CONFIG;
    }
    print!("{}", run.message);
    if run.failed.is_empty() {
        EXIT_PASS
    } else {
        for name in &run.failed {
            eprintln!("check failed: {name}");
        }
        EXIT_CHECK_FAILED
    }
}

fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> std::result::Result<(), String> {
    if artifacts.is_empty() {
        return Ok(());
    }
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Outcome<Run> {
    let tol = match cli.tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => {
            return Err(Failure::Config(format!("--tol must be positive, got {t}")));
        }
        t => t,
    };
    match &cli.command {
        Command::Modulus { mu } => modulus_cmd(&parse_modulus(mu)?, tol),
        Command::Weight { mu, grid } => weight_cmd(&parse_modulus(mu)?, &parse_grid(grid)?, tol, cli.format),
        Command::Carleman {
            coeffs,
            mu,
            gamma_grid,
            profiles,
        } => {
            let path = match coeffs {
                Some(p) => CoefficientPath::from_json(&read_input(p)?)?,
                None => CoefficientPath::heat(1, 1.0),
            };
            carleman_cmd(&path, &parse_modulus(mu)?, &parse_list(gamma_grid)?, *profiles, cli.seed, tol, cli.format)
        }
        Command::Counterexample {
            mu,
            k0,
            n_max,
            m,
            sign,
            grid,
        } => {
            let opts = CounterexampleOpts {
                mu: parse_modulus(mu)?,
                k0: k0.parse()?,
                n_max: *n_max,
                m: *m,
                sign: sign.parse()?,
                grid: grid.as_deref().map(parse_grid).transpose()?,
            };
            counterexample_cmd(&opts, cli.seed, tol, cli.format)
        }
        Command::Report => report_cmd(&cli.out),
    }
}

fn read_input(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

/// `family[:param]`, or a JSON file when the argument names one.
pub fn parse_modulus(arg: &str) -> crate::Result<ModulusSpec> {
    let path = Path::new(arg);
    if arg.ends_with(".json") || path.is_file() {
        let text = fs::read_to_string(path)
            .map_err(|e| crate::Error::InvalidModulus(format!("cannot read {arg}: {e}")))?;
        return serde_json::from_str(&text).map_err(|e| crate::Error::InvalidModulus(format!("{arg}: {e}")));
    }
    ModulusSpec::parse_shorthand(arg)
}

/// `a:b:n`, `n ≥ 2` uniform points with both ends.
pub fn parse_grid(spec: &str) -> crate::Result<Vec<f64>> {
    let bad = || crate::Error::Domain(format!("grid must read a:b:n with a < b and n >= 2, got '{spec}'"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let (a, b, n): (f64, f64, usize) = (
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
        n.trim().parse().map_err(|_| bad())?,
    );
    if !(a < b) || !a.is_finite() || !b.is_finite() || n < 2 {
        return Err(bad());
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn parse_list(spec: &str) -> Outcome<Vec<f64>> {
    let values: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Failure::Config(format!("bad list '{spec}': {e}")))?;
    if values.is_empty() || values.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(Failure::Config(format!("list '{spec}' must hold positive numbers")));
    }
    Ok(values)
}

/// Tabular artifact in the selected encoding.
fn table(stem: &str, csv: String, format: Format) -> Artifact {
    match format {
        Format::Csv => Artifact::new(&format!("{stem}.csv"), csv),
        Format::Json => Artifact::json(&format!("{stem}.json"), &csv_to_json(&csv)),
    }
}

/// `{"columns": [...], "rows": [[...], ...]}` with numeric cells as numbers.
pub fn csv_to_json(csv: &str) -> Value {
    let mut lines = csv.lines();
    let columns: Vec<&str> = lines.next().map(|h| h.split(',').collect()).unwrap_or_default();
    let rows: Vec<Value> = lines
        .map(|line| {
            Value::Array(
                line.split(',')
                    .map(|cell| match cell {
                        "true" => Value::Bool(true),
                        "false" => Value::Bool(false),
                        _ => match cell.parse::<f64>() {
                            Ok(v) if v.is_finite() => json!(v),
                            _ => Value::String(cell.to_string()),
                        },
                    })
                    .collect(),
            )
        })
        .collect();
    json!({ "columns": columns, "rows": rows })
}

fn modulus_cmd(mu: &ModulusSpec, tol: Option<f64>) -> Outcome<Run> {
    let mut cfg = ValidationConfig::default();
    if let Some(t) = tol {
        cfg.tol = t;
    }
    let validation = validate_modulus(mu, &cfg);
    let verdict = classify_osgood(mu);
    let failed = validation
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("modulus {}", c.name))
        .collect();
    let class = serde_json::to_value(verdict.class).expect("class serializes");
    let message = format!("{}: {}\n", mu.label(), class.as_str().unwrap_or_default());
    Ok(Run {
        artifacts: vec![Artifact::json(
            "modulus.json",
            &json!({ "modulus": mu.label(), "validation": validation, "verdict": verdict }),
        )],
        failed,
        message,
    })
}

fn weight_cmd(mu: &ModulusSpec, grid: &[f64], tol: Option<f64>, format: Format) -> Outcome<Run> {
    let w = build_weight(mu, &WeightConfig::default())?;
    let mut report = verify_weight(&w, grid);
    if let Some(t) = tol {
        report.passed = report.max_ode_residual <= t
            && report.max_eta_roundtrip <= t
            && report.dphi_monotone
            && report.d2phi_monotone
            && report.dichotomy_consistent;
    }
    let mut failed = vec![];
    if !report.passed {
        failed.push(format!("weight {} (max ODE residual {:.3e})", mu.label(), report.max_ode_residual));
    }
    let message = format!(
        "{}: {} points, blow-up {}\n",
        mu.label(),
        report.points,
        report.blow_up_time.map_or("none".to_string(), |b| format!("{b:.12}"))
    );
    Ok(Run {
        artifacts: vec![table("weight", weight_csv(&w, grid), format), Artifact::json("weight_report.json", &report)],
        failed,
        message,
    })
}

#[derive(Serialize)]
struct CaseResult {
    profile_id: usize,
    gamma: f64,
    result: DecompositionResult,
}

#[derive(Serialize)]
struct CarlemanReport {
    modulus: String,
    horizon: f64,
    gammas: Vec<f64>,
    tolerance: f64,
    cases: Vec<CaseResult>,
    scan: ScanTable,
    passed: bool,
}

fn carleman_cmd(
    path: &CoefficientPath,
    mu: &ModulusSpec,
    gammas: &[f64],
    profiles: usize,
    seed: u64,
    tol: Option<f64>,
    format: Format,
) -> Outcome<Run> {
    if profiles == 0 {
        return Err(Failure::Config("--profiles must be at least 1".into()));
    }
    let w = build_weight(mu, &WeightConfig::default())?;
    let top = gammas.iter().cloned().fold(0.0, f64::max) * path.horizon;
    if let Some(b) = w.blow_up_time {
        if top >= b {
            return Err(Failure::Config(format!(
                "gamma * T = {top} reaches the blow-up time {b} of {}",
                mu.label()
            )));
        }
    }
    let tol = tol.unwrap_or(crate::carleman::DECOMPOSITION_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let set: Vec<ModeProfile> = (0..profiles)
        .map(|_| ModeProfile::random(&mut rng, path.n, 0.5 * path.horizon))
        .collect();
    let quad = CompositeGauss::default();
    let jobs: Vec<(usize, f64)> = (0..profiles).flat_map(|i| gammas.iter().map(move |&g| (i, g))).collect();
    let cases: Vec<CaseResult> = jobs
        .par_iter()
        .map(|&(i, g)| {
            decomposition_check(path, &w, g, &set[i], &quad).map(|mut result| {
                result.passed = result.rel_error <= tol;
                CaseResult {
                    profile_id: i,
                    gamma: g,
                    result,
                }
            })
        })
        .collect::<crate::Result<_>>()?;
    let scan = ratio_scan(path, &w, &set, gammas, &quad);
    let failed: Vec<String> = cases
        .iter()
        .filter(|c| !c.result.passed)
        .map(|c| {
            format!(
                "decomposition (profile {}, gamma {}, rel_error {:.3e})",
                c.profile_id, c.gamma, c.result.rel_error
            )
        })
        .collect();
    let worst = cases.iter().map(|c| c.result.rel_error).fold(0.0, f64::max);
    let message = format!("{} cases, worst rel_error {worst:.3e}\n", cases.len());
    let csv = scan.to_csv();
    let report = CarlemanReport {
        modulus: mu.label(),
        horizon: path.horizon,
        gammas: gammas.to_vec(),
        tolerance: tol,
        passed: failed.is_empty(),
        cases,
        scan,
    };
    Ok(Run {
        artifacts: vec![Artifact::json("carleman.json", &report), table("scan", csv, format)],
        failed,
        message,
    })
}

struct CounterexampleOpts {
    mu: ModulusSpec,
    k0: K0Choice,
    n_max: usize,
    m: usize,
    sign: SignVariant,
    grid: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct FieldChecks {
    points: usize,
    degenerate: usize,
    max_residual_rel: f64,
    tolerance: f64,
    l_min: f64,
    l_max: f64,
    /// Only enforced when the parabolicity condition holds.
    l_range_required: bool,
    passed: bool,
}

/// Spatial probes of the field dump.
const DUMP_X: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

fn counterexample_cmd(opts: &CounterexampleOpts, seed: u64, tol: Option<f64>, format: Format) -> Outcome<Run> {
    let cutoffs = build_cutoffs(1);
    let plan = build_sequences(&opts.mu, opts.k0, opts.n_max, opts.m, &cutoffs)?;
    let conditions = check_conditions(&plan, &cutoffs);
    let field = CounterexampleField::new(plan, cutoffs);
    let times = match &opts.grid {
        Some(g) => g.clone(),
        None => {
            let (a, b) = (field.plan.band_start[0].max(0.0), field.plan.last_time());
            (0..200).map(|i| a + (b - a) * i as f64 / 200.0).collect()
        }
    };
    let grid = field.grid_csv(&times, &DUMP_X, opts.sign)?;

    let tol = tol.unwrap_or(FIELD_RESIDUAL_TOL);
    let points: Vec<(f64, (f64, f64))> = times
        .iter()
        .flat_map(|&t| DUMP_X.iter().flat_map(move |&a| DUMP_X.iter().map(move |&b| (t, (a, b)))))
        .collect();
    let lower = points
        .par_iter()
        .map(|&(t, x)| field.eval_lower_order(t, x, opts.sign))
        .collect::<crate::Result<Vec<_>>>()?;
    let ok: Vec<_> = lower.iter().filter(|l| !l.degenerate).collect();
    let max_residual_rel = ok.iter().map(|l| l.residual_rel).fold(0.0, f64::max);
    let l_min = lower.iter().map(|l| l.l).fold(f64::INFINITY, f64::min);
    let l_max = lower.iter().map(|l| l.l).fold(f64::NEG_INFINITY, f64::max);
    let l_range_required = conditions.get("parabolicity").is_some_and(|c| c.passed);
    let l_ok = !l_range_required || (l_min >= 0.5 && l_max <= 1.5);
    let checks = FieldChecks {
        points: lower.len(),
        degenerate: lower.len() - ok.len(),
        max_residual_rel,
        tolerance: tol,
        l_min,
        l_max,
        l_range_required,
        passed: max_residual_rel <= tol && l_ok,
    };

    let mut failed: Vec<String> = conditions
        .conditions
        .iter()
        .filter(|c| !c.passed)
        .map(|c| match c.witness {
            Some(n) => format!("condition {} (witness n = {n})", c.id),
            None => format!("condition {}", c.id),
        })
        .collect();
    if max_residual_rel > tol {
        failed.push(format!("field residual ({max_residual_rel:.3e} > {tol:.1e})"));
    }
    if !l_ok {
        failed.push(format!("l range [{l_min}, {l_max}]"));
    }
    let mut artifacts = vec![
        Artifact::json("conditions.json", &conditions),
        Artifact::json("field_checks.json", &checks),
        table("field_grid", grid, format),
    ];
    let mut message = format!(
        "k0 = {}, N = {}, conditions {}\n",
        field.plan.k0,
        field.plan.n_max,
        if conditions.passed { "PASS" } else { "FAIL" }
    );
    if conditions.passed {
        let cfg = RegularityConfig {
            seed,
            ..Default::default()
        };
        let regularity = regularity_report(&field, &cfg, opts.sign)?;
        if !regularity.coefficient_bounds.passed {
            let names: Vec<&str> = regularity
                .coefficient_bounds
                .quantities
                .iter()
                .filter(|q| !(q.bounded && q.decaying))
                .map(|q| q.name.as_str())
                .collect();
            failed.push(format!("regularity coefficient bounds ({})", names.join(", ")));
        }
        if !regularity.sharpness.passed {
            failed.push("regularity sharpness".into());
        }
        if !regularity.flatness.passed {
            failed.push("regularity flatness".into());
        }
        let _ = writeln!(message, "regularity {}", if regularity.passed { "PASS" } else { "FAIL" });
        artifacts.push(Artifact::json("regularity.json", &regularity));
    } else {
        message.push_str("regularity skipped: conditions fail\n");
    }
    Ok(Run {
        artifacts,
        failed,
        message,
    })
}

/// One line of the summary: name, status and key figures.
fn summarize(name: &str, doc: Option<&Value>, detail: impl Fn(&Value) -> String) -> (String, Option<bool>) {
    match doc {
        None => (format!("{name:<16} not run\n"), None),
        Some(v) => {
            let passed = v.get("passed").and_then(Value::as_bool).unwrap_or(false);
            let status = if passed { "PASS" } else { "FAIL" };
            (format!("{name:<16} {status}  {}\n", detail(v)), Some(passed))
        }
    }
}

fn num(v: &Value, key: &str) -> String {
    match v.get(key) {
        Some(Value::Number(n)) => format!("{:.6e}", n.as_f64().unwrap_or(f64::NAN)),
        Some(Value::Null) | None => "none".into(),
        Some(other) => other.to_string(),
    }
}

fn load(dir: &Path, name: &str) -> Outcome<Option<Value>> {
    let path = dir.join(name);
    if !path.is_file() {
        return Ok(None);
    }
    let text = read_input(&path)?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn report_cmd(dir: &Path) -> Outcome<Run> {
    let modulus = load(dir, "modulus.json")?.map(|mut v| {
        let passed = v["validation"]["passed"].as_bool().unwrap_or(false);
        v["passed"] = Value::Bool(passed);
        v
    });
    let weight = load(dir, "weight_report.json")?;
    let carleman = load(dir, "carleman.json")?;
    let conditions = load(dir, "conditions.json")?;
    let field = load(dir, "field_checks.json")?;
    let regularity = load(dir, "regularity.json")?;

    let sections = [
        summarize("modulus", modulus.as_ref(), |v| {
            format!("{} {}", v["modulus"].as_str().unwrap_or("?"), v["verdict"]["class"].as_str().unwrap_or("?"))
        }),
        summarize("weight", weight.as_ref(), |v| {
            format!(
                "{} max residual {} blow-up {}",
                v["modulus"].as_str().unwrap_or("?"),
                num(v, "max_ode_residual"),
                num(v, "blow_up_time")
            )
        }),
        summarize("carleman", carleman.as_ref(), |v| {
            let cases = v["cases"].as_array().map_or(0, |c| c.len());
            let worst = v["cases"]
                .as_array()
                .into_iter()
                .flatten()
                .filter_map(|c| c["result"]["rel_error"].as_f64())
                .fold(0.0, f64::max);
            format!("{cases} cases, worst rel_error {worst:.3e}")
        }),
        summarize("conditions", conditions.as_ref(), |v| {
            let failing: Vec<String> = v["conditions"]
                .as_array()
                .into_iter()
                .flatten()
                .filter(|c| c["passed"] == Value::Bool(false))
                .filter_map(|c| c["id"].as_str().map(String::from))
                .collect();
            let tail = if failing.is_empty() {
                String::new()
            } else {
                format!(", failing: {}", failing.join(", "))
            };
            format!("k0 = {}, N = {}{tail}", v["k0"], v["n_max"])
        }),
        summarize("field checks", field.as_ref(), |v| {
            format!("max residual {} l in [{}, {}]", num(v, "max_residual_rel"), num(v, "l_min"), num(v, "l_max"))
        }),
        summarize("regularity", regularity.as_ref(), |v| {
            format!(
                "sign {} bounds {} sharpness {} flatness {}",
                v["sign"].as_str().unwrap_or("?"),
                v["coefficient_bounds"]["passed"],
                v["sharpness"]["passed"],
                v["flatness"]["passed"]
            )
        }),
    ];
    let mut text = String::new();
    let mut failed = vec![];
    for ((line, passed), name) in sections
        .iter()
        .zip(["modulus", "weight", "carleman", "conditions", "field checks", "regularity"])
    {
        text.push_str(line);
        if *passed == Some(false) {
            failed.push(name.to_string());
        }
    }
    Ok(Run {
        artifacts: vec![Artifact::new("summary.txt", text.clone())],
        failed,
        message: text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        for bad in ["1:0:3", "0:1:1", "0:1", "a:1:3", "0:inf:4"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn csv_conversion_keeps_column_order() {
        let v = csv_to_json("b,a,flag\n1.5,-inf,true\n");
        assert_eq!(v["columns"], json!(["b", "a", "flag"]));
        assert_eq!(v["rows"][0], json!([1.5, "-inf", true]));
    }
}
