//! Batch command-line front end.
//!
//! [`run`] parses arguments, runs one suite and renders its report. It never
//! touches the process directly, so tests can drive it in-process; the binary
//! only prints the outcome and exits with its code.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{GeomError, Result};
use crate::fit::{logspace, FitOutcome};
use crate::indicial::OperatorKind;
use crate::obstruction::CurvatureData;
use crate::report::{Report, Table};
use crate::suites::{
    calabi_suite, glue_suite, indicial_suite, obstruction_suite, CalabiSampling, CalabiTolerances, Expectation,
    GlueTolerances, ObstructionOptions, ObstructionTolerances,
};

/// Environment variable that fixes the worker-thread count.
pub const THREADS_ENV: &str = "CALABI_GLUING_THREADS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "calabi-gluing",
    version,
    about = "Verification suites for the Calabi metric, gluing obstructions and indicial roots"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Report format.
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Built-in model: flat, football, hyperbolic, constant-curvature[:c], kahler-einstein[:R].
    #[arg(long, conflicts_with = "data")]
    pub builtin: Option<String>,
    /// Curvature-data TOML file.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Complex dimension for built-in models.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monge–Ampère, Ricci-flatness, ALE decay and the deformation suites.
    VerifyCalabi {
        /// Complex dimension, at least 2.
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Seed for the sampled directions and points.
        #[arg(long, default_value_t = 11)]
        seed: u64,
        /// Replace every default tolerance; a specific flag below still wins.
        #[arg(long)]
        tol_all: Option<f64>,
        /// Monge–Ampère residual [default: 1e-10].
        #[arg(long)]
        tol_monge_ampere: Option<f64>,
        /// |Ric|/|Rm| [default: 1e-5].
        #[arg(long)]
        tol_ricci: Option<f64>,
        /// |fitted decay slope + 2n| [default: 0.2].
        #[arg(long)]
        tol_ale_slope: Option<f64>,
        /// Relative trace of o [default: 1e-12].
        #[arg(long)]
        tol_o_trace: Option<f64>,
        /// Relative divergence of o [default: 1e-5].
        #[arg(long)]
        tol_o_divergence: Option<f64>,
        /// Relative linearised Einstein residual of o [default: 1e-4].
        #[arg(long)]
        tol_o_p: Option<f64>,
        /// Relative dΩ [default: 1e-6].
        #[arg(long)]
        tol_omega_d: Option<f64>,
        /// Relative δΩ [default: 1e-6].
        #[arg(long)]
        tol_omega_delta: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate and classify the gluing obstruction of curvature data.
    Obstruction {
        #[command(flatten)]
        model: ModelArgs,
        /// Monte Carlo nodes for the sphere integrals.
        #[arg(long, default_value_t = 1_000_000)]
        nodes: usize,
        /// Seed for Monte Carlo nodes and random algebra samples.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Replace every default tolerance; a specific flag below still wins.
        #[arg(long)]
        tol_all: Option<f64>,
        /// Relative Bianchi and trace defects of the gauge tensor [default: 1e-12].
        #[arg(long)]
        tol_gauge: Option<f64>,
        /// Relative error of the contraction closed forms [default: 1e-10].
        #[arg(long)]
        tol_ledger: Option<f64>,
        /// Sphere-moment deviation in standard errors [default: 3].
        #[arg(long)]
        tol_moments: Option<f64>,
        /// Σ2, K and cyclic-J identity defects [default: 1e-10].
        #[arg(long)]
        tol_algebra: Option<f64>,
        /// Relative brute-force vs closed-form deviation [default: 5e-3].
        #[arg(long)]
        tol_bruteforce: Option<f64>,
        /// Relative wall vs closed-value mismatch [default: 1e-10].
        #[arg(long)]
        tol_wall: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Indicial-root tables on asymptotically hyperbolic space.
    Indicial {
        /// Real dimension m.
        #[arg(long)]
        dim: usize,
        /// Restrict to one operator: P0, P1, P2 or P.
        #[arg(long)]
        operator: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Residual sweep of the glued metric against t.
    GlueSweep {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated t values (default: six log-spaced values from 10^-4.5 to 10^-3).
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
        /// Damage-zone position s = r·t^{1/4}.
        #[arg(long, default_value_t = 1.0)]
        position: f64,
        /// |fitted slope − predicted slope| [default: 0.25].
        #[arg(long)]
        tol_slope: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn usage(msg: String) -> Outcome {
    Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: msg }
}

/// Parse `args` (program name first), run the command and render the report.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    if let Err(msg) = configure_threads() {
        return usage(msg);
    }
    let (report, output, table) = match execute(&cli.command) {
        Ok(v) => v,
        Err(e) => return usage(format!("error: {e}\n")),
    };
    let body = match output.format {
        Format::Text => report.to_text(),
        Format::Structured => report.to_structured(),
    };
    let code = if report.passed() { EXIT_PASS } else { EXIT_FAIL };
    let mut stderr = String::new();
    if !report.passed() {
        stderr = format!("failing checks: {}\n", report.failing().join(", "));
    }
    match &output.out {
        None => Outcome { code, stdout: body, stderr },
        Some(path) => {
            if let Err(e) = std::fs::write(path, &body) {
                return usage(format!("error: cannot write {}: {e}\n", path.display()));
            }
            let mut stdout = format!("report written to {}\n", path.display());
            if let Some(t) = table {
                let mut tp = path.clone().into_os_string();
                tp.push(".tsv");
                let tp = PathBuf::from(tp);
                if let Err(e) = std::fs::write(&tp, t.to_tsv()) {
                    return usage(format!("error: cannot write {}: {e}\n", tp.display()));
                }
                stdout.push_str(&format!("table written to {}\n", tp.display()));
            }
            stdout.push_str(&format!("verdict: {}\n", report.verdict.label()));
            Outcome { code, stdout, stderr }
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let k: usize =
        v.trim().parse().map_err(|_| format!("error: {THREADS_ENV} must be a positive integer, got {v:?}\n"))?;
    if k == 0 {
        return Err(format!("error: {THREADS_ENV} must be positive\n"));
    }
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    Ok(())
}

/// A model name with an optional `:value` parameter.
fn parse_builtin(spec: &str, n: usize) -> Result<(CurvatureData, Expectation)> {
    let (name, arg) = match spec.split_once(':') {
        Some((a, b)) => {
            let v: f64 = b.parse().map_err(|_| GeomError::InvalidConfig(format!("bad model parameter {b:?}")))?;
            (a, Some(v))
        }
        None => (spec, None),
    };
    let no_arg = |d: Result<CurvatureData>, e| {
        if arg.is_some() {
            return Err(GeomError::InvalidConfig(format!("model {name} takes no parameter")));
        }
        Ok((d?, e))
    };
    match name {
        "flat" => no_arg(CurvatureData::flat(n), Expectation::Unobstructed),
        "football" => no_arg(CurvatureData::football(n), Expectation::Obstructed),
        "hyperbolic" => no_arg(CurvatureData::hyperbolic(n), Expectation::Obstructed),
        "constant-curvature" => {
            let c = arg.unwrap_or(1.0);
            let e = if c == 0.0 { Expectation::Unobstructed } else { Expectation::Obstructed };
            Ok((CurvatureData::constant_curvature(c, n)?, e))
        }
        "kahler-einstein" => {
            let r = arg.unwrap_or(1.0);
            let e = if r == 0.0 { Expectation::Unobstructed } else { Expectation::KahlerEinstein { scalar: r } };
            Ok((CurvatureData::kahler_einstein(r, n)?, e))
        }
        other => Err(GeomError::InvalidConfig(format!(
            "unknown model {other:?} (expected flat, football, hyperbolic, constant-curvature[:c], kahler-einstein[:R])"
        ))),
    }
}

fn load_model(
    model: &ModelArgs,
    config: &mut BTreeMap<String, serde_json::Value>,
) -> Result<(CurvatureData, Option<Expectation>)> {
    match (&model.builtin, &model.data) {
        (Some(b), None) => {
            config.insert("builtin".into(), json!(b));
            config.insert("n".into(), json!(model.n));
            let (d, e) = parse_builtin(b, model.n)?;
            Ok((d, Some(e)))
        }
        (None, Some(p)) => {
            config.insert("data".into(), json!(p.display().to_string()));
            Ok((CurvatureData::from_path(p)?, None))
        }
        _ => Err(GeomError::InvalidConfig("exactly one of --builtin and --data is required".into())),
    }
}

fn pick(all: Option<f64>, one: Option<f64>, default: f64) -> f64 {
    one.or(all).unwrap_or(default)
}

fn fit_values(report: &mut Report, prefix: &str, fit: &FitOutcome) {
    match fit {
        FitOutcome::Fitted(f) => {
            report.value(&format!("{prefix}_slope"), f.slope);
            report.value(&format!("{prefix}_intercept"), f.intercept);
            report.value(&format!("{prefix}_r_squared"), f.r_squared);
        }
        FitOutcome::Degenerate(why) => report.value(&format!("{prefix}_degenerate"), why),
    }
}

fn data_values(report: &mut Report, data: &CurvatureData) {
    report.value("data_n", data.n);
    report.value("data_lambda", data.lambda);
    report.value("data_scalar", data.scalar());
    report.value("data_r_omega_omega", data.r_omega_omega());
}

fn execute(cmd: &Command) -> Result<(Report, OutputArgs, Option<Table>)> {
    let mut config = BTreeMap::new();
    match cmd {
        Command::VerifyCalabi {
            n,
            seed,
            tol_all,
            tol_monge_ampere,
            tol_ricci,
            tol_ale_slope,
            tol_o_trace,
            tol_o_divergence,
            tol_o_p,
            tol_omega_d,
            tol_omega_delta,
            output,
        } => {
            let d = CalabiTolerances::default();
            let tol = CalabiTolerances {
                monge_ampere: pick(*tol_all, *tol_monge_ampere, d.monge_ampere),
                ricci: pick(*tol_all, *tol_ricci, d.ricci),
                ale_slope: pick(*tol_all, *tol_ale_slope, d.ale_slope),
                o_trace: pick(*tol_all, *tol_o_trace, d.o_trace),
                o_divergence: pick(*tol_all, *tol_o_divergence, d.o_divergence),
                o_p: pick(*tol_all, *tol_o_p, d.o_p),
                omega_d: pick(*tol_all, *tol_omega_d, d.omega_d),
                omega_delta: pick(*tol_all, *tol_omega_delta, d.omega_delta),
                control_orders: d.control_orders,
            };
            let sampling = CalabiSampling { seed: *seed, ..CalabiSampling::default() };
            config.insert("n".into(), json!(n));
            config.insert("seed".into(), json!(seed));
            config.insert("tolerances".into(), serde_json::to_value(tol).expect("serialisable"));
            config.insert("sampling".into(), serde_json::to_value(sampling).expect("serialisable"));
            let suite = calabi_suite(*n, &tol, &sampling)?;
            let mut report = Report::new("verify-calabi", config);
            for c in suite.checks {
                report.check(c);
            }
            fit_values(&mut report, "ale_fit", &suite.ale_fit);
            fit_values(&mut report, "omega_decay", &suite.omega_decay);
            report.value("monge_ampere_naive_sum", suite.monge_ampere_naive);
            Ok((report, output.clone(), None))
        }
        Command::Obstruction {
            model,
            nodes,
            seed,
            tol_all,
            tol_gauge,
            tol_ledger,
            tol_moments,
            tol_algebra,
            tol_bruteforce,
            tol_wall,
            output,
        } => {
            let (data, expect) = load_model(model, &mut config)?;
            let d = ObstructionTolerances::default();
            let tol = ObstructionTolerances {
                gauge: pick(*tol_all, *tol_gauge, d.gauge),
                ledger: pick(*tol_all, *tol_ledger, d.ledger),
                moment_sigmas: pick(*tol_all, *tol_moments, d.moment_sigmas),
                algebra: pick(*tol_all, *tol_algebra, d.algebra),
                bruteforce: pick(*tol_all, *tol_bruteforce, d.bruteforce),
                wall: pick(*tol_all, *tol_wall, d.wall),
            };
            let opts = ObstructionOptions { nodes: *nodes, seed: *seed, ..ObstructionOptions::default() };
            config.insert("options".into(), serde_json::to_value(opts).expect("serialisable"));
            config.insert("tolerances".into(), serde_json::to_value(tol).expect("serialisable"));
            let suite = obstruction_suite(&data, &opts, &tol, expect)?;
            let mut report = Report::new("obstruction", config);
            for c in suite.checks {
                report.check(c);
            }
            data_values(&mut report, &data);
            report.value("classification", suite.wall.classification.to_string());
            report.value("wall_value", suite.wall.value);
            report.value("lambda_closed", suite.closed.value);
            report.value("lambda_bracket", suite.closed.bracket);
            report.value("lambda_normalized", suite.closed.lambda_normalized);
            report.value("lambda_pde", suite.closed.lambda_pde);
            report.value("o_norm_sq", suite.closed.norm_sq_o);
            report.value("bruteforce_gauss_hermite", suite.gauss_hermite.value);
            report.value("bruteforce_monte_carlo", suite.monte_carlo.value);
            report.value("bruteforce_monte_carlo_std_error", suite.monte_carlo.std_error);
            let mut t = Table::new("ledger", &["contraction", "value"]);
            for (name, v) in crate::obstruction::ContractionLedger::NAMES.iter().zip(suite.ledger.as_array()) {
                t.push(vec![json!(name), json!(v)]);
            }
            report.tables.push(t);
            Ok((report, output.clone(), None))
        }
        Command::Indicial { dim, operator, output } => {
            let only = match operator.as_deref() {
                None | Some("all") => None,
                Some(s) => {
                    Some(OperatorKind::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s)).ok_or_else(|| {
                        GeomError::InvalidConfig(format!("unknown operator {s:?} (expected P0, P1, P2, P or all)"))
                    })?)
                }
            };
            config.insert("dim".into(), json!(dim));
            config.insert("operator".into(), json!(only.map_or("all", |k| k.name())));
            let suite = indicial_suite(*dim, only)?;
            let mut report = Report::new("indicial", config);
            let mut t = Table::new("roots", &["operator", "branch", "a", "b", "c", "delta_plus", "delta_minus"]);
            for r in &suite.rows {
                t.push(vec![
                    json!(r.operator.name()),
                    json!(r.branch.name()),
                    json!(r.quadratic.a),
                    json!(r.quadratic.b),
                    json!(r.quadratic.c),
                    json!(r.roots.delta_plus),
                    json!(r.roots.delta_minus),
                ]);
            }
            report.tables.push(t);
            for c in &suite.coincidences {
                report.note(format!("coincidence: {c}"));
            }
            for c in suite.checks {
                report.check(c);
            }
            Ok((report, output.clone(), None))
        }
        Command::GlueSweep { model, t, position, tol_slope, output } => {
            let (data, _) = load_model(model, &mut config)?;
            let ts = t.clone().unwrap_or_else(|| logspace(10f64.powf(-4.5), 1e-3, 6));
            let tol = GlueTolerances {
                slope: tol_slope.unwrap_or(GlueTolerances::default().slope),
                ..GlueTolerances::default()
            };
            config.insert("t".into(), json!(ts));
            config.insert("position".into(), json!(position));
            config.insert("tol_slope".into(), json!(tol.slope));
            let suite = glue_suite(&data, &ts, *position, &tol)?;
            let mut report = Report::new("glue-sweep", config);
            data_values(&mut report, &data);
            report.value("predicted_slope", suite.sweep.predicted_slope);
            fit_values(&mut report, "fit", &suite.sweep.fit);
            report.value("floor_ratio", suite.floor_ratio);
            let mut table = Table::new("sweep", &["t", "r", "rho", "sup_residual", "noise_floor", "normalised"]);
            for r in &suite.sweep.rows {
                table.push(vec![
                    json!(r.t),
                    json!(r.r),
                    json!(r.rho),
                    json!(r.sup_residual),
                    json!(r.noise_floor),
                    json!(r.normalised),
                ]);
            }
            report.tables.push(table.clone());
            if suite.sweep.flat_model {
                report.note(
                    "degenerate: flat model; H = 0 and Λ = 0, so the predicted t-term vanishes and no slope is checked. \
                     The residual left is the cutoff tail of g_cal − g_euc, reported as floor_ratio.",
                );
            }
            report.note("the inner correction is truncated to its quadratic term; the sweep checks the t-rate at fixed s = r·t^{1/4}");
            for c in suite.checks {
                report.check(c);
            }
            Ok((report, output.clone(), Some(table)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_models() {
        assert!(parse_builtin("flat", 2).is_ok());
        assert!(parse_builtin("constant-curvature:-2.5", 3).is_ok());
        assert!(
            matches!(parse_builtin("kahler-einstein:2", 3).unwrap().1, Expectation::KahlerEinstein { scalar } if scalar == 2.0)
        );
        assert!(parse_builtin("flat:1", 2).is_err());
        assert!(parse_builtin("sphere", 2).is_err());
        assert!(parse_builtin("constant-curvature:x", 2).is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["calabi-gluing"]).code, EXIT_USAGE);
        assert_eq!(run(["calabi-gluing", "indicial", "--dim", "2"]).code, EXIT_USAGE);
        assert_eq!(run(["calabi-gluing", "indicial", "--dim", "4", "--operator", "Q"]).code, EXIT_USAGE);
        assert_eq!(run(["calabi-gluing", "obstruction"]).code, EXIT_USAGE);
        assert_eq!(run(["calabi-gluing", "glue-sweep", "--builtin", "flat", "--t", "1e-3"]).code, EXIT_USAGE);
    }

    #[test]
    fn help_exits_zero() {
        let o = run(["calabi-gluing", "--help"]);
        assert_eq!(o.code, EXIT_PASS);
        assert!(o.stdout.contains("verify-calabi"));
    }

    #[test]
    fn indicial_p_only_m4() {
        let o = run(["calabi-gluing", "indicial", "--dim", "4", "--operator", "P"]);
        assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
        assert!(o.stdout.contains("P\tV0\t-1\t3\t0\t3.0000000000e0\t0"));
        assert!(!o.stdout.contains("coincidence_relations"));
    }
}
