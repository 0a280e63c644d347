//! The `chainsched` command line.
//!
//! Exit status is 0 on success, 1 when the answer is "infeasible" (an LP
//! with no solution, a schedule that fails validation, a heuristic outside
//! its regime) and 2 for malformed input or I/O failures. Errors are also
//! written to stderr as one JSON object.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::ModelError;
use crate::gantt;
use crate::lp::{build_lp, export_lp, optimal_schedule_with, Arithmetic, ExportFormat, LpError, ObjectiveSpec, SolverOptions};
use crate::model::{simulate, validate_schedule_with, Instance, InstallmentPlan, Schedule, Tolerance};
use crate::rational::{parse_rational, to_decimal_string, to_exact_string, Rational};
use crate::reference::{self, ExampleInstance, MultiInstallment, ReferenceError, Regime};
use crate::refine::{self, OverheadModel, RefineError, SplitSpec};
use crate::scenario::{self, pretty, ScenarioError};

#[derive(Debug, Parser)]
#[command(name = "chainsched", version, about = "Optimal divisible-load schedules on linear processor chains")]
pub struct Cli {
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Arithmetic used by the LP solver.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Rational)]
    pub mode: Mode,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Rational,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
    Ascii,
    Lp,
    Mps,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Installments per load: one number for all loads or a comma list.
    #[arg(long)]
    pub q: Option<String>,
    /// `makespan` or `affine:w1,w2,...;c`.
    #[arg(long, default_value = "makespan")]
    pub objective: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the scheduling LP and print the optimal schedule.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Check a schedule file against every constraint family.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        /// Absolute tolerance; exact when omitted.
        #[arg(long)]
        tolerance: Option<String>,
    },
    /// Earliest-start timeline for given fractions.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// JSON file holding `gamma[n][j][i]`, bare or under a `gamma` key.
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Optimal makespan for Q = 1..q-max installments per load.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long = "q-max")]
        q_max: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// The two-processor example: one lambda, or a lambda grid as CSV.
    Example {
        #[arg(long, conflicts_with_all = ["lambda_from", "lambda_to", "lambda_step"])]
        lambda: Option<String>,
        #[arg(long = "lambda-from", requires_all = ["lambda_to", "lambda_step"])]
        lambda_from: Option<String>,
        #[arg(long = "lambda-to")]
        lambda_to: Option<String>,
        #[arg(long = "lambda-step")]
        lambda_step: Option<String>,
        /// Print the example scenario instead of the report.
        #[arg(long = "emit-scenario", requires = "lambda")]
        emit_scenario: bool,
    },
    /// Split one installment, or bound installment counts by startup cost.
    Refine {
        #[arg(long)]
        scenario: PathBuf,
        /// Schedule to split; the LP optimum for the scenario when omitted.
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// `n,j`, 1-based.
        #[arg(long, conflicts_with = "overhead")]
        split: Option<String>,
        /// Re-solve the LP on the refined plan after splitting.
        #[arg(long)]
        resolve: bool,
        /// `K,rho_max`: report the largest installment count per load.
        #[arg(long)]
        overhead: Option<String>,
    },
    /// Write the LP in CPLEX LP or fixed MPS format.
    ExportLp {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum, default_value_t = Format::Lp)]
        format: Format,
    },
    /// Gantt chart of a schedule file, or of the LP optimum.
    Gantt {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Ascii)]
        format: Format,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    pub detail: Option<Value>,
}

impl CliError {
    fn structural(message: impl Into<String>) -> Self {
        Self { code: 2, kind: "structural", message: message.into(), detail: None }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self { code: 2, kind: "io", message: format!("{}: {e}", path.display()), detail: None }
    }

    fn infeasible(message: impl Into<String>, detail: Option<Value>) -> Self {
        Self { code: 1, kind: "infeasible", message: message.into(), detail }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "error": self.kind, "message": self.message, "exit_code": self.code });
        if let Some(d) = &self.detail {
            let mut d = d.clone();
            // A full report, when present, has already gone to stdout.
            if let Value::Object(m) = &mut d {
                m.remove("report");
            }
            v["detail"] = d;
        }
        v
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        Self::structural(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        Self::structural(e.to_string())
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        match e {
            LpError::NotOptimal(_) => Self::infeasible(e.to_string(), None),
            LpError::IterationLimit(_) => Self { code: 2, kind: "iteration-limit", message: e.to_string(), detail: None },
            LpError::Model(m) => m.into(),
        }
    }
}

impl From<ReferenceError> for CliError {
    fn from(e: ReferenceError) -> Self {
        match e {
            ReferenceError::Regime { .. } => Self { code: 1, kind: "regime", message: e.to_string(), detail: None },
            _ => Self::structural(e.to_string()),
        }
    }
}

impl From<RefineError> for CliError {
    fn from(e: RefineError) -> Self {
        match e {
            RefineError::Lp(lp) => lp.into(),
            RefineError::Infeasible { ref families } => {
                let detail = json!({ "families": families });
                Self::infeasible(e.to_string(), Some(detail))
            }
            _ => Self::structural(e.to_string()),
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// exit status; output goes to `stdout` unless `--out` is given.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = writeln!(stderr, "{}", json!({ "error": "usage", "message": rendered.trim_end(), "exit_code": 2 }));
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(output) => match &cli.out {
            Some(path) => match fs::write(path, output.as_bytes()) {
                Ok(()) => 0,
                Err(e) => report(stderr, &CliError::io(path, e)),
            },
            None => {
                let _ = stdout.write_all(output.as_bytes());
                0
            }
        },
        Err(err) => {
            if let Some(partial) = &err.detail.as_ref().and_then(|d| d.get("report")) {
                let _ = stdout.write_all(pretty(partial).as_bytes());
            }
            report(stderr, &err)
        }
    }
}

fn report(stderr: &mut dyn Write, err: &CliError) -> i32 {
    let _ = writeln!(stderr, "{}", err.to_json());
    err.code
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn rational_arg(text: &str, what: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| CliError::structural(format!("{what}: {e}")))
}

fn solver_options(mode: Mode) -> SolverOptions {
    let arithmetic = match mode {
        Mode::Rational => Arithmetic::Exact,
        Mode::Float => Arithmetic::Float,
    };
    SolverOptions { arithmetic, ..SolverOptions::from_env() }
}

fn tolerance(mode: Mode) -> Tolerance {
    match mode {
        Mode::Rational => Tolerance::Exact,
        Mode::Float => Tolerance::float_default(),
    }
}

pub fn parse_plan(text: &str, loads: usize) -> Result<InstallmentPlan, CliError> {
    let q = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| CliError::structural(format!("--q: `{s}` is not an integer"))))
        .collect::<Result<Vec<_>, _>>()?;
    let q = if q.len() == 1 { vec![q[0]; loads] } else { q };
    Ok(InstallmentPlan::new(q)?)
}

pub fn parse_objective(text: &str) -> Result<ObjectiveSpec, CliError> {
    if text == "makespan" {
        return Ok(ObjectiveSpec::Makespan);
    }
    let Some(rest) = text.strip_prefix("affine:") else {
        return Err(CliError::structural(format!("--objective: expected `makespan` or `affine:...`, got `{text}`")));
    };
    let (weights, constant) = rest.split_once(';').unwrap_or((rest, "0"));
    let weights = weights.split(',').map(|w| rational_arg(w, "--objective weight")).collect::<Result<Vec<_>, _>>()?;
    let constant = rational_arg(constant, "--objective constant")?;
    Ok(ObjectiveSpec::Affine { weights, constant })
}

fn load_problem(p: &ProblemArgs) -> Result<(Instance, ObjectiveSpec), CliError> {
    let mut inst = scenario::parse_scenario(&read(&p.scenario)?)?;
    if let Some(q) = &p.q {
        inst = inst.with_plan(parse_plan(q, inst.loads())?)?;
    }
    Ok((inst, parse_objective(&p.objective)?))
}

fn render_schedule(s: &Schedule, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(scenario::write_schedule(s)),
        Format::Ascii => Ok(gantt::ascii(s)),
        Format::Svg => Ok(gantt::svg(s)),
        other => Err(CliError::structural(format!("format {other:?} does not apply to schedules"))),
    }
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let options = solver_options(cli.mode);
    match &cli.command {
        Command::Solve { problem, format } => {
            let (inst, obj) = load_problem(problem)?;
            let s = optimal_schedule_with(&inst, &obj, &options)?;
            render_schedule(&s, *format)
        }
        Command::Validate { scenario: sc, schedule, tolerance: tol } => {
            let inst = scenario::parse_scenario(&read(sc)?)?;
            let s = scenario::parse_schedule(&read(schedule)?)?;
            let tol = match tol {
                Some(t) => Tolerance::Absolute(rational_arg(t, "--tolerance")?),
                None => tolerance(cli.mode),
            };
            let report = validate_schedule_with(&inst, &s, &tol)?;
            let json = scenario::report_to_json(&report);
            if report.feasible {
                Ok(pretty(&json))
            } else {
                let families = report.families();
                Err(CliError::infeasible(
                    format!("schedule violates constraint families {families:?}"),
                    Some(json!({ "families": families, "report": json })),
                ))
            }
        }
        Command::Simulate { scenario: sc, gamma, format } => {
            let inst = scenario::parse_scenario(&read(sc)?)?;
            let value: Value = serde_json::from_str(&read(gamma)?).map_err(|e| CliError::structural(format!("--gamma: {e}")))?;
            let table = value.get("gamma").unwrap_or(&value);
            let wrapped = json!({ "gamma": table, "comm_start": [], "comm_end": [], "comp_start": [], "comp_end": [], "makespan": 0 });
            let fractions = scenario::schedule_from_json(&wrapped)?.gamma;
            let s = simulate(&inst, fractions)?;
            render_schedule(&s, *format)
        }
        Command::Sweep { scenario: sc, q_max, format } => {
            let inst = scenario::parse_scenario(&read(sc)?)?;
            let points = refine::installment_sweep(&inst.platform, &inst.loads, *q_max, &options)?;
            match format {
                Format::Csv => Ok(gantt::sweep_csv(&points)),
                Format::Svg => Ok(gantt::sweep_svg(&points)),
                Format::Json => Ok(pretty(&Value::Array(
                    points
                        .iter()
                        .map(|p| json!({ "q": p.q, "makespan": to_exact_string(&p.makespan), "makespan_decimal": to_decimal_string(&p.makespan) }))
                        .collect(),
                ))),
                other => Err(CliError::structural(format!("format {other:?} does not apply to sweeps"))),
            }
        }
        Command::Example { lambda, lambda_from, lambda_to, lambda_step, emit_scenario } => match lambda {
            Some(l) => {
                let x = ExampleInstance::new(rational_arg(l, "--lambda")?)?;
                if *emit_scenario {
                    Ok(scenario::write_scenario(&x.instance([1, 1])?))
                } else {
                    example_report(&x, &options)
                }
            }
            None => {
                let (Some(from), Some(to), Some(step)) = (lambda_from, lambda_to, lambda_step) else {
                    return Err(CliError::structural("example needs --lambda or --lambda-from/--lambda-to/--lambda-step"));
                };
                let from = rational_arg(from, "--lambda-from")?;
                let to = rational_arg(to, "--lambda-to")?;
                let step = rational_arg(step, "--lambda-step")?;
                example_grid(&from, &to, &step, &options)
            }
        },
        Command::Refine { scenario: sc, schedule, split, resolve, overhead } => {
            let inst = scenario::parse_scenario(&read(sc)?)?;
            if let Some(spec) = overhead {
                let (k, rho) = spec.split_once(',').ok_or_else(|| CliError::structural("--overhead expects `K,rho_max`"))?;
                let om = OverheadModel::new(rational_arg(k, "--overhead K")?, rational_arg(rho, "--overhead rho_max")?)?;
                let bounds = inst
                    .loads
                    .v_comm()
                    .iter()
                    .map(|v| refine::bounded_installments(v, inst.m(), &om))
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok(pretty(&json!({ "q": bounds })));
            }
            let Some(split) = split else {
                return Err(CliError::structural("refine needs --split n,j or --overhead K,rho_max"));
            };
            let spec = parse_split(split)?;
            let s = match schedule {
                Some(path) => scenario::parse_schedule(&read(path)?)?,
                None => optimal_schedule_with(&inst, &ObjectiveSpec::Makespan, &options)?,
            };
            let out = if *resolve {
                refine::split_and_resolve(&inst, &s, spec, &options)?
            } else {
                refine::split_installment(&inst, &s, spec)?
            };
            let mut v = scenario::schedule_to_json(&out.schedule);
            v["plan"] = json!({ "q": out.instance.plan.q() });
            Ok(pretty(&v))
        }
        Command::ExportLp { problem, format } => {
            let (inst, obj) = load_problem(problem)?;
            let fmt = match format {
                Format::Lp => ExportFormat::LpText,
                Format::Mps => ExportFormat::Mps,
                other => return Err(CliError::structural(format!("format {other:?} does not apply to LP export"))),
            };
            Ok(export_lp(&build_lp(&inst, &obj), fmt))
        }
        Command::Gantt { problem, schedule, format } => {
            let (inst, obj) = load_problem(problem)?;
            let s = match schedule {
                Some(path) => scenario::parse_schedule(&read(path)?)?,
                None => optimal_schedule_with(&inst, &obj, &options)?,
            };
            match format {
                Format::Ascii | Format::Svg => render_schedule(&s, *format),
                other => Err(CliError::structural(format!("format {other:?} does not apply to charts"))),
            }
        }
    }
}

fn parse_split(text: &str) -> Result<SplitSpec, CliError> {
    let bad = || CliError::structural(format!("--split expects `n,j`, got `{text}`"));
    let (n, j) = text.split_once(',').ok_or_else(bad)?;
    Ok(SplitSpec::new(n.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
}

fn lp_makespan(x: &ExampleInstance, q: [usize; 2], options: &SolverOptions) -> Result<Rational, CliError> {
    Ok(optimal_schedule_with(&x.instance(q)?, &ObjectiveSpec::Makespan, options)?.makespan)
}

/// The summary line for one lambda, followed by the same figures in
/// decimal.
pub fn example_report(x: &ExampleInstance, options: &SolverOptions) -> Result<String, CliError> {
    let lp11 = lp_makespan(x, [1, 1], options)?;
    let regime = x.regime();
    let mut exact = vec![regime.to_string()];
    let mut decimal = Vec::new();
    let mut both = |label: String, v: &Rational| {
        exact.push(format!("{label} {}", to_exact_string(v)));
        decimal.push(format!("{label} {}", to_decimal_string(v)));
    };
    match regime {
        Regime::HeuristicIncomplete | Regime::HeuristicInfinite => {
            both("coverage bound".into(), &reference::coverage_bound(x.lambda()));
            both("LP(1,1) makespan".into(), &lp11);
        }
        Regime::HeuristicMulti => {
            let MultiInstallment::Schedule { q, schedule } = reference::mvb_multi_installment(x)? else {
                unreachable!("finite in this regime");
            };
            both(format!("heuristic Q={q} makespan"), &schedule.makespan);
            both("LP(1,1) makespan".into(), &lp11);
            both(format!("LP(1,{q}) makespan"), &lp_makespan(x, [1, q], options)?);
        }
        Regime::HeuristicSingle => {
            let h = reference::mvb_one_installment(x)?.makespan;
            both("heuristic makespan".into(), &h);
            both("LP(1,1) makespan".into(), &lp11);
            both("gap".into(), &(&h - &lp11));
        }
    }
    Ok(format!("{}\ndecimal: {}\n", exact.join("; "), decimal.join("; ")))
}

/// One CSV row per lambda on the grid `from, from + step, ... <= to`.
pub fn example_grid(from: &Rational, to: &Rational, step: &Rational, options: &SolverOptions) -> Result<String, CliError> {
    if step <= &Rational::from_integer(0.into()) {
        return Err(CliError::structural("--lambda-step must be > 0"));
    }
    let mut grid = Vec::new();
    let mut l = from.clone();
    while &l <= to {
        grid.push(l.clone());
        l += step;
    }
    let rows = grid
        .par_iter()
        .map(|l| {
            let x = ExampleInstance::new(l.clone())?;
            let lp11 = lp_makespan(&x, [1, 1], options)?;
            let (heuristic, q) = match x.regime() {
                Regime::HeuristicSingle => (Some(reference::mvb_one_installment(&x)?.makespan), Some(1)),
                Regime::HeuristicMulti => match reference::mvb_multi_installment(&x)? {
                    MultiInstallment::Schedule { q, schedule } => (Some(schedule.makespan), Some(q)),
                    MultiInstallment::Infeasible { .. } => (None, None),
                },
                _ => (None, None),
            };
            let lp_heur = match q {
                Some(q) => Some(lp_makespan(&x, [1, q], options)?),
                None => None,
            };
            let cell = |v: &Option<Rational>| match v {
                Some(v) => format!("{},{}", to_exact_string(v), to_decimal_string(v)),
                None => ",".to_string(),
            };
            Ok::<_, CliError>(format!(
                "{},{},{},{},{},{},{},{}",
                to_exact_string(l),
                to_decimal_string(l),
                x.regime(),
                cell(&Some(reference::makespan_one(l))),
                cell(&heuristic),
                q.map_or(String::new(), |q| q.to_string()),
                cell(&Some(lp11)),
                cell(&lp_heur)
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = String::from(
        "lambda,lambda_decimal,regime,makespan1,makespan1_decimal,heuristic,heuristic_decimal,heuristic_q,lp_1_1,lp_1_1_decimal,lp_heuristic_plan,lp_heuristic_plan_decimal\n",
    );
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}
