//! JSON encodings of scenarios, schedules and validation reports.
//!
//! Rationals are written as `"p/q"` strings. On input, JSON numbers are
//! accepted too and read from their literal text, so `0.1` means exactly
//! one tenth.
//!
//! Scenario:
//!
//! ```json
//! {
//!   "platform": {"m": 2, "w": ["1/2", "1/2"], "z": [1], "tau": [0, 0]},
//!   "loads": {"v_comm": [1, 1], "v_comp": [1, 1]},
//!   "plan": {"q": [1, 1]}
//! }
//! ```
//!
//! `platform.tau` defaults to zeros, `platform.w_unrelated` (an `m x N`
//! matrix) replaces `w`, `loads.release` is optional and a missing `plan`
//! means one installment per load.
//!
//! Schedule tables are nested `[load][installment][processor or link]`,
//! matching [`Schedule`]. Written schedules carry a `decimal` object with
//! the same tables rendered to 12 significant digits; readers ignore it.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::error::ModelError;
use crate::model::{Instance, InstallmentPlan, LoadSet, PerInstallment, Platform, Schedule, ValidationReport};
use crate::rational::{parse_rational, to_decimal_string, to_exact_string, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn field_error(path: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Field { path: path.to_string(), message: message.into() }
}

pub fn rational_from_json(v: &Value, path: &str) -> Result<Rational, ScenarioError> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(field_error(path, "expected a number or a \"p/q\" string")),
    };
    parse_rational(&text).map_err(|e| field_error(path, e.to_string()))
}

fn rational_list(v: &Value, path: &str) -> Result<Vec<Rational>, ScenarioError> {
    let items = v.as_array().ok_or_else(|| field_error(path, "expected an array"))?;
    items.iter().enumerate().map(|(k, x)| rational_from_json(x, &format!("{path}[{k}]"))).collect()
}

fn rational_matrix(v: &Value, path: &str) -> Result<Vec<Vec<Rational>>, ScenarioError> {
    let rows = v.as_array().ok_or_else(|| field_error(path, "expected an array of arrays"))?;
    rows.iter().enumerate().map(|(k, r)| rational_list(r, &format!("{path}[{k}]"))).collect()
}

fn rational_table(v: &Value, path: &str) -> Result<PerInstallment<Rational>, ScenarioError> {
    let loads = v.as_array().ok_or_else(|| field_error(path, "expected a nested array"))?;
    loads.iter().enumerate().map(|(k, l)| rational_matrix(l, &format!("{path}[{k}]"))).collect()
}

fn get<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value, ScenarioError> {
    obj.get(key).ok_or_else(|| field_error(path, format!("missing field `{key}`")))
}

pub fn rational_to_json(r: &Rational) -> Value {
    Value::String(to_exact_string(r))
}

fn list_json(xs: &[Rational], render: fn(&Rational) -> String) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(render(x))).collect())
}

fn table_json(t: &PerInstallment<Rational>, render: fn(&Rational) -> String) -> Value {
    Value::Array(
        t.iter().map(|load| Value::Array(load.iter().map(|row| list_json(row, render)).collect())).collect(),
    )
}

fn parse_json(text: &str) -> Result<Value, ScenarioError> {
    serde_json::from_str(text).map_err(|e| ScenarioError::Json(e.to_string()))
}

pub fn parse_scenario(text: &str) -> Result<Instance, ScenarioError> {
    scenario_from_json(&parse_json(text)?)
}

pub fn scenario_from_json(root: &Value) -> Result<Instance, ScenarioError> {
    let platform = get(root, "platform", "$")?;
    let loads = get(root, "loads", "$")?;

    let v_comm = rational_list(get(loads, "v_comm", "loads")?, "loads.v_comm")?;
    let v_comp = rational_list(get(loads, "v_comp", "loads")?, "loads.v_comp")?;
    let mut load_set = LoadSet::new(v_comm, v_comp)?;
    if let Some(r) = loads.get("release").filter(|r| !r.is_null()) {
        load_set = load_set.with_release(rational_list(r, "loads.release")?)?;
    }

    let z = rational_list(get(platform, "z", "platform")?, "platform.z")?;
    let m = z.len() + 1;
    let tau = match platform.get("tau").filter(|t| !t.is_null()) {
        Some(t) => rational_list(t, "platform.tau")?,
        None => vec![Rational::from_integer(0.into()); m],
    };
    let plat = match platform.get("w_unrelated").filter(|w| !w.is_null()) {
        Some(w) => Platform::unrelated(rational_matrix(w, "platform.w_unrelated")?, z, tau)?,
        None => Platform::new(rational_list(get(platform, "w", "platform")?, "platform.w")?, z, tau)?,
    };
    if let Some(declared) = platform.get("m") {
        let declared = declared.as_u64().ok_or_else(|| field_error("platform.m", "expected a positive integer"))?;
        if declared as usize != plat.m() {
            return Err(field_error("platform.m", format!("says {declared} but the arrays describe {} processors", plat.m())));
        }
    }

    let plan = match root.get("plan").filter(|p| !p.is_null()) {
        Some(p) => {
            let q = get(p, "q", "plan")?.as_array().ok_or_else(|| field_error("plan.q", "expected an array"))?;
            let q = q
                .iter()
                .enumerate()
                .map(|(k, x)| {
                    x.as_u64().map(|x| x as usize).ok_or_else(|| field_error(&format!("plan.q[{k}]"), "expected an integer"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            InstallmentPlan::new(q)?
        }
        None => InstallmentPlan::uniform(load_set.count(), 1)?,
    };
    Ok(Instance::new(plat, load_set, plan)?)
}

pub fn scenario_to_json(inst: &Instance) -> Value {
    let p = &inst.platform;
    let mut platform = Map::new();
    platform.insert("m".into(), json!(p.m()));
    match p.speeds() {
        crate::model::ComputeSpeeds::Uniform(w) => {
            platform.insert("w".into(), list_json(w, to_exact_string));
        }
        crate::model::ComputeSpeeds::Unrelated(w) => {
            platform.insert("w_unrelated".into(), Value::Array(w.iter().map(|r| list_json(r, to_exact_string)).collect()));
        }
    }
    platform.insert("z".into(), list_json(p.z(), to_exact_string));
    platform.insert("tau".into(), list_json(p.tau(), to_exact_string));

    let l = &inst.loads;
    let mut loads = Map::new();
    loads.insert("v_comm".into(), list_json(l.v_comm(), to_exact_string));
    loads.insert("v_comp".into(), list_json(l.v_comp(), to_exact_string));
    if let Some(r) = l.release() {
        loads.insert("release".into(), list_json(r, to_exact_string));
    }
    json!({ "platform": platform, "loads": loads, "plan": { "q": inst.plan.q() } })
}

pub fn write_scenario(inst: &Instance) -> String {
    pretty(&scenario_to_json(inst))
}

pub fn parse_schedule(text: &str) -> Result<Schedule, ScenarioError> {
    schedule_from_json(&parse_json(text)?)
}

pub fn schedule_from_json(root: &Value) -> Result<Schedule, ScenarioError> {
    let table = |key: &str| rational_table(get(root, key, "$")?, key);
    let gamma = table("gamma")?;
    let comm_start = table("comm_start")?;
    let comm_end = table("comm_end")?;
    let comp_start = table("comp_start")?;
    let comp_end = table("comp_end")?;
    let makespan = rational_from_json(get(root, "makespan", "$")?, "makespan")?;
    Ok(Schedule { gamma, comm_start, comm_end, comp_start, comp_end, makespan })
}

pub fn schedule_to_json(s: &Schedule) -> Value {
    let tables = |render: fn(&Rational) -> String| {
        json!({
            "gamma": table_json(&s.gamma, render),
            "comm_start": table_json(&s.comm_start, render),
            "comm_end": table_json(&s.comm_end, render),
            "comp_start": table_json(&s.comp_start, render),
            "comp_end": table_json(&s.comp_end, render),
            "makespan": render(&s.makespan),
        })
    };
    let mut root = match tables(to_exact_string) {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    root.insert("makespan_decimal".into(), Value::String(to_decimal_string(&s.makespan)));
    root.insert("decimal".into(), tables(to_decimal_string));
    Value::Object(root)
}

pub fn write_schedule(s: &Schedule) -> String {
    pretty(&schedule_to_json(s))
}

pub fn report_to_json(r: &ValidationReport) -> Value {
    let violations: Vec<Value> = r
        .violations
        .iter()
        .map(|v| {
            json!({
                "family": v.family,
                "index": v.index,
                "relation": v.relation.to_string(),
                "lhs": to_exact_string(&v.lhs),
                "rhs": to_exact_string(&v.rhs),
                "lhs_decimal": to_decimal_string(&v.lhs),
                "rhs_decimal": to_decimal_string(&v.rhs),
            })
        })
        .collect();
    json!({
        "feasible": r.feasible,
        "families": r.families(),
        "violations": violations,
        "recomputed_makespan": to_exact_string(&r.recomputed_makespan),
        "recomputed_makespan_decimal": to_decimal_string(&r.recomputed_makespan),
    })
}

/// Two-space indented JSON with a trailing newline.
pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}
