//! Text encodings of an [`LpModel`]: CPLEX-style LP files and fixed-column
//! MPS. Both are deterministic for a given model.
//!
//! Coefficients that are terminating decimals are written exactly. Others
//! are rounded to 17 significant digits in LP files and to whatever fits the
//! 12-character numeric fields of fixed MPS.

use std::fmt::Write;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use super::LpModel;
use crate::model::Relation;
use crate::rational::{parse_rational, to_significant, to_terminating_decimal, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    LpText,
    Mps,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lp" | "lp-text" => Ok(ExportFormat::LpText),
            "mps" => Ok(ExportFormat::Mps),
            other => Err(format!("unsupported LP export format `{other}` (expected lp or mps)")),
        }
    }
}

pub fn export_lp(model: &LpModel, format: ExportFormat) -> String {
    match format {
        ExportFormat::LpText => write_lp_text(model),
        ExportFormat::Mps => write_mps(model),
    }
}

fn lp_number(value: &Rational) -> String {
    to_terminating_decimal(value).unwrap_or_else(|| to_significant(value, 17))
}

fn write_terms(out: &mut String, terms: &[(String, Rational)], indent: &str) {
    let mut line_len = 0;
    for (k, (name, coef)) in terms.iter().enumerate() {
        let magnitude = coef.abs();
        let body = if magnitude.is_one() { name.clone() } else { format!("{} {}", lp_number(&magnitude), name) };
        let piece = match (k, coef.is_negative()) {
            (0, false) => body,
            (0, true) => format!("- {body}"),
            (_, false) => format!(" + {body}"),
            (_, true) => format!(" - {body}"),
        };
        if line_len > 0 && line_len + piece.len() > 72 {
            out.push('\n');
            out.push_str(indent);
            line_len = 0;
        }
        line_len += piece.len();
        out.push_str(&piece);
    }
}

fn named(model: &LpModel, terms: &[(usize, Rational)]) -> Vec<(String, Rational)> {
    terms.iter().map(|(v, c)| (model.variables[*v].name(), c.clone())).collect()
}

fn write_lp_text(model: &LpModel) -> String {
    let mut out = String::new();
    writeln!(out, "\\ divisible load schedule on a linear chain").unwrap();
    writeln!(out, "\\ {} variables, {} constraints", model.variables.len(), model.constraints.len()).unwrap();
    out.push_str("Minimize\n obj: ");
    write_terms(&mut out, &named(model, &model.objective), "   ");
    if !model.objective_constant.is_zero() || model.objective.is_empty() {
        let c = &model.objective_constant;
        let sign = if c.is_negative() { "-" } else { "+" };
        if model.objective.is_empty() {
            let lead = if c.is_negative() { "- " } else { "" };
            write!(out, "{lead}{}", lp_number(&c.abs())).unwrap();
        } else {
            write!(out, " {sign} {}", lp_number(&c.abs())).unwrap();
        }
    }
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        write!(out, " {}: ", c.name).unwrap();
        write_terms(&mut out, &named(model, &c.terms), "   ");
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        writeln!(out, " {rel} {}", lp_number(&c.rhs)).unwrap();
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        writeln!(out, " {} >= 0", v.name()).unwrap();
    }
    out.push_str("End\n");
    out
}

fn mps_number(value: &Rational) -> String {
    if let Some(exact) = to_terminating_decimal(value) {
        if exact.len() <= 12 {
            return exact;
        }
    }
    (1..=12)
        .rev()
        .map(|digits| to_significant(value, digits))
        .map(|s| trim_decimal(&s))
        .find(|s| s.len() <= 12)
        .unwrap_or_else(|| "0".to_string())
}

fn trim_decimal(s: &str) -> String {
    match s.split_once('e') {
        Some((mantissa, exp)) => format!("{}e{}", trim_fraction(mantissa), exp),
        None => trim_fraction(s),
    }
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn mps_line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str, f5: &str, f6: &str) {
    let line = format!(" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}   {f5:<8}  {f6:>12}");
    out.push_str(line.trim_end());
    out.push('\n');
}

fn column_code(k: usize) -> String {
    format!("X{:07}", k + 1)
}

fn row_code(k: usize) -> String {
    format!("R{:07}", k + 1)
}

fn write_mps(model: &LpModel) -> String {
    let mut out = String::new();
    out.push_str("* divisible load schedule on a linear chain\n");
    for (k, v) in model.variables.iter().enumerate() {
        writeln!(out, "* {} {}", column_code(k), v.name()).unwrap();
    }
    for (k, c) in model.constraints.iter().enumerate() {
        writeln!(out, "* {} {}", row_code(k), c.name).unwrap();
    }
    out.push_str("NAME          CHAINLP\nROWS\n");
    mps_line(&mut out, "N", "OBJ", "", "", "", "");
    for (k, c) in model.constraints.iter().enumerate() {
        let kind = match c.relation {
            Relation::Le => "L",
            Relation::Eq => "E",
            Relation::Ge => "G",
        };
        mps_line(&mut out, kind, &row_code(k), "", "", "", "");
    }

    let mut columns: Vec<Vec<(String, String)>> = vec![Vec::new(); model.variables.len()];
    for (v, c) in &model.objective {
        columns[*v].push(("OBJ".into(), mps_number(c)));
    }
    for (k, c) in model.constraints.iter().enumerate() {
        for (v, a) in &c.terms {
            columns[*v].push((row_code(k), mps_number(a)));
        }
    }
    out.push_str("COLUMNS\n");
    for (k, entries) in columns.iter().enumerate() {
        for pair in entries.chunks(2) {
            let (r1, v1) = &pair[0];
            let (r2, v2) = pair.get(1).map_or(("", ""), |(r, v)| (r.as_str(), v.as_str()));
            mps_line(&mut out, "", &column_code(k), r1, v1, r2, v2);
        }
    }

    out.push_str("RHS\n");
    if !model.objective_constant.is_zero() {
        // Solvers read the objective constant as minus the objective RHS.
        mps_line(&mut out, "", "RHS", "OBJ", &mps_number(&-&model.objective_constant), "", "");
    }
    let rhs: Vec<(String, String)> = model
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.rhs.is_zero())
        .map(|(k, c)| (row_code(k), mps_number(&c.rhs)))
        .collect();
    for pair in rhs.chunks(2) {
        let (r2, v2) = pair.get(1).map_or(("", ""), |(r, v)| (r.as_str(), v.as_str()));
        mps_line(&mut out, "", "RHS", &pair[0].0, &pair[0].1, r2, v2);
    }
    out.push_str("ENDATA\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("LP text line {line}: {message}")]
pub struct ParseLpError {
    pub line: usize,
    pub message: String,
}

/// A model read back from LP text, keyed by variable name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedLp {
    pub objective: Vec<(String, Rational)>,
    pub objective_constant: Rational,
    pub constraints: Vec<ParsedConstraint>,
    /// Variables declared in the bounds section, in order.
    pub declared: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConstraint {
    pub name: String,
    pub terms: Vec<(String, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl ParsedLp {
    /// The same view of an in-memory model, for comparisons.
    pub fn of_model(model: &LpModel) -> Self {
        Self {
            objective: named(model, &model.objective),
            objective_constant: model.objective_constant.clone(),
            constraints: model
                .constraints
                .iter()
                .map(|c| ParsedConstraint {
                    name: c.name.clone(),
                    terms: named(model, &c.terms),
                    relation: c.relation,
                    rhs: c.rhs.clone(),
                })
                .collect(),
            declared: model.variables.iter().map(|v| v.name()).collect(),
        }
    }
}

#[derive(PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Done,
}

/// Reads the LP subset written by [`export_lp`]: one minimize objective,
/// named linear constraints, and `name >= 0` bounds.
pub fn parse_lp_text(text: &str) -> Result<ParsedLp, ParseLpError> {
    let mut parsed = ParsedLp::default();
    let mut section = Section::Preamble;
    let mut objective_text = String::new();
    let mut pending: Vec<(usize, String)> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.to_ascii_lowercase().as_str() {
            "minimize" | "minimise" | "min" => {
                section = Section::Objective;
                continue;
            }
            "subject to" | "such that" | "st" | "s.t." => {
                section = Section::Constraints;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "end" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        let err = |message: String| ParseLpError { line: line_no, message };
        match section {
            Section::Preamble => return Err(err(format!("unexpected `{line}` before objective"))),
            Section::Done => return Err(err(format!("unexpected `{line}` after End"))),
            Section::Objective => {
                objective_text.push(' ');
                objective_text.push_str(line);
            }
            Section::Constraints => {
                if line.contains(':') || pending.is_empty() {
                    pending.push((line_no, line.to_string()));
                } else if let Some((_, last)) = pending.last_mut() {
                    last.push(' ');
                    last.push_str(line);
                }
            }
            Section::Bounds => {
                let (name, bound) = line.split_once(">=").ok_or_else(|| err("expected `name >= 0`".into()))?;
                let bound = parse_rational(bound).map_err(|e| err(e.to_string()))?;
                if !bound.is_zero() {
                    return Err(err("only zero lower bounds are supported".into()));
                }
                parsed.declared.push(name.trim().to_string());
            }
        }
    }

    let objective_body = objective_text.split_once(':').map_or(objective_text.as_str(), |(_, b)| b);
    let (terms, constant) = parse_expression(objective_body).map_err(|message| ParseLpError { line: 0, message })?;
    parsed.objective = terms;
    parsed.objective_constant = constant;

    for (line, text) in pending {
        let err = |message: String| ParseLpError { line, message };
        let (name, body) = text.split_once(':').ok_or_else(|| err("constraint without a name".into()))?;
        let (relation, pos, len) = ["<=", ">=", "=<", "=>", "="]
            .iter()
            .find_map(|op| body.find(op).map(|p| (*op, p, op.len())))
            .ok_or_else(|| err("missing relation".into()))?;
        let relation = match relation {
            "<=" | "=<" => Relation::Le,
            ">=" | "=>" => Relation::Ge,
            _ => Relation::Eq,
        };
        let (terms, constant) = parse_expression(&body[..pos]).map_err(err)?;
        if !constant.is_zero() {
            return Err(err("constant on the left-hand side".into()));
        }
        let rhs = parse_rational(&body[pos + len..]).map_err(|e| err(e.to_string()))?;
        parsed.constraints.push(ParsedConstraint { name: name.trim().to_string(), terms, relation, rhs });
    }
    Ok(parsed)
}

fn parse_expression(text: &str) -> Result<(Vec<(String, Rational)>, Rational), String> {
    let mut terms = Vec::new();
    let mut constant = Rational::zero();
    let mut sign = Rational::one();
    let mut coef: Option<Rational> = None;
    for token in text.split_whitespace() {
        match token {
            "+" => {}
            "-" => sign = -sign,
            _ if token.starts_with(|c: char| c.is_ascii_digit() || c == '.') => {
                if let Some(c) = coef.take() {
                    constant += sign.clone() * c;
                    sign = Rational::one();
                }
                coef = Some(parse_rational(token).map_err(|e| e.to_string())?);
            }
            name => {
                let c = coef.take().unwrap_or_else(Rational::one);
                terms.push((name.to_string(), sign * c));
                sign = Rational::one();
            }
        }
    }
    if let Some(c) = coef {
        constant += sign * c;
    }
    Ok((terms, constant))
}
