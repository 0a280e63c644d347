//! The scheduling linear program for a fixed installment plan.
//!
//! [`build_lp`] emits one row per instance of the thirteen constraint
//! families (transfer chaining and one-port serialization, transfer and
//! compute durations, precedence, availability, normalization, makespan),
//! [`solve_lp`] optimizes it with a two-phase simplex, and
//! [`optimal_schedule`] turns the optimum back into a [`Schedule`].

mod certify;
mod revised;
mod export;
mod simplex;

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

pub use export::{export_lp, parse_lp_text, ExportFormat, ParseLpError, ParsedConstraint, ParsedLp};
pub use simplex::{Arithmetic, PivotRule, SolverOptions, DEFAULT_ITERATION_CAP};

use crate::error::ModelError;
use crate::model::{Instance, PerInstallment, Relation, Schedule};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    CommStart,
    CommEnd,
    CompStart,
    CompEnd,
    Gamma,
    Makespan,
    /// Completion time of one load, used by affine objectives.
    Completion,
}

/// A program variable. `i` is a processor or link, `n` a load and `j` an
/// installment, all 0-based; unused coordinates are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable {
    pub kind: VarKind,
    pub i: usize,
    pub n: usize,
    pub j: usize,
}

impl Variable {
    pub fn new(kind: VarKind, i: usize, n: usize, j: usize) -> Self {
        Self { kind, i, n, j }
    }

    /// `S_i_n_j`, `E_i_n_j`, `Cs_i_n_j`, `Ce_i_n_j`, `gamma_i_n_j`,
    /// `makespan` or `C_n`, with 1-based subscripts.
    pub fn name(&self) -> String {
        let (i, n, j) = (self.i + 1, self.n + 1, self.j + 1);
        match self.kind {
            VarKind::CommStart => format!("S_{i}_{n}_{j}"),
            VarKind::CommEnd => format!("E_{i}_{n}_{j}"),
            VarKind::CompStart => format!("Cs_{i}_{n}_{j}"),
            VarKind::CompEnd => format!("Ce_{i}_{n}_{j}"),
            VarKind::Gamma => format!("gamma_{i}_{n}_{j}"),
            VarKind::Makespan => "makespan".to_string(),
            VarKind::Completion => format!("C_{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Constraint family, 1 to 13.
    pub family: u8,
    pub name: String,
    pub terms: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    Makespan,
    /// `sum_n weights[n] * C_n + constant`, where `C_n` is the completion
    /// time of load `n`.
    Affine { weights: Vec<Rational>, constant: Rational },
}

/// All variables are implicitly non-negative; the objective is minimized.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(usize, Rational)>,
    pub objective_constant: Rational,
    index: HashMap<Variable, usize>,
}

impl LpModel {
    pub fn new() -> Self {
        Self {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            objective_constant: Rational::zero(),
            index: HashMap::new(),
        }
    }

    pub fn add_variable(&mut self, v: Variable) -> usize {
        *self.index.entry(v).or_insert_with(|| {
            self.variables.push(v);
            self.variables.len() - 1
        })
    }

    pub fn var(&self, kind: VarKind, i: usize, n: usize, j: usize) -> Option<usize> {
        self.index.get(&Variable::new(kind, i, n, j)).copied()
    }

    pub fn var_by_name(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name() == name)
    }

    pub fn add_constraint(
        &mut self,
        family: u8,
        name: impl Into<String>,
        terms: Vec<(usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) {
        let terms = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        self.constraints.push(Constraint { family, name: name.into(), terms, relation, rhs });
    }

    pub fn family_rows(&self, family: u8) -> usize {
        self.constraints.iter().filter(|c| c.family == family).count()
    }

    /// Left-hand side of `c` at `values`.
    pub fn row_value(c: &Constraint, values: &[Rational]) -> Rational {
        c.terms.iter().map(|(v, a)| a * &values[*v]).sum()
    }
}

impl Default for LpModel {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// One value per model variable; empty unless optimal.
    pub values: Vec<Rational>,
    pub objective_value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("simplex iteration cap of {0} reached")]
    IterationLimit(usize),
    #[error("linear program is {0}")]
    NotOptimal(LpStatus),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn row_name(family: u8, index: &[usize]) -> String {
    let mut s = format!("c{family}");
    for k in index {
        s.push('_');
        s.push_str(&(k + 1).to_string());
    }
    s
}

/// Emits the scheduling program for `inst`.
///
/// The last link has no downstream forward to wait for, so families 2 and 3
/// serialize its consecutive transfers directly; this is what the one-port
/// rule asks of `P_{m-1}` and `P_m`.
pub fn build_lp(inst: &Instance, obj: &ObjectiveSpec) -> LpModel {
    let m = inst.m();
    let links = m - 1;
    let n_loads = inst.loads();
    let mut lp = LpModel::new();

    let each = |f: &mut dyn FnMut(usize, usize)| {
        for n in 0..n_loads {
            for j in 0..inst.q(n) {
                f(n, j);
            }
        }
    };
    for kind in [VarKind::CommStart, VarKind::CommEnd] {
        each(&mut |n, j| {
            for l in 0..links {
                lp.add_variable(Variable::new(kind, l, n, j));
            }
        });
    }
    for kind in [VarKind::CompStart, VarKind::CompEnd, VarKind::Gamma] {
        each(&mut |n, j| {
            for i in 0..m {
                lp.add_variable(Variable::new(kind, i, n, j));
            }
        });
    }
    let makespan = lp.add_variable(Variable::new(VarKind::Makespan, 0, 0, 0));
    let completions: Vec<usize> = match obj {
        ObjectiveSpec::Makespan => Vec::new(),
        ObjectiveSpec::Affine { .. } => {
            (0..n_loads).map(|n| lp.add_variable(Variable::new(VarKind::Completion, 0, n, 0))).collect()
        }
    };

    let v = |lp: &LpModel, kind, i, n, j| lp.var(kind, i, n, j).expect("variable registered above");
    let one = Rational::one;
    let zero = Rational::zero;
    let last = |n: usize| inst.q(n) - 1;
    let platform = &inst.platform;
    let loads = &inst.loads;
    use Relation::{Eq, Ge};
    use VarKind::*;

    // (1)
    for n in 0..n_loads {
        for j in 0..inst.q(n) {
            for l in 0..links.saturating_sub(1) {
                let terms = vec![(v(&lp, CommStart, l + 1, n, j), one()), (v(&lp, CommEnd, l, n, j), -one())];
                lp.add_constraint(1, row_name(1, &[l, n, j]), terms, Ge, zero());
            }
        }
    }
    // (2)
    for n in 0..n_loads {
        for j in 0..last(n) {
            for l in 0..links {
                let blocker = if l + 1 < links { l + 1 } else { l };
                let terms = vec![(v(&lp, CommStart, l, n, j + 1), one()), (v(&lp, CommEnd, blocker, n, j), -one())];
                lp.add_constraint(2, row_name(2, &[l, n, j]), terms, Ge, zero());
            }
        }
    }
    // (3)
    for n in 0..n_loads.saturating_sub(1) {
        for l in 0..links {
            let blocker = if l + 1 < links { l + 1 } else { l };
            let terms = vec![(v(&lp, CommStart, l, n + 1, 0), one()), (v(&lp, CommEnd, blocker, n, last(n)), -one())];
            lp.add_constraint(3, row_name(3, &[l, n]), terms, Ge, zero());
        }
    }
    // (4)
    each(&mut |n, j| {
        for l in 0..links {
            lp.add_constraint(4, row_name(4, &[l, n, j]), vec![(v(&lp, CommStart, l, n, j), one())], Ge, zero());
        }
    });
    if let Some(release) = loads.release() {
        if links > 0 {
            for (n, r) in release.iter().enumerate() {
                let name = format!("r4_1_{}_1", n + 1);
                lp.add_constraint(4, name, vec![(v(&lp, CommStart, 0, n, 0), one())], Ge, r.clone());
            }
        }
    }
    // (5)
    each(&mut |n, j| {
        for l in 0..links {
            let volume = &platform.z()[l] * &loads.v_comm()[n];
            let mut terms = vec![(v(&lp, CommEnd, l, n, j), one()), (v(&lp, CommStart, l, n, j), -one())];
            for k in l + 1..m {
                terms.push((v(&lp, Gamma, k, n, j), -volume.clone()));
            }
            lp.add_constraint(5, row_name(5, &[l, n, j]), terms, Eq, zero());
        }
    });
    // (6)
    each(&mut |n, j| {
        for i in 1..m {
            let terms = vec![(v(&lp, CompStart, i, n, j), one()), (v(&lp, CommEnd, i - 1, n, j), -one())];
            lp.add_constraint(6, row_name(6, &[i, n, j]), terms, Ge, zero());
        }
    });
    // (7)
    each(&mut |n, j| {
        for i in 0..m {
            let work = platform.w(i, n) * &loads.v_comp()[n];
            let terms = vec![
                (v(&lp, CompEnd, i, n, j), one()),
                (v(&lp, CompStart, i, n, j), -one()),
                (v(&lp, Gamma, i, n, j), -work),
            ];
            lp.add_constraint(7, row_name(7, &[i, n, j]), terms, Eq, zero());
        }
    });
    // (8)
    for n in 0..n_loads.saturating_sub(1) {
        for i in 0..m {
            let terms = vec![(v(&lp, CompStart, i, n + 1, 0), one()), (v(&lp, CompEnd, i, n, last(n)), -one())];
            lp.add_constraint(8, row_name(8, &[i, n]), terms, Ge, zero());
        }
    }
    // (9)
    for n in 0..n_loads {
        for j in 0..last(n) {
            for i in 0..m {
                let terms = vec![(v(&lp, CompStart, i, n, j + 1), one()), (v(&lp, CompEnd, i, n, j), -one())];
                lp.add_constraint(9, row_name(9, &[i, n, j]), terms, Ge, zero());
            }
        }
    }
    // (10)
    for i in 0..m {
        let tau = platform.tau()[i].clone();
        lp.add_constraint(10, row_name(10, &[i]), vec![(v(&lp, CompStart, i, 0, 0), one())], Ge, tau);
    }
    if let Some(release) = loads.release() {
        for (n, r) in release.iter().enumerate() {
            for i in 0..m {
                let name = format!("r10_{}_{}", i + 1, n + 1);
                lp.add_constraint(10, name, vec![(v(&lp, CompStart, i, n, 0), one())], Ge, r.clone());
            }
        }
    }
    // (11)
    each(&mut |n, j| {
        for i in 0..m {
            lp.add_constraint(11, row_name(11, &[i, n, j]), vec![(v(&lp, Gamma, i, n, j), one())], Ge, zero());
        }
    });
    // (12)
    for n in 0..n_loads {
        let mut terms = Vec::new();
        for j in 0..inst.q(n) {
            for i in 0..m {
                terms.push((v(&lp, Gamma, i, n, j), one()));
            }
        }
        lp.add_constraint(12, row_name(12, &[n]), terms, Eq, one());
    }
    // (13)
    let final_load = n_loads - 1;
    for i in 0..m {
        let terms = vec![(makespan, one()), (v(&lp, CompEnd, i, final_load, last(final_load)), -one())];
        lp.add_constraint(13, row_name(13, &[i]), terms, Ge, zero());
    }

    match obj {
        ObjectiveSpec::Makespan => lp.objective = vec![(makespan, one())],
        ObjectiveSpec::Affine { weights, constant } => {
            for (n, &c) in completions.iter().enumerate() {
                for i in 0..m {
                    let terms = vec![(c, one()), (v(&lp, CompEnd, i, n, last(n)), -one())];
                    lp.add_constraint(13, row_name(13, &[i, n]), terms, Ge, zero());
                }
            }
            lp.objective = completions
                .iter()
                .zip(weights.iter().chain(std::iter::repeat(&Rational::zero())))
                .filter(|(_, w)| !w.is_zero())
                .map(|(&c, w)| (c, w.clone()))
                .collect();
            lp.objective_constant = constant.clone();
        }
    }
    lp
}

pub fn solve_lp(model: &LpModel) -> Result<LpSolution, LpError> {
    solve_lp_with(model, &SolverOptions::default())
}

pub fn solve_lp_with(model: &LpModel, options: &SolverOptions) -> Result<LpSolution, LpError> {
    simplex::solve(model, options)
}

/// Optimal schedule for `inst` under `obj` with exact arithmetic.
pub fn optimal_schedule(inst: &Instance, obj: &ObjectiveSpec) -> Result<Schedule, LpError> {
    optimal_schedule_with(inst, obj, &SolverOptions::default())
}

pub fn optimal_schedule_with(inst: &Instance, obj: &ObjectiveSpec, options: &SolverOptions) -> Result<Schedule, LpError> {
    if let ObjectiveSpec::Affine { weights, .. } = obj {
        if weights.len() != inst.loads() {
            return Err(ModelError::Dimension(format!(
                "{} objective weights for {} loads",
                weights.len(),
                inst.loads()
            ))
            .into());
        }
    }
    let model = build_lp(inst, obj);
    let solution = solve_lp_with(&model, options)?;
    if solution.status != LpStatus::Optimal {
        return Err(LpError::NotOptimal(solution.status));
    }
    Ok(schedule_from_solution(inst, &model, &solution.values))
}

/// Reads the schedule variables of a solved model. Negative zero-ish values
/// from float solves are clamped so fractions stay non-negative.
pub fn schedule_from_solution(inst: &Instance, model: &LpModel, values: &[Rational]) -> Schedule {
    let m = inst.m();
    let pick = |kind: VarKind, width: usize| -> PerInstallment<Rational> {
        (0..inst.loads())
            .map(|n| {
                (0..inst.q(n))
                    .map(|j| {
                        (0..width)
                            .map(|i| {
                                let x = &values[model.var(kind, i, n, j).expect("schedule variable")];
                                if x.is_negative() {
                                    Rational::zero()
                                } else {
                                    x.clone()
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    };
    let mut s = Schedule {
        gamma: pick(VarKind::Gamma, m),
        comm_start: pick(VarKind::CommStart, m - 1),
        comm_end: pick(VarKind::CommEnd, m - 1),
        comp_start: pick(VarKind::CompStart, m),
        comp_end: pick(VarKind::CompEnd, m),
        makespan: Rational::zero(),
    };
    s.makespan = s.final_completion();
    s
}
