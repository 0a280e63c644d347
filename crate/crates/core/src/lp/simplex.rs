//! Dense two-phase primal simplex in floating point, and the exact solve
//! built around it.
//!
//! Every variable is bounded below by zero. Phase one minimizes the sum of
//! artificial variables; rows whose right-hand side is zero skip the
//! artificial and are pivoted onto a structural column up front, which is a
//! degenerate pivot and leaves the basis feasible.
//!
//! Exact solves run this tableau in `f64` to find a candidate optimal
//! basis, then certify it exactly by factoring that basis alone: primal
//! feasibility of the basic solution and non-negativity of every reduced
//! cost. When the certificate fails, the exact revised simplex starts from
//! the candidate and pivots to a certified optimum.

use std::fmt::Debug;

use num_traits::{One, Signed, Zero};

use super::certify::certify;
use super::revised::{self, Verdict};
use super::{LpError, LpModel, LpSolution, LpStatus};
use crate::model::Relation;
use crate::rational::{from_f64, to_f64, Rational};

pub const DEFAULT_ITERATION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Arithmetic {
    #[default]
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Lowest-index entering column and lowest-index leaving variable on
    /// ratio ties. Never cycles.
    #[default]
    Bland,
    /// Most negative reduced cost; falls back to Bland's rule while a run
    /// of degenerate pivots lasts.
    Dantzig,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverOptions {
    pub arithmetic: Arithmetic,
    pub pivot_rule: PivotRule,
    pub iteration_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { arithmetic: Arithmetic::Exact, pivot_rule: PivotRule::Bland, iteration_cap: DEFAULT_ITERATION_CAP }
    }
}

impl SolverOptions {
    /// Defaults, with the iteration cap taken from `CHAINSCHED_ITER_CAP`
    /// when that variable holds a positive integer.
    pub fn from_env() -> Self {
        let mut options = Self::default();
        if let Some(cap) = std::env::var("CHAINSCHED_ITER_CAP").ok().and_then(|v| v.trim().parse().ok()) {
            if cap > 0 {
                options.iteration_cap = cap;
            }
        }
        options
    }
}

pub(crate) trait Scalar: Clone + PartialOrd + Debug {
    fn zero_val() -> Self;
    fn one_val() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_rational(&self) -> Rational;
    fn near_zero(&self) -> bool;
    fn above_zero(&self) -> bool;
    fn below_zero(&self) -> bool;
    /// Large enough to divide by in a ratio test.
    fn usable_pivot(&self) -> bool;
    /// Positive but below the zero tolerance.
    fn positive_noise(&self) -> bool;
    fn magnitude(&self) -> f64;
    fn div(&self, other: &Self) -> Self;
    /// `self -= a * b`
    fn sub_mul(&mut self, a: &Self, b: &Self);
}

const FLOAT_EPS: f64 = 1e-11;

impl Scalar for f64 {
    fn zero_val() -> Self {
        0.0
    }
    fn one_val() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        to_f64(r)
    }
    fn to_rational(&self) -> Rational {
        from_f64(*self).unwrap_or_else(Zero::zero)
    }
    fn near_zero(&self) -> bool {
        self.abs() <= FLOAT_EPS
    }
    fn above_zero(&self) -> bool {
        *self > FLOAT_EPS
    }
    fn below_zero(&self) -> bool {
        *self < -FLOAT_EPS
    }
    fn usable_pivot(&self) -> bool {
        *self > 1e-9
    }
    fn positive_noise(&self) -> bool {
        *self > 0.0 && *self <= FLOAT_EPS
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
        if self.abs() <= FLOAT_EPS * 1e-3 {
            *self = 0.0;
        }
    }
}

pub(super) fn solve(model: &LpModel, options: &SolverOptions) -> Result<LpSolution, LpError> {
    let outcome = match options.arithmetic {
        Arithmetic::Float => solve_float(model, options)?,
        Arithmetic::Exact => solve_exact(model, options)?,
    };
    Ok(match outcome {
        Outcome::Optimal(values) => {
            let objective_value = model.objective.iter().map(|(v, c)| c * &values[*v]).sum::<Rational>()
                + &model.objective_constant;
            LpSolution { status: LpStatus::Optimal, values, objective_value }
        }
        Outcome::Infeasible => LpSolution { status: LpStatus::Infeasible, values: Vec::new(), objective_value: Zero::zero() },
        Outcome::Unbounded => LpSolution { status: LpStatus::Unbounded, values: Vec::new(), objective_value: Zero::zero() },
    })
}

enum Outcome {
    Optimal(Vec<Rational>),
    Infeasible,
    Unbounded,
}

fn solve_float(model: &LpModel, options: &SolverOptions) -> Result<Outcome, LpError> {
    let Some(mut t) = Tableau::<f64>::setup(model, options) else {
        return Ok(Outcome::Infeasible);
    };
    // Only an optimum is trusted from f64; the other verdicts can be
    // round-off and are confirmed exactly.
    Ok(match t.two_phase(model)? {
        Phase::Optimal => Outcome::Optimal(t.values()),
        Phase::Infeasible | Phase::Unbounded | Phase::Breakdown => return solve_exact(model, options),
    })
}

/// Final basis of the `f64` tableau, the pivots it took, and whether it
/// reached an optimum.
fn float_basis(model: &LpModel, options: &SolverOptions) -> Result<Option<(Vec<usize>, usize, bool)>, LpError> {
    let options = SolverOptions { pivot_rule: PivotRule::Dantzig, ..options.clone() };
    let Some(mut t) = Tableau::<f64>::setup(model, &options) else {
        return Ok(None);
    };
    let optimal = matches!(t.two_phase(model)?, Phase::Optimal);
    Ok(Some((t.basis, t.iterations, optimal)))
}

fn solve_exact(model: &LpModel, options: &SolverOptions) -> Result<Outcome, LpError> {
    let Some(form) = StandardForm::new(model) else {
        return Ok(Outcome::Infeasible);
    };
    // A float basis that is not optimal, or fails the certificate, is still
    // a better start than the slack basis.
    let (start, spent) = match float_basis(model, options)? {
        Some((basis, spent, optimal)) => {
            if optimal {
                if let Some(values) = certify(&form, &model.objective, &basis) {
                    return Ok(Outcome::Optimal(values));
                }
            }
            (basis, spent)
        }
        None => (form.basis.clone(), 0),
    };
    Ok(match revised::solve(&form, &model.objective, &start, spent, options)? {
        Verdict::Optimal(values) => Outcome::Optimal(values),
        Verdict::Infeasible => Outcome::Infeasible,
        Verdict::Unbounded => Outcome::Unbounded,
    })
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

enum Phase {
    Optimal,
    Infeasible,
    Unbounded,
    Breakdown,
}

/// The model as equality rows over non-negative columns: structural
/// variables, then one slack per inequality, then the artificials.
pub(super) struct StandardForm {
    /// Sparse rows, slack and artificial entries included.
    pub rows: Vec<Vec<(usize, Rational)>>,
    pub rhs: Vec<Rational>,
    /// Starting basic column of each row; `usize::MAX` for zero-rhs
    /// equalities, which start without one.
    pub basis: Vec<usize>,
    pub structural: usize,
    pub slacks: usize,
    pub width: usize,
}

impl StandardForm {
    /// `None` when some row is violated by every point.
    pub fn new(model: &LpModel) -> Option<Self> {
        let n = model.variables.len();

        // Drop rows that non-negativity already implies, detect trivially
        // violated ones, and orient every row so its right-hand side is >= 0.
        let mut oriented: Vec<(Vec<(usize, Rational)>, Relation, Rational)> = Vec::new();
        for c in &model.constraints {
            let all_nonneg = c.terms.iter().all(|(_, a)| !a.is_negative());
            let all_nonpos = c.terms.iter().all(|(_, a)| !a.is_positive());
            let implied = match c.relation {
                Relation::Ge => all_nonneg && !c.rhs.is_positive(),
                Relation::Le => all_nonpos && !c.rhs.is_negative(),
                Relation::Eq => c.terms.is_empty() && c.rhs.is_zero(),
            };
            if implied {
                continue;
            }
            if c.terms.is_empty() {
                return None;
            }
            let (terms, relation, rhs) = if c.rhs.is_negative() {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.terms.iter().map(|(v, a)| (*v, -a)).collect(), flipped, -&c.rhs)
            } else {
                (c.terms.clone(), c.relation, c.rhs.clone())
            };
            // `a x >= 0` becomes `-a x <= 0`, which a slack can cover.
            if relation == Relation::Ge && rhs.is_zero() {
                oriented.push((terms.into_iter().map(|(v, a)| (v, -a)).collect(), Relation::Le, rhs));
            } else {
                oriented.push((terms, relation, rhs));
            }
        }

        let slacks = oriented.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let artificials = oriented.iter().filter(|(_, r, b)| *r == Relation::Ge || *r == Relation::Eq && !b.is_zero()).count();
        let mut form = StandardForm {
            rows: Vec::with_capacity(oriented.len()),
            rhs: Vec::with_capacity(oriented.len()),
            basis: Vec::with_capacity(oriented.len()),
            structural: n,
            slacks,
            width: n + slacks + artificials,
        };
        let mut next_slack = n;
        let mut next_artificial = n + slacks;
        for (mut terms, relation, rhs) in oriented {
            match relation {
                Relation::Le => {
                    terms.push((next_slack, Rational::one()));
                    form.basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    terms.push((next_slack, -Rational::one()));
                    next_slack += 1;
                    terms.push((next_artificial, Rational::one()));
                    form.basis.push(next_artificial);
                    next_artificial += 1;
                }
                Relation::Eq if rhs.is_zero() => form.basis.push(usize::MAX),
                Relation::Eq => {
                    terms.push((next_artificial, Rational::one()));
                    form.basis.push(next_artificial);
                    next_artificial += 1;
                }
            }
            form.rows.push(terms);
            form.rhs.push(rhs);
        }
        Some(form)
    }

    pub fn banned(&self) -> Vec<bool> {
        (0..self.width).map(|c| c >= self.structural + self.slacks).collect()
    }
}

struct Tableau<T> {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<T>>,
    /// Reduced costs; the last entry is minus the objective value.
    cost: Vec<T>,
    basis: Vec<usize>,
    /// Artificial columns. They never re-enter the basis.
    banned: Vec<bool>,
    structural: usize,
    iterations: usize,
    cap: usize,
    rule: PivotRule,
    degenerate_run: usize,
    /// Rows as set up, for rebuilding the tableau from scratch.
    origin: Vec<Vec<T>>,
    /// Cost coefficients of the current phase.
    objective: Vec<T>,
    since_reinvert: usize,
}

/// Pivots between rebuilds of the tableau from the original rows, which
/// clears accumulated round-off.
const REINVERT_EVERY: usize = 100;

/// Optimize-and-refactor rounds before a phase-two optimum is given up on.
const POLISH_ROUNDS: usize = 4;

/// Degenerate pivots tolerated under Dantzig's rule before switching to
/// Bland's.
pub(super) const DEGENERATE_RUN_LIMIT: usize = 50;

impl<T: Scalar> Tableau<T> {
    /// Builds the initial tableau with slack and artificial columns and the
    /// up-front pivots for zero right-hand-side equalities. `None` when some
    /// row reads `0 = b` or `0 >= b` with no way to hold.
    fn setup(model: &LpModel, options: &SolverOptions) -> Option<Self> {
        let form = StandardForm::new(model)?;
        let n = form.structural;
        let slacks = form.slacks;
        let width = form.width;
        let mut zero_rhs_equalities = Vec::new();
        let mut rows = Vec::with_capacity(form.rows.len());
        for (r, (terms, rhs)) in form.rows.iter().zip(&form.rhs).enumerate() {
            let mut row = vec![T::zero_val(); width + 1];
            for (v, a) in terms {
                row[*v] = T::from_rational(a);
            }
            row[width] = T::from_rational(rhs);
            if form.basis[r] == usize::MAX {
                zero_rhs_equalities.push(r);
            }
            rows.push(row);
        }
        let basis = form.basis.clone();
        let banned = form.banned();

        let mut t = Tableau {
            rows,
            cost: vec![T::zero_val(); width + 1],
            basis,
            banned,
            structural: n,
            iterations: 0,
            cap: options.iteration_cap,
            rule: options.pivot_rule,
            degenerate_run: 0,
            origin: Vec::new(),
            objective: Vec::new(),
            since_reinvert: 0,
        };

        let mut redundant = Vec::new();
        for r in zero_rhs_equalities {
            match (0..n + slacks).find(|&c| !t.rows[r][c].near_zero()) {
                Some(col) => t.pivot(r, col),
                None => redundant.push(r),
            }
        }
        for r in redundant.into_iter().rev() {
            t.rows.remove(r);
            t.basis.remove(r);
        }
        t.origin = t.rows.clone();
        Some(t)
    }

    fn two_phase(&mut self, model: &LpModel) -> Result<Phase, LpError> {
        let width = self.width();
        let artificial_rows: Vec<usize> = (0..self.rows.len()).filter(|&r| self.banned[self.basis[r]]).collect();
        if !artificial_rows.is_empty() {
            self.objective = self.banned.iter().map(|&b| if b { T::one_val() } else { T::zero_val() }).collect();
            self.cost = vec![T::zero_val(); width + 1];
            for &r in &artificial_rows {
                for c in 0..=width {
                    if c < width && self.banned[c] {
                        continue;
                    }
                    let a = self.rows[r][c].clone();
                    self.cost[c].sub_mul(&T::one_val(), &a);
                }
            }
            match self.optimize()? {
                Step::Optimal => {}
                // Phase one is bounded below by zero, so this is round-off.
                _ => return Ok(Phase::Breakdown),
            }
            if self.cost[width].below_zero() {
                return Ok(Phase::Infeasible);
            }
            self.drive_out_artificials();
        }
        self.set_objective(model);
        // Drift can make a basis look optimal that is not; confirm against a
        // fresh factorization and keep pivoting if it disagrees.
        for _ in 0..POLISH_ROUNDS {
            if !matches!(self.optimize()?, Step::Optimal) {
                return Ok(Phase::Unbounded);
            }
            if !self.reinvert() {
                return Ok(Phase::Breakdown);
            }
            if (0..width).all(|c| self.banned[c] || !self.cost[c].below_zero()) {
                return Ok(Phase::Optimal);
            }
        }
        Ok(Phase::Breakdown)
    }

    fn width(&self) -> usize {
        self.cost.len() - 1
    }

    /// Loads the model objective as reduced costs against the current basis.
    fn set_objective(&mut self, model: &LpModel) {
        let width = self.width();
        let mut objective = vec![T::zero_val(); width];
        for (v, c) in &model.objective {
            objective[*v] = T::from_rational(c);
        }
        self.objective = objective;
        self.price();
        self.degenerate_run = 0;
    }

    /// Reduced costs of the stored objective against the current basis.
    fn price(&mut self) {
        let width = self.width();
        self.cost = vec![T::zero_val(); width + 1];
        self.cost[..width].clone_from_slice(&self.objective);
        for r in 0..self.rows.len() {
            let cb = self.objective[self.basis[r]].clone();
            if cb.near_zero() {
                continue;
            }
            for c in 0..=width {
                let a = self.rows[r][c].clone();
                self.cost[c].sub_mul(&cb, &a);
            }
        }
    }

    /// Rebuilds the tableau for the current basis from the original rows,
    /// with partial pivoting. Keeps the current tableau, and returns false,
    /// when the rebuilt one would be singular or infeasible.
    fn reinvert(&mut self) -> bool {
        let width = self.width();
        let target = self.basis.clone();
        let saved = (std::mem::replace(&mut self.rows, self.origin.clone()), std::mem::take(&mut self.basis));
        self.basis = vec![usize::MAX; self.rows.len()];
        let ok = target.iter().all(|&col| {
            let best = (0..self.rows.len())
                .filter(|&r| self.basis[r] == usize::MAX)
                .max_by(|&a, &b| self.rows[a][col].magnitude().total_cmp(&self.rows[b][col].magnitude()));
            match best {
                Some(r) if self.rows[r][col].magnitude() > 1e-9 => {
                    self.pivot(r, col);
                    self.basis[r] = col;
                    true
                }
                _ => false,
            }
        });
        let ok = ok
            && (0..self.rows.len()).all(|r| {
                let rhs = self.rows[r][width].magnitude();
                if self.basis[r] == usize::MAX { rhs <= 1e-9 } else { !self.rows[r][width].below_zero() }
            });
        if !ok {
            (self.rows, self.basis) = saved;
            self.price();
            return false;
        }
        let keep: Vec<bool> = self.basis.iter().map(|&b| b != usize::MAX).collect();
        let mut k = 0;
        self.rows.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        self.basis.retain(|&b| b != usize::MAX);
        self.price();
        true
    }

    fn optimize(&mut self) -> Result<Step, LpError> {
        loop {
            match self.step()? {
                Step::Pivoted => {}
                done => return Ok(done),
            }
        }
    }

    fn step(&mut self) -> Result<Step, LpError> {
        let width = self.width();
        let bland = self.rule == PivotRule::Bland || self.degenerate_run >= DEGENERATE_RUN_LIMIT;
        // Columns whose only positive entries are too small to pivot on.
        let mut blocked = vec![false; width];
        let (row, col, ratio) = loop {
            let candidates = (0..width).filter(|&c| !self.banned[c] && !blocked[c] && self.cost[c].below_zero());
            let entering = if bland {
                candidates.min()
            } else {
                candidates.min_by(|&a, &b| self.cost[a].partial_cmp(&self.cost[b]).expect("finite").then(a.cmp(&b)))
            };
            let Some(col) = entering else {
                return Ok(Step::Optimal);
            };

            let mut leaving: Option<(usize, T)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.usable_pivot() {
                    continue;
                }
                let ratio = self.rows[r][width].div(a);
                let better = match &leaving {
                    None => true,
                    Some((best, best_ratio)) => {
                        ratio < *best_ratio || (!(ratio > *best_ratio) && self.basis[r] < self.basis[*best])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            match leaving {
                Some((row, ratio)) => break (row, col, ratio),
                None if self.rows.iter().any(|r| r[col].above_zero() || r[col].positive_noise()) => blocked[col] = true,
                None => return Ok(Step::Unbounded),
            }
        };

        if self.iterations >= self.cap {
            return Err(LpError::IterationLimit(self.cap));
        }
        self.iterations += 1;
        if ratio.near_zero() {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
        self.pivot(row, col);
        self.since_reinvert += 1;
        if self.since_reinvert >= REINVERT_EVERY {
            self.since_reinvert = 0;
            let _ = self.reinvert();
        }
        Ok(Step::Pivoted)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.width();
        let mut pivot_row = std::mem::take(&mut self.rows[row]);
        let p = pivot_row[col].clone();
        let nonzero: Vec<usize> = (0..=width).filter(|&c| !pivot_row[c].near_zero()).collect();
        for &c in &nonzero {
            pivot_row[c] = pivot_row[c].div(&p);
        }
        let eliminate = |target: &mut Vec<T>| {
            let factor = target[col].clone();
            if factor.near_zero() {
                return;
            }
            for &c in &nonzero {
                target[c].sub_mul(&factor, &pivot_row[c]);
            }
            target[col] = T::zero_val();
        };
        for (r, target) in self.rows.iter_mut().enumerate() {
            if r != row {
                eliminate(target);
            }
        }
        eliminate(&mut self.cost);
        self.rows[row] = pivot_row;
        self.basis[row] = col;
    }

    /// After phase one, replaces artificial variables still basic at zero
    /// with real columns, dropping rows that turned out redundant.
    fn drive_out_artificials(&mut self) {
        let width = self.width();
        let mut r = 0;
        while r < self.rows.len() {
            if !self.banned[self.basis[r]] {
                r += 1;
                continue;
            }
            if !self.rows[r][width].near_zero() {
                // Still carrying weight; leave it for the feasibility check.
                r += 1;
                continue;
            }
            match (0..width).find(|&c| !self.banned[c] && !self.rows[r][c].near_zero()) {
                Some(col) => {
                    self.pivot(r, col);
                    r += 1;
                }
                None => {
                    self.rows.remove(r);
                    self.basis.remove(r);
                }
            }
        }
    }

    fn values(&self) -> Vec<Rational> {
        let width = self.width();
        let mut values = vec![<Rational as Zero>::zero(); self.structural];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.structural {
                values[b] = self.rows[r][width].to_rational();
            }
        }
        values
    }
}
