//! Exact revised simplex over the standard form.
//!
//! The basis matrix is refactored by sparse elimination at every pivot and
//! basic values are updated exactly, so there is no drift to control. It
//! starts from any set of columns: dependent ones are dropped, uncovered
//! rows get unit artificials, and a single auxiliary column absorbs every
//! negative basic value before phase one.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::certify::eliminate;
use super::simplex::{PivotRule, SolverOptions, StandardForm, DEGENERATE_RUN_LIMIT};
use super::LpError;
use crate::rational::Rational;

type SparseCol = Vec<(usize, Rational)>;

pub(super) enum Verdict {
    Optimal(Vec<Rational>),
    Infeasible,
    Unbounded,
}

enum Run {
    Optimal,
    Unbounded,
}

struct Revised<'a> {
    form: &'a StandardForm,
    cols: Vec<SparseCol>,
    artificial: Vec<bool>,
    /// Column held by each basis slot, and its value.
    basis: Vec<usize>,
    x: Vec<Rational>,
    iterations: usize,
    cap: usize,
    rule: PivotRule,
}

/// Solves the standard form starting from the columns in `start`.
/// `iterations` already spent count against the cap.
pub(super) fn solve(
    form: &StandardForm,
    objective: &[(usize, Rational)],
    start: &[usize],
    iterations: usize,
    options: &SolverOptions,
) -> Result<Verdict, LpError> {
    let rows = form.rows.len();
    let mut cols = vec![SparseCol::new(); form.width];
    for (r, row) in form.rows.iter().enumerate() {
        for (c, a) in row {
            cols[*c].push((r, a.clone()));
        }
    }
    let real = form.structural + form.slacks;
    let artificial = (0..form.width).map(|c| c >= real).collect();
    let mut lp = Revised { form, cols, artificial, basis: Vec::new(), x: Vec::new(), iterations, cap: options.iteration_cap, rule: options.pivot_rule };

    // Independent real columns of the start, then unit artificials on the
    // rows they leave uncovered.
    let mut chosen: Vec<usize> = start.iter().copied().filter(|&c| c < real).collect();
    chosen.sort_unstable();
    chosen.dedup();
    let probe = lp.factor_solve(&chosen, form.rhs.clone());
    let dependent: Vec<usize> = probe.dependent.iter().map(|&k| chosen[k]).collect();
    chosen.retain(|c| !dependent.contains(c));
    let covered: Vec<bool> = {
        let mut covered = vec![false; rows];
        for (k, &r) in probe.pivot_row.iter().enumerate() {
            if !probe.dependent.contains(&k) {
                covered[r] = true;
            }
        }
        covered
    };
    for (r, done) in covered.iter().enumerate() {
        if !done {
            chosen.push(lp.add_column(vec![(r, Rational::one())], true));
        }
    }
    lp.basis = chosen;
    lp.x = lp.factor_solve(&lp.basis, form.rhs.clone()).x;

    // One auxiliary column brings every negative basic value up to zero.
    let negative: Vec<usize> = (0..rows).filter(|&k| lp.x[k].is_negative()).collect();
    if let Some(&worst) = negative.iter().min_by(|&&a, &&b| lp.x[a].cmp(&lp.x[b]).then(a.cmp(&b))) {
        let mut column: BTreeMap<usize, Rational> = BTreeMap::new();
        for &k in &negative {
            for (r, a) in &lp.cols[lp.basis[k]] {
                *column.entry(*r).or_insert_with(Rational::zero) -= a;
            }
        }
        let column: SparseCol = column.into_iter().filter(|(_, a)| !a.is_zero()).collect();
        let aux = lp.add_column(column, true);
        let theta = -lp.x[worst].clone();
        for &k in &negative {
            lp.x[k] += &theta;
        }
        lp.x[worst] = theta;
        lp.basis[worst] = aux;
    }

    if lp.basis.iter().any(|&c| lp.artificial[c]) {
        let cost: Vec<Rational> = lp.artificial.iter().map(|&a| if a { Rational::one() } else { Rational::zero() }).collect();
        match lp.run(&cost)? {
            Run::Optimal => {}
            Run::Unbounded => unreachable!("phase one is bounded below by zero"),
        }
        if lp.basis.iter().zip(&lp.x).any(|(&c, v)| lp.artificial[c] && !v.is_zero()) {
            return Ok(Verdict::Infeasible);
        }
    }

    let mut cost = vec![Rational::zero(); lp.cols.len()];
    for (v, c) in objective {
        cost[*v] = c.clone();
    }
    Ok(match lp.run(&cost)? {
        Run::Optimal => {
            let mut values = vec![Rational::zero(); form.structural];
            for (k, &c) in lp.basis.iter().enumerate() {
                if c < form.structural {
                    values[c] = lp.x[k].clone();
                }
            }
            Verdict::Optimal(values)
        }
        Run::Unbounded => Verdict::Unbounded,
    })
}

impl Revised<'_> {
    fn add_column(&mut self, col: SparseCol, artificial: bool) -> usize {
        self.cols.push(col);
        self.artificial.push(artificial);
        self.cols.len() - 1
    }

    /// Solves `B w = rhs` for the columns `basis`.
    fn factor_solve(&self, basis: &[usize], rhs: Vec<Rational>) -> super::certify::Solved {
        let mut rows = vec![BTreeMap::new(); self.form.rows.len()];
        for (k, &c) in basis.iter().enumerate() {
            for (r, a) in &self.cols[c] {
                rows[*r].insert(k, a.clone());
            }
        }
        eliminate(rows, rhs, basis.len())
    }

    /// Solves `B^T y = c_B`.
    fn duals(&self, cost: &[Rational]) -> Vec<Rational> {
        let rows = self.basis.iter().map(|&c| self.cols[c].iter().cloned().collect()).collect();
        let rhs = self.basis.iter().map(|&c| cost[c].clone()).collect();
        eliminate(rows, rhs, self.form.rows.len()).x
    }

    fn run(&mut self, cost: &[Rational]) -> Result<Run, LpError> {
        let mut degenerate_run = 0;
        loop {
            let y = self.duals(cost);
            let mut in_basis = vec![false; self.cols.len()];
            for &c in &self.basis {
                in_basis[c] = true;
            }
            let bland = self.rule == PivotRule::Bland || degenerate_run >= DEGENERATE_RUN_LIMIT;
            let mut entering: Option<(usize, Rational)> = None;
            for j in 0..self.cols.len() {
                if self.artificial[j] || in_basis[j] {
                    continue;
                }
                let mut d = cost[j].clone();
                for (r, a) in &self.cols[j] {
                    d -= a * &y[*r];
                }
                if !d.is_negative() {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.as_ref().is_none_or(|(_, best)| d < *best) {
                    entering = Some((j, d));
                }
            }
            let Some((q, _)) = entering else {
                return Ok(Run::Optimal);
            };

            let mut a_q = vec![Rational::zero(); self.form.rows.len()];
            for (r, a) in &self.cols[q] {
                a_q[*r] = a.clone();
            }
            let u = self.factor_solve(&self.basis, a_q).x;

            // Artificials sitting at zero leave as soon as the direction
            // touches them, so they never turn non-zero.
            let mut leaving: Option<(usize, Rational)> = None;
            for (k, uk) in u.iter().enumerate() {
                let ratio = if self.artificial[self.basis[k]] && self.x[k].is_zero() && !uk.is_zero() {
                    Rational::zero()
                } else if uk.is_positive() {
                    &self.x[k] / uk
                } else {
                    continue;
                };
                let better = match &leaving {
                    None => true,
                    Some((best, r)) => ratio < *r || (ratio == *r && self.basis[k] < self.basis[*best]),
                };
                if better {
                    leaving = Some((k, ratio));
                }
            }
            let Some((out, theta)) = leaving else {
                return Ok(Run::Unbounded);
            };

            if self.iterations >= self.cap {
                return Err(LpError::IterationLimit(self.cap));
            }
            self.iterations += 1;
            degenerate_run = if theta.is_zero() { degenerate_run + 1 } else { 0 };
            for (k, uk) in u.iter().enumerate() {
                if !uk.is_zero() {
                    self.x[k] -= &theta * uk;
                }
            }
            self.x[out] = theta;
            self.basis[out] = q;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{build_lp, solve_lp, LpModel, ObjectiveSpec, VarKind, Variable};
    use crate::model::{Instance, InstallmentPlan, LoadSet, Platform, Relation};
    use crate::rational::{int, ratio};

    fn cold(model: &LpModel, rule: PivotRule) -> Verdict {
        let form = StandardForm::new(model).unwrap();
        let options = SolverOptions { pivot_rule: rule, ..SolverOptions::default() };
        solve(&form, &model.objective, &form.basis, 0, &options).unwrap()
    }

    fn objective(model: &LpModel, values: &[Rational]) -> Rational {
        model.objective.iter().map(|(v, c)| c * &values[*v]).sum()
    }

    #[test]
    fn cold_start_matches_the_certified_optimum() {
        let platform = Platform::new(vec![int(2), ratio(1, 2), int(3)], vec![int(1), ratio(3, 4)], vec![int(0), ratio(1, 2), int(0)]).unwrap();
        let loads = LoadSet::new(vec![int(1), ratio(5, 2)], vec![int(2), int(1)]).unwrap();
        for q in [vec![1, 1], vec![2, 1], vec![2, 3]] {
            let inst = Instance::new(platform.clone(), loads.clone(), InstallmentPlan::new(q).unwrap()).unwrap();
            let model = build_lp(&inst, &ObjectiveSpec::Makespan);
            let expected = solve_lp(&model).unwrap().objective_value;
            for rule in [PivotRule::Bland, PivotRule::Dantzig] {
                let Verdict::Optimal(values) = cold(&model, rule) else { panic!("not optimal") };
                assert_eq!(objective(&model, &values), expected);
            }
        }
    }

    #[test]
    fn bad_start_columns_are_repaired() {
        let inst = Instance::new(
            Platform::homogeneous(3, int(1), ratio(1, 2)).unwrap(),
            LoadSet::unit(2).unwrap(),
            InstallmentPlan::uniform(2, 2).unwrap(),
        )
        .unwrap();
        let model = build_lp(&inst, &ObjectiveSpec::Makespan);
        let form = StandardForm::new(&model).unwrap();
        // Every structural column: far more than a basis, most dependent.
        let start: Vec<usize> = (0..form.structural).collect();
        let Verdict::Optimal(values) = solve(&form, &model.objective, &start, 0, &SolverOptions::default()).unwrap() else {
            panic!("not optimal")
        };
        assert_eq!(objective(&model, &values), solve_lp(&model).unwrap().objective_value);
    }

    #[test]
    fn infeasible_and_unbounded_models() {
        let mut model = LpModel::new();
        let x = model.add_variable(Variable::new(VarKind::Gamma, 0, 0, 0));
        model.add_constraint(4, "lo", vec![(x, int(1))], Relation::Ge, int(2));
        model.add_constraint(4, "hi", vec![(x, int(1))], Relation::Le, int(1));
        assert!(matches!(cold(&model, PivotRule::Bland), Verdict::Infeasible));

        let mut model = LpModel::new();
        let x = model.add_variable(Variable::new(VarKind::Gamma, 0, 0, 0));
        let y = model.add_variable(Variable::new(VarKind::Gamma, 1, 0, 0));
        model.add_constraint(1, "r", vec![(x, int(1)), (y, int(-1))], Relation::Le, int(1));
        model.objective = vec![(x, int(-1))];
        assert!(matches!(cold(&model, PivotRule::Bland), Verdict::Unbounded));
    }
}
