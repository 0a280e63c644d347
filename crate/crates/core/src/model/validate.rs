use std::fmt;

use num_traits::{Signed, Zero};

use super::simulate::check_table;
use super::{Instance, Schedule};
use crate::error::ModelError;
use crate::rational::{from_f64, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// How strictly constraints are checked.
#[derive(Debug, Clone, PartialEq)]
pub enum Tolerance {
    Exact,
    /// Absolute slack allowed on every comparison.
    Absolute(Rational),
}

impl Tolerance {
    /// `10^-9`, used for schedules computed in floating point.
    pub fn float_default() -> Self {
        Tolerance::Absolute(Rational::new(1.into(), 1_000_000_000.into()))
    }

    pub fn absolute(eps: f64) -> Self {
        Tolerance::Absolute(from_f64(eps.abs()).unwrap_or_else(Rational::zero))
    }

    fn slack(&self) -> Rational {
        match self {
            Tolerance::Exact => Rational::zero(),
            Tolerance::Absolute(eps) => eps.clone(),
        }
    }
}

/// One failed constraint. `index` holds the 1-based `(i, n, j)` subscripts
/// the constraint family is quantified over (fewer for families 10, 12, 13).
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub family: u8,
    pub index: Vec<usize>,
    pub relation: Relation,
    pub lhs: Rational,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
    pub recomputed_makespan: Rational,
}

impl ValidationReport {
    /// Distinct families with at least one violation, ascending.
    pub fn families(&self) -> Vec<u8> {
        let mut f: Vec<u8> = self.violations.iter().map(|v| v.family).collect();
        f.sort_unstable();
        f.dedup();
        f
    }
}

pub fn validate_schedule(inst: &Instance, s: &Schedule) -> Result<ValidationReport, ModelError> {
    validate_schedule_with(inst, s, &Tolerance::Exact)
}

/// Checks all thirteen constraint families of the scheduling program.
///
/// Families 2 and 3 also serialize consecutive transfers on the last link,
/// which the one-port rule requires of `P_{m-1}` and `P_m`.
pub fn validate_schedule_with(inst: &Instance, s: &Schedule, tol: &Tolerance) -> Result<ValidationReport, ModelError> {
    let m = inst.m();
    let links = m - 1;
    check_table("gamma", inst, &s.gamma, m)?;
    check_table("comm_start", inst, &s.comm_start, links)?;
    check_table("comm_end", inst, &s.comm_end, links)?;
    check_table("comp_start", inst, &s.comp_start, m)?;
    check_table("comp_end", inst, &s.comp_end, m)?;

    let mut c = Checker { slack: tol.slack(), violations: Vec::new() };
    let (ss, se, cs, ce, gamma) = (&s.comm_start, &s.comm_end, &s.comp_start, &s.comp_end, &s.gamma);
    let platform = &inst.platform;
    let loads = &inst.loads;
    let n_loads = inst.loads();

    for n in 0..n_loads {
        let q = inst.q(n);
        for j in 0..q {
            for l in 0..links {
                let at = vec![l + 1, n + 1, j + 1];
                // (1) store and forward
                if l + 1 < links {
                    c.ge(1, at.clone(), &ss[n][j][l + 1], &se[n][j][l]);
                }
                // (2) next installment waits for the forward of this one
                if j + 1 < q {
                    let blocker = if l + 1 < links { &se[n][j][l + 1] } else { &se[n][j][l] };
                    c.ge(2, at.clone(), &ss[n][j + 1][l], blocker);
                }
                // (4)
                c.ge(4, at.clone(), &ss[n][j][l], &Rational::zero());
                // (5)
                let downstream: Rational = gamma[n][j][l + 1..].iter().sum();
                let duration = &platform.z()[l] * &loads.v_comm()[n] * downstream;
                c.eq(5, at, &se[n][j][l], &(&ss[n][j][l] + duration));
            }
            for i in 0..m {
                let at = vec![i + 1, n + 1, j + 1];
                // (6)
                if i > 0 {
                    c.ge(6, at.clone(), &cs[n][j][i], &se[n][j][i - 1]);
                }
                // (7)
                let duration = platform.w(i, n) * &gamma[n][j][i] * &loads.v_comp()[n];
                c.eq(7, at.clone(), &ce[n][j][i], &(&cs[n][j][i] + duration));
                // (9)
                if j + 1 < q {
                    c.ge(9, at.clone(), &cs[n][j + 1][i], &ce[n][j][i]);
                }
                // (11)
                c.ge(11, at, &gamma[n][j][i], &Rational::zero());
            }
        }
        if n + 1 < n_loads {
            for l in 0..links {
                // (3)
                let blocker = if l + 1 < links { &se[n][q - 1][l + 1] } else { &se[n][q - 1][l] };
                c.ge(3, vec![l + 1, n + 1], &ss[n + 1][0][l], blocker);
            }
            for i in 0..m {
                // (8)
                c.ge(8, vec![i + 1, n + 1], &cs[n + 1][0][i], &ce[n][q - 1][i]);
            }
        }
        if let Some(release) = loads.release() {
            if links > 0 {
                c.ge(4, vec![1, n + 1, 1], &ss[n][0][0], &release[n]);
            }
            for i in 0..m {
                c.ge(10, vec![i + 1, n + 1], &cs[n][0][i], &release[n]);
            }
        }
        // (12)
        let total: Rational = gamma[n].iter().flatten().sum();
        c.eq(12, vec![n + 1], &total, &Rational::from_integer(1.into()));
    }
    for i in 0..m {
        // (10)
        c.ge(10, vec![i + 1], &cs[0][0][i], &platform.tau()[i]);
    }
    let last = &ce[n_loads - 1][inst.q(n_loads - 1) - 1];
    for (i, end) in last.iter().enumerate() {
        // (13)
        c.ge(13, vec![i + 1], &s.makespan, end);
    }

    let recomputed_makespan = last.iter().cloned().max().unwrap_or_else(Rational::zero);
    Ok(ValidationReport { feasible: c.violations.is_empty(), violations: c.violations, recomputed_makespan })
}

struct Checker {
    slack: Rational,
    violations: Vec<Violation>,
}

impl Checker {
    fn ge(&mut self, family: u8, index: Vec<usize>, lhs: &Rational, rhs: &Rational) {
        if lhs + &self.slack < *rhs {
            self.push(family, index, Relation::Ge, lhs, rhs);
        }
    }

    fn eq(&mut self, family: u8, index: Vec<usize>, lhs: &Rational, rhs: &Rational) {
        if (lhs - rhs).abs() > self.slack {
            self.push(family, index, Relation::Eq, lhs, rhs);
        }
    }

    fn push(&mut self, family: u8, index: Vec<usize>, relation: Relation, lhs: &Rational, rhs: &Rational) {
        self.violations.push(Violation { family, index, relation, lhs: lhs.clone(), rhs: rhs.clone() });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{realize, simulate, InstallmentPlan, LoadSet, Platform};
    use crate::rational::{int, ratio};

    /// Three processors, two loads of two installments, every fraction
    /// positive. The earliest-start timeline is tight on every family.
    fn base() -> (Instance, Schedule) {
        let platform = Platform::new(vec![int(2), int(3), int(1)], vec![int(1), ratio(1, 2)], vec![int(0); 3]).unwrap();
        let loads = LoadSet::new(vec![int(1), int(2)], vec![int(1), int(1)]).unwrap();
        let inst = Instance::new(platform, loads, InstallmentPlan::uniform(2, 2).unwrap()).unwrap();
        let row = |a, b, c| vec![ratio(a, 12), ratio(b, 12), ratio(c, 12)];
        let gamma = vec![vec![row(1, 2, 3), row(2, 2, 2)], vec![row(3, 1, 2), row(2, 2, 2)]];
        let s = simulate(&inst, gamma).unwrap();
        assert!(validate_schedule(&inst, &s).unwrap().feasible);
        (inst, s)
    }

    fn delta() -> Rational {
        ratio(1, 1000)
    }

    /// Two processors: the only link is the last one.
    fn base_two() -> (Instance, Schedule) {
        let platform = Platform::new(vec![int(1), int(2)], vec![int(1)], vec![int(0); 2]).unwrap();
        let inst = Instance::new(platform, LoadSet::unit(2).unwrap(), InstallmentPlan::uniform(2, 2).unwrap()).unwrap();
        let row = |a, b| vec![ratio(a, 8), ratio(b, 8)];
        let s = simulate(&inst, vec![vec![row(3, 1), row(3, 1)], vec![row(2, 2), row(3, 1)]]).unwrap();
        assert!(validate_schedule(&inst, &s).unwrap().feasible);
        (inst, s)
    }

    fn families_after(f: impl FnOnce(&Instance, &mut Schedule)) -> Vec<u8> {
        families_after_on(base(), f)
    }

    fn families_after_on((inst, mut s): (Instance, Schedule), f: impl FnOnce(&Instance, &mut Schedule)) -> Vec<u8> {
        f(&inst, &mut s);
        let report = validate_schedule(&inst, &s).unwrap();
        assert_eq!(report.feasible, report.violations.is_empty());
        report.families()
    }

    fn shift_comm(s: &mut Schedule, n: usize, j: usize, l: usize, by: &Rational) {
        s.comm_start[n][j][l] -= by;
        s.comm_end[n][j][l] -= by;
    }

    fn shift_comp(s: &mut Schedule, n: usize, j: usize, i: usize, by: &Rational) {
        s.comp_start[n][j][i] -= by;
        s.comp_end[n][j][i] -= by;
    }

    #[test]
    fn family_1_forward_before_receive() {
        assert_eq!(families_after(|_, s| shift_comm(s, 0, 0, 1, &delta())), vec![1]);
    }

    #[test]
    fn family_2_next_installment_waits_for_forward() {
        assert_eq!(families_after(|_, s| shift_comm(s, 0, 1, 0, &delta())), vec![2]);
    }

    #[test]
    fn family_2_last_link_serializes_its_own_sends() {
        assert_eq!(families_after_on(base_two(), |_, s| shift_comm(s, 0, 1, 0, &delta())), vec![2]);
    }

    #[test]
    fn family_3_last_link_serializes_across_loads() {
        assert_eq!(families_after_on(base_two(), |_, s| shift_comm(s, 1, 0, 0, &delta())), vec![3]);
    }

    #[test]
    fn family_3_next_load_waits_for_forward() {
        assert_eq!(families_after(|_, s| shift_comm(s, 1, 0, 0, &delta())), vec![3]);
    }

    #[test]
    fn family_4_nonnegative_start() {
        assert_eq!(families_after(|_, s| shift_comm(s, 0, 0, 0, &delta())), vec![4]);
    }

    #[test]
    fn family_5_transfer_duration() {
        assert_eq!(families_after(|_, s| s.comm_end[1][1][0] -= delta()), vec![5]);
    }

    #[test]
    fn family_6_compute_after_receive() {
        assert_eq!(families_after(|_, s| shift_comp(s, 0, 0, 1, &delta())), vec![6]);
    }

    #[test]
    fn family_7_compute_duration() {
        assert_eq!(families_after(|_, s| s.comp_end[0][0][0] -= delta()), vec![7]);
    }

    #[test]
    fn family_8_next_load_after_last_installment() {
        assert_eq!(families_after(|_, s| shift_comp(s, 1, 0, 0, &delta())), vec![8]);
    }

    #[test]
    fn family_9_installments_in_order() {
        assert_eq!(families_after(|_, s| shift_comp(s, 0, 1, 0, &delta())), vec![9]);
    }

    #[test]
    fn family_10_availability() {
        assert_eq!(families_after(|_, s| shift_comp(s, 0, 0, 0, &delta())), vec![10]);
    }

    #[test]
    fn family_11_nonnegative_fractions() {
        let got = families_after(|inst, s| {
            let mut gamma = s.gamma.clone();
            gamma[0][0][0] -= ratio(1, 10);
            gamma[0][1][0] += ratio(1, 10);
            *s = realize(inst, gamma).unwrap();
        });
        assert_eq!(got, vec![11]);
    }

    #[test]
    fn family_12_normalization() {
        let got = families_after(|inst, s| {
            let mut gamma = s.gamma.clone();
            gamma[1][0][0] += delta();
            *s = realize(inst, gamma).unwrap();
        });
        assert_eq!(got, vec![12]);
    }

    #[test]
    fn family_13_makespan_bound() {
        assert_eq!(families_after(|_, s| s.makespan -= delta()), vec![13]);
    }

    #[test]
    fn tolerance_absorbs_small_errors() {
        let (inst, mut s) = base();
        s.makespan -= ratio(1, 10_000_000_000);
        assert!(!validate_schedule(&inst, &s).unwrap().feasible);
        assert!(validate_schedule_with(&inst, &s, &Tolerance::float_default()).unwrap().feasible);
    }

    #[test]
    fn violation_carries_index_and_values() {
        let (inst, mut s) = base();
        s.makespan = int(0);
        let report = validate_schedule(&inst, &s).unwrap();
        let v = &report.violations[0];
        assert_eq!((v.family, v.index.clone(), v.relation), (13, vec![1], Relation::Ge));
        assert_eq!(v.rhs, s.comp_end[1][1][0]);
        assert_eq!(report.recomputed_makespan, *s.comp_end[1][1].iter().max().unwrap());
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let (inst, mut s) = base();
        s.comm_end[0][1].pop();
        assert!(matches!(validate_schedule(&inst, &s), Err(ModelError::Dimension(_))));
    }

    #[test]
    fn single_processor_schedule() {
        let p = Platform::new(vec![int(2)], vec![], vec![int(3)]).unwrap();
        let inst = Instance::new(p, LoadSet::unit(1).unwrap(), InstallmentPlan::uniform(1, 1).unwrap()).unwrap();
        let s = Schedule {
            gamma: vec![vec![vec![int(1)]]],
            comm_start: vec![vec![vec![]]],
            comm_end: vec![vec![vec![]]],
            comp_start: vec![vec![vec![int(3)]]],
            comp_end: vec![vec![vec![int(5)]]],
            makespan: int(5),
        };
        let report = validate_schedule(&inst, &s).unwrap();
        assert!(report.feasible);
        assert_eq!(report.recomputed_makespan, int(5));
    }
}
