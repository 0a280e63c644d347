//! More installments never hurt: splitting an installment in two, sweeping
//! the installment count, and the startup-cost bound that keeps the count
//! finite in practice.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::error::ModelError;
use crate::lp::{optimal_schedule_with, LpError, ObjectiveSpec, SolverOptions};
use crate::model::{realize, validate_schedule_with, Instance, InstallmentPlan, LoadSet, Platform, Schedule, Tolerance};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RefineError {
    #[error("load {load}, installment {installment} does not exist")]
    OutOfRange { load: usize, installment: usize },
    #[error("load {load}, installment {installment} is empty; splitting it changes nothing")]
    EmptyInstallment { load: usize, installment: usize },
    #[error("schedule to split is infeasible (families {families:?})")]
    Infeasible { families: Vec<u8> },
    #[error("need at least two processors to have communications")]
    NoCommunication,
    #[error("invalid overhead model: {0}")]
    Overhead(String),
    #[error("need q_max >= 1")]
    EmptySweep,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Which installment to halve, 1-based like the `(n, j)` labels in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub load: usize,
    pub installment: usize,
}

impl SplitSpec {
    pub fn new(load: usize, installment: usize) -> Self {
        Self { load, installment }
    }
}

/// Per-communication startup cost `k` and the largest acceptable ratio of
/// real to modeled communication cost.
#[derive(Debug, Clone, PartialEq)]
pub struct OverheadModel {
    k: Rational,
    rho_max: Rational,
}

impl OverheadModel {
    pub fn new(k: Rational, rho_max: Rational) -> Result<Self, RefineError> {
        if !k.is_positive() {
            return Err(RefineError::Overhead(format!("startup cost must be > 0, got {k}")));
        }
        if rho_max <= Rational::one() {
            return Err(RefineError::Overhead(format!("rho_max must be > 1, got {rho_max}")));
        }
        Ok(Self { k, rho_max })
    }

    pub fn k(&self) -> &Rational {
        &self.k
    }

    pub fn rho_max(&self) -> &Rational {
        &self.rho_max
    }

    /// `((m-1) q k + v) / v`.
    pub fn rho(&self, v_comm: &Rational, m: usize, q: usize) -> Rational {
        (int(m as i64 - 1) * int(q as i64) * &self.k + v_comm) / v_comm
    }
}

/// Result of a split: the instance with one more installment for the split
/// load, and its earliest-start schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub instance: Instance,
    pub schedule: Schedule,
}

/// Halves one installment into two consecutive installments of the same
/// load, every processor's piece halved, and re-realizes the timeline.
///
/// On two processors the result is never later than `s`. On longer chains
/// it can be: the one-port rule makes `P_i` hold back the second half until
/// `P_{i+1}` has forwarded the first, and a forward blocked further down
/// then stalls a transfer that used to leave early. [`split_and_resolve`]
/// has no such caveat.
pub fn split_installment(inst: &Instance, s: &Schedule, spec: SplitSpec) -> Result<Split, RefineError> {
    let SplitSpec { load, installment } = spec;
    let out_of_range = RefineError::OutOfRange { load, installment };
    if load == 0 || installment == 0 || load > inst.loads() || installment > inst.q(load - 1) {
        return Err(out_of_range);
    }
    let report = validate_schedule_with(inst, s, &Tolerance::Exact)?;
    if !report.feasible {
        return Err(RefineError::Infeasible { families: report.families() });
    }
    let (n, j) = (load - 1, installment - 1);
    if s.installment_size(n, j).is_zero() {
        return Err(RefineError::EmptyInstallment { load, installment });
    }

    let mut gamma = s.gamma.clone();
    let half: Vec<Rational> = gamma[n][j].iter().map(|g| g / int(2)).collect();
    gamma[n][j] = half.clone();
    gamma[n].insert(j + 1, half);

    let mut q = inst.plan.q().to_vec();
    q[n] += 1;
    let instance = inst.with_plan(InstallmentPlan::new(q)?)?;
    let schedule = realize(&instance, gamma)?;
    Ok(Split { instance, schedule })
}

/// Splits as [`split_installment`] does, then re-solves the LP on the
/// refined plan. That LP contains `s` itself (with an empty extra
/// installment), so the result is never later than `s`, and it is strictly
/// earlier on instances where the split frees idle time that rebalancing
/// can use.
pub fn split_and_resolve(
    inst: &Instance,
    s: &Schedule,
    spec: SplitSpec,
    options: &SolverOptions,
) -> Result<Split, RefineError> {
    let split = split_installment(inst, s, spec)?;
    let schedule = optimal_schedule_with(&split.instance, &ObjectiveSpec::Makespan, options)?;
    Ok(Split { instance: split.instance, schedule })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub q: usize,
    pub makespan: Rational,
}

/// Optimal makespan with `Q_n = q` for every load, for `q = 1..=q_max`.
/// Each entry is an independent solve; they run in parallel.
pub fn installment_sweep(
    platform: &Platform,
    loads: &LoadSet,
    q_max: usize,
    options: &SolverOptions,
) -> Result<Vec<SweepPoint>, RefineError> {
    if q_max == 0 {
        return Err(RefineError::EmptySweep);
    }
    (1..=q_max)
        .into_par_iter()
        .map(|q| {
            let inst = Instance::new(platform.clone(), loads.clone(), InstallmentPlan::uniform(loads.count(), q)?)?;
            let s = optimal_schedule_with(&inst, &ObjectiveSpec::Makespan, options)?;
            Ok(SweepPoint { q, makespan: s.makespan })
        })
        .collect()
}

/// The largest installment count with overhead ratio at most `rho_max`:
/// `max(1, floor((rho_max - 1) v / ((m - 1) k)))`.
pub fn bounded_installments(v_comm: &Rational, m: usize, om: &OverheadModel) -> Result<usize, RefineError> {
    if m < 2 {
        return Err(RefineError::NoCommunication);
    }
    if !v_comm.is_positive() {
        return Err(RefineError::Overhead(format!("communication volume must be > 0, got {v_comm}")));
    }
    let budget = (&om.rho_max - int(1)) * v_comm / (int(m as i64 - 1) * &om.k);
    let q = budget.numer().div_floor(budget.denom());
    Ok(q.to_usize().unwrap_or(usize::MAX).max(1))
}
