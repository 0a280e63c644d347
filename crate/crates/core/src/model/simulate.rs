use num_traits::{One, Signed, Zero};

use super::{Instance, PerInstallment, Schedule};
use crate::error::ModelError;
use crate::rational::Rational;

/// Earliest-start timeline for the fractions `gamma`.
///
/// Installments are laid out in `(load, installment, processor)` order and
/// every start instant is the smallest one the timing rules allow, so the
/// result is feasible whenever `gamma` is non-negative and normalized.
pub fn simulate(inst: &Instance, gamma: PerInstallment<Rational>) -> Result<Schedule, ModelError> {
    check_shape(inst, &gamma)?;
    for (n, load) in gamma.iter().enumerate() {
        if load.iter().flatten().any(Signed::is_negative) {
            return Err(ModelError::Fractions(format!("negative fraction in load {}", n + 1)));
        }
        let total: Rational = load.iter().flatten().sum();
        if !total.is_one() {
            return Err(ModelError::Fractions(format!("fractions of load {} sum to {total}", n + 1)));
        }
    }
    realize(inst, gamma)
}

/// Like [`simulate`] but only checks dimensions, so fractions that break
/// the non-negativity or normalization rules still get a timeline.
pub fn realize(inst: &Instance, gamma: PerInstallment<Rational>) -> Result<Schedule, ModelError> {
    check_shape(inst, &gamma)?;
    let m = inst.m();
    let links = m - 1;
    let platform = &inst.platform;
    let loads = &inst.loads;

    let mut comm_start = inst.table(links);
    let mut comm_end = inst.table(links);
    let mut comp_start = inst.table(m);
    let mut comp_end = inst.table(m);

    for n in 0..inst.loads() {
        let release = loads.release().map(|r| &r[n]);
        for j in 0..inst.q(n) {
            let previous = if j > 0 {
                Some((n, j - 1))
            } else if n > 0 {
                Some((n - 1, inst.q(n - 1) - 1))
            } else {
                None
            };
            let row = &gamma[n][j];

            // Volume beyond processor l, accumulated from the tail.
            let mut downstream = vec![Rational::zero(); m + 1];
            for i in (0..m).rev() {
                downstream[i] = &downstream[i + 1] + &row[i];
            }

            for l in 0..links {
                let mut start = Rational::zero();
                if l > 0 {
                    start = start.max(comm_end[n][j][l - 1].clone());
                }
                if let Some((pn, pj)) = previous {
                    start = start.max(comm_end[pn][pj][l].clone());
                    if l + 1 < links {
                        start = start.max(comm_end[pn][pj][l + 1].clone());
                    }
                }
                if let (0, 0, Some(r)) = (l, j, release) {
                    start = start.max(r.clone());
                }
                let duration = &platform.z()[l] * &loads.v_comm()[n] * &downstream[l + 1];
                comm_end[n][j][l] = &start + duration;
                comm_start[n][j][l] = start;
            }

            for i in 0..m {
                let mut start = match previous {
                    Some((pn, pj)) => comp_end[pn][pj][i].clone(),
                    None => platform.tau()[i].clone(),
                };
                if i > 0 {
                    start = start.max(comm_end[n][j][i - 1].clone());
                }
                if let (0, Some(r)) = (j, release) {
                    start = start.max(r.clone());
                }
                let duration = platform.w(i, n) * &row[i] * &loads.v_comp()[n];
                comp_end[n][j][i] = &start + duration;
                comp_start[n][j][i] = start;
            }
        }
    }

    let mut schedule = Schedule { gamma, comm_start, comm_end, comp_start, comp_end, makespan: Rational::zero() };
    schedule.makespan = schedule.final_completion();
    Ok(schedule)
}

pub(super) fn check_shape(inst: &Instance, gamma: &PerInstallment<Rational>) -> Result<(), ModelError> {
    check_table("gamma", inst, gamma, inst.m())
}

pub(super) fn check_table<T>(
    what: &str,
    inst: &Instance,
    table: &PerInstallment<T>,
    width: usize,
) -> Result<(), ModelError> {
    if table.len() != inst.loads() {
        return Err(ModelError::Dimension(format!("{what}: {} loads, expected {}", table.len(), inst.loads())));
    }
    for (n, load) in table.iter().enumerate() {
        if load.len() != inst.q(n) {
            return Err(ModelError::Dimension(format!(
                "{what}: load {} has {} installments, expected {}",
                n + 1,
                load.len(),
                inst.q(n)
            )));
        }
        if let Some(j) = load.iter().position(|row| row.len() != width) {
            return Err(ModelError::Dimension(format!(
                "{what}: load {} installment {} has {} entries, expected {width}",
                n + 1,
                j + 1,
                load[j].len()
            )));
        }
    }
    Ok(())
}
