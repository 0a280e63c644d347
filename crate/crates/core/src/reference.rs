//! The two-processor, two-load example and the load-by-load heuristic it
//! was built to critique.
//!
//! Both processors compute one unit in `lambda`, the link moves one unit in
//! one time unit, and both loads have unit size. Every schedule here is
//! realized through [`simulate`], so its timings obey the same model as any
//! LP solution.
//!
//! Regime boundaries are the irrational points `(sqrt(17)+1)/8` and
//! `(sqrt(3)+1)/2`. They are never compared numerically: a rational `lambda`
//! is placed by the sign of the quadratic each boundary solves.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::error::ModelError;
use crate::model::{simulate, Instance, InstallmentPlan, LoadSet, Platform, Schedule};
use crate::rational::{int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReferenceError {
    #[error("lambda must be > 0, got {0}")]
    NonPositiveLambda(Rational),
    #[error("{operation} is not defined for lambda = {lambda} ({regime})")]
    Regime { operation: &'static str, lambda: Rational, regime: Regime },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How the heuristic behaves for a given `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `lambda < (sqrt(17)+1)/8`: the second load is never fully sent.
    HeuristicIncomplete,
    /// `lambda = (sqrt(17)+1)/8`: infinitely many installments needed.
    HeuristicInfinite,
    /// Between the boundaries: finitely many installments for load two.
    HeuristicMulti,
    /// `lambda >= (sqrt(3)+1)/2`: one installment per load.
    HeuristicSingle,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::HeuristicIncomplete => "HeuristicIncomplete",
            Regime::HeuristicInfinite => "HeuristicInfinite",
            Regime::HeuristicMulti => "HeuristicMulti",
            Regime::HeuristicSingle => "HeuristicSingle",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `(sqrt(17)+1)/8`, root of `4x^2 - x - 1`.
pub fn lower_boundary() -> f64 {
    (17f64.sqrt() + 1.0) / 8.0
}

/// `(sqrt(3)+1)/2`, root of `2x^2 - 2x - 1`.
pub fn upper_boundary() -> f64 {
    (3f64.sqrt() + 1.0) / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleInstance {
    lambda: Rational,
}

/// Outcome of the multi-installment heuristic.
#[derive(Debug, Clone, PartialEq)]
pub enum MultiInstallment {
    /// The heuristic schedule, with `q` installments for the second load.
    Schedule { q: usize, schedule: Schedule },
    /// Even infinitely many installments cover only `coverage < 1` of the
    /// second load.
    Infeasible { coverage: Rational },
}

impl ExampleInstance {
    pub fn new(lambda: Rational) -> Result<Self, ReferenceError> {
        if !lambda.is_positive() {
            return Err(ReferenceError::NonPositiveLambda(lambda));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn platform(&self) -> Platform {
        Platform::homogeneous(2, self.lambda.clone(), int(1)).expect("lambda > 0")
    }

    /// The example with installment counts `q` for the two loads.
    pub fn instance(&self, q: [usize; 2]) -> Result<Instance, ModelError> {
        Instance::new(self.platform(), LoadSet::unit(2)?, InstallmentPlan::new(q.to_vec())?)
    }

    pub fn regime(&self) -> Regime {
        classify_regime(&self.lambda)
    }
}

/// Places `lambda` among the heuristic's regimes. Boundary points, which a
/// rational cannot hit, would go to the degenerate side.
pub fn classify_regime(lambda: &Rational) -> Regime {
    let l = lambda;
    let upper = int(2) * l * l - int(2) * l - int(1);
    if !upper.is_negative() {
        return Regime::HeuristicSingle;
    }
    // Coverage 2l^2 / ((1-l)(2l+1)) < 1, i.e. 4l^2 - l - 1 < 0, below 1.
    let lower = int(4) * l * l - l - int(1);
    if lower.is_negative() {
        Regime::HeuristicIncomplete
    } else if lower.is_zero() {
        Regime::HeuristicInfinite
    } else {
        Regime::HeuristicMulti
    }
}

/// Fraction of the second load the heuristic sends with unboundedly many
/// installments, `2l^2 / ((1-l)(2l+1))`. Only meaningful for `l < 1`.
pub fn coverage_bound(lambda: &Rational) -> Rational {
    let l = lambda;
    int(2) * l * l / ((int(1) - l) * (int(2) * l + int(1)))
}

pub fn coverage_bound_f64(lambda: f64) -> f64 {
    2.0 * lambda * lambda / ((1.0 - lambda) * (2.0 * lambda + 1.0))
}

/// Makespan of the globally optimal single-installment schedule,
/// `2l(l^2+l+1) / (2l^2+2l+1)`.
pub fn makespan_one(lambda: &Rational) -> Rational {
    let l = lambda;
    int(2) * l * (l * l + l + int(1)) / (int(2) * l * l + int(2) * l + int(1))
}

/// Makespan of the single-installment heuristic, `l(4l+3) / (2(2l+1))`.
pub fn makespan_two(lambda: &Rational) -> Rational {
    let l = lambda;
    l * (int(4) * l + int(3)) / (int(2) * (int(2) * l + int(1)))
}

/// `makespan_two - makespan_one` in closed form,
/// `l(2l^2-2l-1) / (8l^3+12l^2+8l+2)`.
pub fn heuristic_gap(lambda: &Rational) -> Rational {
    let l = lambda;
    let num = l * (int(2) * l * l - int(2) * l - int(1));
    let den = int(8) * l * l * l + int(12) * l * l + int(8) * l + int(2);
    num / den
}

pub fn heuristic_gap_f64(lambda: f64) -> f64 {
    let l = lambda;
    l * (2.0 * l * l - 2.0 * l - 1.0) / (8.0 * l * l * l + 12.0 * l * l + 8.0 * l + 2.0)
}

/// One installment per load; `P1` keeps `(2l^2+1)/d` of the first load and
/// `(2l+1)/d` of the second, `d = 2l^2+2l+1`.
pub fn global_one_installment(x: &ExampleInstance) -> Schedule {
    let l = x.lambda();
    let d = int(2) * l * l + int(2) * l + int(1);
    let gamma = vec![
        vec![vec![(int(2) * l * l + int(1)) / &d, int(2) * l / &d]],
        vec![vec![(int(2) * l + int(1)) / &d, int(2) * l * l / &d]],
    ];
    simulate(&x.instance([1, 1]).expect("valid example"), gamma).expect("fractions sum to one")
}

/// The heuristic's single-installment schedule: the first load balanced on
/// its own, then the second load split evenly.
pub fn mvb_one_installment(x: &ExampleInstance) -> Result<Schedule, ReferenceError> {
    let regime = x.regime();
    if regime != Regime::HeuristicSingle {
        return Err(ReferenceError::Regime { operation: "mvb_one_installment", lambda: x.lambda.clone(), regime });
    }
    let l = x.lambda();
    let d = int(2) * l + int(1);
    let gamma = vec![vec![vec![(l + int(1)) / &d, l / &d]], vec![vec![ratio(1, 2), ratio(1, 2)]]];
    Ok(simulate(&x.instance([1, 1])?, gamma)?)
}

/// Installments of the second load under the heuristic: `beta_k = l^k alpha`
/// per processor for `k < Q`, then whatever remains, split evenly. `Q` is
/// the first count whose geometric supply reaches the whole load. `None`
/// when no finite count does.
pub fn heuristic_installments(lambda: &Rational) -> Option<Vec<Rational>> {
    match classify_regime(lambda) {
        Regime::HeuristicMulti | Regime::HeuristicSingle => {}
        _ => return None,
    }
    let alpha = lambda / (int(2) * lambda + int(1));
    let mut betas = Vec::new();
    let mut sent = Rational::zero();
    let mut beta = alpha;
    loop {
        beta = &beta * lambda;
        if &sent + int(2) * &beta >= Rational::one() {
            betas.push((Rational::one() - &sent) / int(2));
            return Some(betas);
        }
        sent += int(2) * &beta;
        betas.push(beta.clone());
    }
}

/// The installment count as published, `ceil(ln((4l^2-l-1)/(2l^2)) / ln l)`.
/// Undefined at `l = 1`, where the count is 2.
pub fn heuristic_installments_formula(lambda: f64) -> Option<u64> {
    if lambda == 1.0 {
        return Some(2);
    }
    let arg = (4.0 * lambda * lambda - lambda - 1.0) / (2.0 * lambda * lambda);
    if arg <= 0.0 {
        return None;
    }
    let q = (arg.ln() / lambda.ln()).ceil();
    (q.is_finite() && q >= 1.0).then_some(q as u64)
}

/// The heuristic's multi-installment schedule for the middle regime.
pub fn mvb_multi_installment(x: &ExampleInstance) -> Result<MultiInstallment, ReferenceError> {
    let l = x.lambda();
    match x.regime() {
        Regime::HeuristicIncomplete | Regime::HeuristicInfinite => {
            return Ok(MultiInstallment::Infeasible { coverage: coverage_bound(l) });
        }
        Regime::HeuristicSingle => {
            return Err(ReferenceError::Regime {
                operation: "mvb_multi_installment",
                lambda: l.clone(),
                regime: Regime::HeuristicSingle,
            });
        }
        Regime::HeuristicMulti => {}
    }
    let betas = heuristic_installments(l).expect("finite in this regime");
    let q = betas.len();
    let d = int(2) * l + int(1);
    let gamma = vec![vec![vec![(l + int(1)) / &d, l / &d]], betas.into_iter().map(|b| vec![b.clone(), b]).collect()];
    let schedule = simulate(&x.instance([1, q])?, gamma)?;
    Ok(MultiInstallment::Schedule { q, schedule })
}

/// `(1 - alpha) l + l/2`, the heuristic's makespan in the middle regime.
pub fn mvb_multi_makespan(lambda: &Rational) -> Rational {
    let alpha = lambda / (int(2) * lambda + int(1));
    (int(1) - alpha) * lambda + lambda / int(2)
}

/// Two installments per load at `l = 3/4`, beating the heuristic's 9/10.
pub fn improved_two_installment_schedule() -> Schedule {
    let x = ExampleInstance::new(ratio(3, 4)).expect("positive");
    let f = |k| ratio(k, 653);
    let gamma = vec![vec![vec![f(0), f(192)], vec![f(317), f(144)]], vec![vec![f(0), f(108)], vec![f(464), f(81)]]];
    simulate(&x.instance([2, 2]).expect("valid example"), gamma).expect("fractions sum to one")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_schedule;

    fn ex(p: i64, q: i64) -> ExampleInstance {
        ExampleInstance::new(ratio(p, q)).unwrap()
    }

    #[test]
    fn rejects_non_positive_lambda() {
        assert!(ExampleInstance::new(int(0)).is_err());
        assert!(ExampleInstance::new(ratio(-1, 2)).is_err());
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(&ratio(1, 2)), Regime::HeuristicIncomplete);
        assert_eq!(classify_regime(&ratio(64, 100)), Regime::HeuristicIncomplete);
        assert_eq!(classify_regime(&ratio(65, 100)), Regime::HeuristicMulti);
        assert_eq!(classify_regime(&int(1)), Regime::HeuristicMulti);
        assert_eq!(classify_regime(&ratio(136, 100)), Regime::HeuristicMulti);
        assert_eq!(classify_regime(&ratio(137, 100)), Regime::HeuristicSingle);
        assert_eq!(classify_regime(&int(2)), Regime::HeuristicSingle);
    }

    #[test]
    fn boundaries_solve_their_quadratics() {
        let a = lower_boundary();
        let b = upper_boundary();
        assert!((4.0 * a * a - a - 1.0).abs() < 1e-12);
        assert!((2.0 * b * b - 2.0 * b - 1.0).abs() < 1e-12);
        assert!((coverage_bound_f64(a) - 1.0).abs() < 1e-12);
        assert!(heuristic_gap_f64(b).abs() < 1e-12);
    }

    #[test]
    fn global_schedule_at_one_half() {
        let s = global_one_installment(&ex(1, 2));
        assert_eq!(s.gamma[0][0], vec![ratio(3, 5), ratio(2, 5)]);
        assert_eq!(s.gamma[1][0], vec![ratio(4, 5), ratio(1, 5)]);
        assert_eq!(s.makespan, ratio(7, 10));
        assert!(validate_schedule(&ex(1, 2).instance([1, 1]).unwrap(), &s).unwrap().feasible);
    }

    #[test]
    fn global_schedule_matches_closed_form() {
        for (p, q) in [(1, 10), (1, 2), (3, 4), (1, 1), (2, 1), (7, 3), (50, 1)] {
            let x = ex(p, q);
            assert_eq!(global_one_installment(&x).makespan, makespan_one(x.lambda()), "lambda = {p}/{q}");
        }
        assert_eq!(makespan_one(&int(2)), ratio(28, 13));
    }

    #[test]
    fn large_lambda_splits_total_work_evenly() {
        let s = global_one_installment(&ex(1000, 1));
        for i in 0..2 {
            let f = crate::rational::to_f64(&((s.share(0, i) + s.share(1, i)) / int(2)));
            assert!((f - 0.5).abs() < 1e-2);
        }
    }

    #[test]
    fn single_installment_heuristic() {
        let s = mvb_one_installment(&ex(2, 1)).unwrap();
        assert_eq!(s.makespan, ratio(11, 5));
        assert_eq!(&s.makespan - makespan_one(&int(2)), ratio(3, 65));
        assert_eq!(heuristic_gap(&int(2)), ratio(3, 65));
        for (p, q) in [(3, 2), (2, 1), (5, 1), (100, 1)] {
            let x = ex(p, q);
            assert_eq!(mvb_one_installment(&x).unwrap().makespan, makespan_two(x.lambda()));
        }
        assert!(matches!(mvb_one_installment(&ex(1, 1)), Err(ReferenceError::Regime { .. })));
    }

    #[test]
    fn multi_installment_at_three_quarters() {
        let MultiInstallment::Schedule { q, schedule } = mvb_multi_installment(&ex(3, 4)).unwrap() else {
            panic!("expected a schedule");
        };
        assert_eq!(q, 3);
        assert_eq!(schedule.makespan, ratio(9, 10));
        assert_eq!(mvb_multi_makespan(&ratio(3, 4)), ratio(9, 10));
        let sizes: Vec<_> = schedule.gamma[1].iter().map(|r| r[0].clone()).collect();
        assert_eq!(sizes, vec![ratio(9, 40), ratio(27, 160), ratio(17, 160)]);
        assert!(validate_schedule(&ex(3, 4).instance([1, 3]).unwrap(), &schedule).unwrap().feasible);
    }

    #[test]
    fn multi_installment_sizes_are_geometric() {
        for (p, q) in [(13, 20), (7, 10), (3, 4), (9, 10), (1, 1), (6, 5), (27, 20)] {
            let l = ratio(p, q);
            let betas = heuristic_installments(&l).unwrap();
            for k in 0..betas.len().saturating_sub(2) {
                assert_eq!(&betas[k + 1], &(&betas[k] * &l));
            }
            let last = betas.last().unwrap();
            let cap = if betas.len() >= 2 { &betas[betas.len() - 2] * &l } else { &l * &l / (int(2) * &l + int(1)) };
            assert!(last.is_positive() && *last <= cap);
            assert_eq!(betas.iter().sum::<Rational>() * int(2), int(1));
        }
    }

    #[test]
    fn lambda_one_uses_two_installments() {
        assert_eq!(heuristic_installments(&int(1)).unwrap().len(), 2);
        assert_eq!(heuristic_installments_formula(1.0), Some(2));
    }

    #[test]
    fn installment_count_matches_published_formula() {
        for k in 65..137 {
            if k == 100 {
                continue;
            }
            let l = ratio(k, 100);
            let exact = heuristic_installments(&l).unwrap().len() as u64;
            assert_eq!(heuristic_installments_formula(k as f64 / 100.0), Some(exact), "lambda = {k}/100");
        }
    }

    #[test]
    fn multi_installment_outside_regime() {
        match mvb_multi_installment(&ex(1, 2)).unwrap() {
            MultiInstallment::Infeasible { coverage } => assert_eq!(coverage, ratio(1, 2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(mvb_multi_installment(&ex(2, 1)).is_err());
    }

    #[test]
    fn improved_schedule() {
        let s = improved_two_installment_schedule();
        assert_eq!(s.makespan, ratio(2343, 2612));
        assert!(s.makespan < ratio(9, 10));
        for n in 0..2 {
            assert_eq!(s.share(n, 0) + s.share(n, 1), int(1));
        }
        assert!(validate_schedule(&ex(3, 4).instance([2, 2]).unwrap(), &s).unwrap().feasible);
    }

    #[test]
    fn gap_stays_within_a_quarter() {
        for k in 0..200 {
            let l = crate::rational::ratio(137, 100) + ratio(k, 2);
            let g = heuristic_gap(&l);
            assert!(!g.is_negative() && g <= ratio(1, 4));
            assert_eq!(g, makespan_two(&l) - makespan_one(&l));
        }
    }
}
