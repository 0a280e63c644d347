//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use chainsched::lp::{optimal_schedule, optimal_schedule_with, Arithmetic, ObjectiveSpec, SolverOptions};
use chainsched::model::{
    realize, simulate, validate_schedule, Instance, InstallmentPlan, LoadSet, Platform, Schedule,
};
use chainsched::rational::{int, ratio, to_f64, Rational};
use chainsched::reference::{
    heuristic_gap, heuristic_gap_f64, heuristic_installments, improved_two_installment_schedule, upper_boundary,
    mvb_multi_installment, mvb_one_installment, ExampleInstance, MultiInstallment,
};
use chainsched::refine::{bounded_installments, installment_sweep, OverheadModel};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn example(lambda: Rational, plan: [usize; 2]) -> Instance {
    ExampleInstance::new(lambda).unwrap().instance(plan).unwrap()
}

fn lp(inst: &Instance) -> Rational {
    optimal_schedule(inst, &ObjectiveSpec::Makespan).unwrap().makespan
}

fn example_optimum() -> Outcome {
    let inst = example(ratio(1, 2), [1, 1]);
    let exact = lp(&inst);
    ensure!(exact == ratio(7, 10), "exact makespan {exact}, expected 7/10");
    let l = ratio(1, 2);
    let formula = int(2) * &l * (&l * &l + &l + int(1)) / (int(2) * &l * &l + int(2) * &l + int(1));
    ensure!(exact == formula, "closed form gives {formula}");
    let options = SolverOptions { arithmetic: Arithmetic::Float, ..SolverOptions::default() };
    let float = optimal_schedule_with(&inst, &ObjectiveSpec::Makespan, &options).unwrap().makespan;
    let err = (to_f64(&float) - 0.7).abs();
    ensure!(err < 1e-9, "float makespan off by {err:e}");
    Ok(format!("makespan 7/10 exact, float error {err:.1e}"))
}

fn heuristic_gap_check() -> Outcome {
    let x = ExampleInstance::new(int(2)).unwrap();
    let mvb = mvb_one_installment(&x).unwrap().makespan;
    let opt = lp(&x.instance([1, 1]).unwrap());
    ensure!(mvb == ratio(11, 5), "heuristic makespan {mvb}");
    ensure!(opt == ratio(28, 13), "LP(1,1) makespan {opt}");
    ensure!(&mvb - &opt == ratio(3, 65), "difference {}", &mvb - &opt);
    ensure!(heuristic_gap(&int(2)) == ratio(3, 65), "gap formula gives {}", heuristic_gap(&int(2)));

    let boundary = heuristic_gap_f64(upper_boundary());
    ensure!(boundary.abs() < 1e-12, "gap at the lower boundary is {boundary:e}");

    let lo = ratio(1367, 1000);
    let step = (int(100) - &lo) / int(49);
    let grid: Vec<Rational> = (0..50).map(|k| &lo + &step * int(k)).collect();
    let bad: Vec<String> = grid
        .par_iter()
        .filter_map(|l| {
            let edge = int(2) * l * l - int(2) * l - int(1);
            if edge.is_negative() {
                return Some(format!("{l} lies below the boundary"));
            }
            let x = ExampleInstance::new(l.clone()).unwrap();
            let gap = &mvb_one_installment(&x).unwrap().makespan - lp(&x.instance([1, 1]).unwrap());
            if gap != heuristic_gap(l) {
                return Some(format!("lambda {l}: measured gap {gap}, formula {}", heuristic_gap(l)));
            }
            (gap.is_negative() || gap > ratio(1, 4)).then(|| format!("lambda {l}: gap {gap} outside [0, 1/4]"))
        })
        .collect();
    ensure!(bad.is_empty(), "{}", bad.join("; "));
    Ok("11/5 - 28/13 = 3/65; gap matches formula and stays in [0, 1/4] on 50 points".into())
}

fn heuristic_infeasibility() -> Outcome {
    let x = ExampleInstance::new(ratio(1, 2)).unwrap();
    match mvb_multi_installment(&x).unwrap() {
        MultiInstallment::Infeasible { coverage } => {
            ensure!(coverage == ratio(1, 2), "coverage {coverage}");
            Ok("infeasible, coverage 1/2".into())
        }
        MultiInstallment::Schedule { q, .. } => Err(format!("heuristic returned a schedule with Q={q}")),
    }
}

fn installment_formula() -> Outcome {
    let l = ratio(3, 4);
    let betas = heuristic_installments(&l).ok_or("no finite installment count")?;
    ensure!(betas.len() == 3, "Q = {}", betas.len());
    let x = ExampleInstance::new(l.clone()).unwrap();
    let MultiInstallment::Schedule { q, schedule } = mvb_multi_installment(&x).unwrap() else {
        return Err("heuristic reported infeasible".into());
    };
    ensure!(q == 3, "schedule has Q = {q}");
    ensure!(schedule.makespan == ratio(9, 10), "heuristic makespan {}", schedule.makespan);

    let improved = improved_two_installment_schedule();
    let inst = x.instance([2, 2]).unwrap();
    let report = validate_schedule(&inst, &improved).unwrap();
    ensure!(report.feasible, "improved schedule violates families {:?}", report.families());
    ensure!(improved.makespan == ratio(2343, 2612), "improved makespan {}", improved.makespan);
    let opt = lp(&inst);
    ensure!(opt <= ratio(2343, 2612), "LP(2,2) makespan {opt}");
    Ok(format!("Q=3, 9/10; improved 2343/2612 feasible; LP(2,2) = {opt}"))
}

fn quarter(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.random_range(1..=16), 4)
}

fn random_instance(rng: &mut ChaCha8Rng, m: usize, loads: usize) -> (Platform, LoadSet) {
    let w = (0..m).map(|_| quarter(rng)).collect();
    let z = (0..m - 1).map(|_| quarter(rng)).collect();
    let vc = (0..loads).map(|_| quarter(rng)).collect();
    let vp = (0..loads).map(|_| quarter(rng)).collect();
    (Platform::new(w, z, vec![int(0); m]).unwrap(), LoadSet::new(vc, vp).unwrap())
}

fn sweep_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let cases: Vec<(Platform, LoadSet)> = (0..100)
        .map(|_| {
            let m = rng.random_range(2..=4);
            let n = rng.random_range(1..=3);
            random_instance(&mut rng, m, n)
        })
        .collect();
    let bad: Vec<String> = cases
        .par_iter()
        .enumerate()
        .filter_map(|(k, (p, l))| {
            let sweep = installment_sweep(p, l, 4, &SolverOptions::default()).unwrap();
            sweep.windows(2).any(|w| w[1].makespan > w[0].makespan).then(|| format!("instance {k} increases"))
        })
        .collect();
    ensure!(bad.is_empty(), "{}", bad.join("; "));

    for l in [ratio(1, 2), ratio(3, 4), int(1), int(2)] {
        let inst = example(l.clone(), [1, 1]);
        let sweep = installment_sweep(&inst.platform, &inst.loads, 4, &SolverOptions::default()).unwrap();
        let values: Vec<String> = sweep.iter().map(|p| p.makespan.to_string()).collect();
        ensure!(
            sweep.windows(2).all(|w| w[1].makespan < w[0].makespan),
            "lambda {l}: sweep {} is not strictly decreasing",
            values.join(", ")
        );
    }
    Ok("100 random sweeps non-increasing; example sweeps strictly decreasing".into())
}

/// Three processors, two loads of two installments, every fraction
/// positive, so the earliest-start timeline is tight everywhere.
fn base_three() -> (Instance, Schedule) {
    let platform = Platform::new(vec![int(2), int(3), int(1)], vec![int(1), ratio(1, 2)], vec![int(0); 3]).unwrap();
    let loads = LoadSet::new(vec![int(1), int(2)], vec![int(1), int(1)]).unwrap();
    let inst = Instance::new(platform, loads, InstallmentPlan::uniform(2, 2).unwrap()).unwrap();
    let row = |a, b, c| vec![ratio(a, 12), ratio(b, 12), ratio(c, 12)];
    let s = simulate(&inst, vec![vec![row(1, 2, 3), row(2, 2, 2)], vec![row(3, 1, 2), row(2, 2, 2)]]).unwrap();
    (inst, s)
}

fn base_two() -> (Instance, Schedule) {
    let platform = Platform::new(vec![int(1), int(2)], vec![int(1)], vec![int(0); 2]).unwrap();
    let inst = Instance::new(platform, LoadSet::unit(2).unwrap(), InstallmentPlan::uniform(2, 2).unwrap()).unwrap();
    let row = |a, b| vec![ratio(a, 8), ratio(b, 8)];
    let s = simulate(&inst, vec![vec![row(3, 1), row(3, 1)], vec![row(2, 2), row(3, 1)]]).unwrap();
    (inst, s)
}

type Perturb = Box<dyn Fn(&Instance, &mut Schedule)>;

fn earlier_comm(n: usize, j: usize, l: usize) -> Perturb {
    Box::new(move |_, s| {
        s.comm_start[n][j][l] -= ratio(1, 1000);
        s.comm_end[n][j][l] -= ratio(1, 1000);
    })
}

fn earlier_comp(n: usize, j: usize, i: usize) -> Perturb {
    Box::new(move |_, s| {
        s.comp_start[n][j][i] -= ratio(1, 1000);
        s.comp_end[n][j][i] -= ratio(1, 1000);
    })
}

fn validator_completeness() -> Outcome {
    let cases: Vec<(u8, bool, Perturb)> = vec![
        (1, true, earlier_comm(0, 0, 1)),
        (2, true, earlier_comm(0, 1, 0)),
        (2, false, earlier_comm(0, 1, 0)),
        (3, true, earlier_comm(1, 0, 0)),
        (3, false, earlier_comm(1, 0, 0)),
        (4, true, earlier_comm(0, 0, 0)),
        (5, true, Box::new(|_, s| s.comm_end[1][1][0] -= ratio(1, 1000))),
        (6, true, earlier_comp(0, 0, 1)),
        (7, true, Box::new(|_, s| s.comp_end[0][0][0] -= ratio(1, 1000))),
        (8, true, earlier_comp(1, 0, 0)),
        (9, true, earlier_comp(0, 1, 0)),
        (10, true, earlier_comp(0, 0, 0)),
        (11, true, Box::new(|inst, s| {
            let mut gamma = s.gamma.clone();
            gamma[0][0][0] -= ratio(1, 10);
            gamma[0][1][0] += ratio(1, 10);
            *s = realize(inst, gamma).unwrap();
        })),
        (12, true, Box::new(|inst, s| {
            let mut gamma = s.gamma.clone();
            gamma[1][0][0] += ratio(1, 1000);
            *s = realize(inst, gamma).unwrap();
        })),
        (13, true, Box::new(|_, s| s.makespan -= ratio(1, 1000))),
    ];
    let mut covered = Vec::new();
    for (family, three, perturb) in cases {
        let (inst, mut s) = if three { base_three() } else { base_two() };
        let before = validate_schedule(&inst, &s).unwrap();
        ensure!(before.feasible, "base schedule for family {family} is infeasible: {:?}", before.families());
        perturb(&inst, &mut s);
        let after = validate_schedule(&inst, &s).unwrap();
        ensure!(after.families() == vec![family], "perturbation for family {family} reports {:?}", after.families());
        covered.push(family);
    }
    covered.dedup();
    ensure!(covered == (1..=13).collect::<Vec<u8>>(), "families covered: {covered:?}");
    Ok("each of the 13 families isolated by a minimal perturbation".into())
}

fn oracle_equivalence() -> Outcome {
    const STEPS: i64 = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    for k in 0..20 {
        let (p, l) = random_instance(&mut rng, 2, 1);
        let inst = Instance::new(p.clone(), l.clone(), InstallmentPlan::uniform(1, 1).unwrap()).unwrap();
        let opt = lp(&inst);

        let a = p.w(0, 0) * &l.v_comp()[0];
        let b = &p.z()[0] * &l.v_comm()[0] + p.w(1, 0) * &l.v_comp()[0];
        let gamma2 = &a / (&a + &b);
        let closed = &a * (int(1) - &gamma2);
        ensure!(opt == closed, "instance {k}: LP {opt}, closed form {closed}");

        let (af, bf) = (to_f64(&a), to_f64(&b));
        let grid = (0..=STEPS)
            .map(|g| {
                let g2 = g as f64 / STEPS as f64;
                (af * (1.0 - g2)).max(bf * g2)
            })
            .fold(f64::INFINITY, f64::min);
        let resolution = af.max(bf) / STEPS as f64;
        let diff = grid - to_f64(&opt);
        ensure!(diff >= -1e-12 && diff <= resolution, "instance {k}: grid {grid}, LP {opt}, resolution {resolution}");

        let at = simulate(&inst, vec![vec![vec![int(1) - &gamma2, gamma2.clone()]]]).unwrap();
        ensure!(at.makespan == opt, "instance {k}: closed-form fractions give {}", at.makespan);
        ensure!(at.comp_end[0][0][0] == at.comp_end[0][0][1], "instance {k}: completions differ");
        ensure!(!gamma2.is_zero(), "instance {k}: P2 idle");
    }
    Ok("20 instances: LP = simultaneous-completion form, grid within resolution".into())
}

fn rho_bound() -> Outcome {
    let cases = [
        (int(1000), 3, OverheadModel::new(int(10), ratio(6, 5)).unwrap(), 10),
        (int(1000), 3, OverheadModel::new(int(10), ratio(1_000_001, 1_000_000)).unwrap(), 1),
        (int(1), 2, OverheadModel::new(int(1), int(3)).unwrap(), 2),
    ];
    for (v, m, om, want) in cases {
        let got = bounded_installments(&v, m, &om).unwrap();
        ensure!(got == want, "V={v}, m={m}, K={}, rho={}: got {got}, expected {want}", om.k(), om.rho_max());
        if got > 1 {
            let rho = om.rho(&v, m, got);
            ensure!(rho <= *om.rho_max(), "rho {rho} exceeds the cap at Q={got}");
            ensure!(om.rho(&v, m, got + 1) > *om.rho_max(), "Q={} also fits", got + 1);
        }
    }
    Ok("worked bounds 10, 1, 2".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("example optimum at lambda=1/2", example_optimum),
        ("heuristic gap", heuristic_gap_check),
        ("heuristic infeasibility at lambda=1/2", heuristic_infeasibility),
        ("installment formula at lambda=3/4", installment_formula),
        ("installment sweeps", sweep_monotonicity),
        ("validator completeness", validator_completeness),
        ("two-processor oracle", oracle_equivalence),
        ("overhead-bounded installments", rho_bound),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}) [{ms} ms]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} [{ms} ms]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
