//! Problem instances and schedules on a linear chain `P1 - P2 - ... - Pm`.
//!
//! All loads start on `P1`. Link `l` (0-based here, `l_{l+1}` in the usual
//! 1-based notation) joins processor `l` to processor `l + 1`. Per-installment
//! tables are indexed `[load][installment][processor or link]`, all 0-based;
//! reports and file names use 1-based indices.

mod simulate;
mod validate;

pub use simulate::{realize, simulate};
pub use validate::{validate_schedule, validate_schedule_with, Relation, Tolerance, ValidationReport, Violation};

use num_traits::{One, Signed, Zero};

use crate::error::ModelError;
use crate::rational::Rational;

/// `[load][installment][processor or link]`.
pub type PerInstallment<T> = Vec<Vec<Vec<T>>>;

#[derive(Debug, Clone, PartialEq)]
pub enum ComputeSpeeds {
    /// `w_i`: time for processor `i` to compute one load unit.
    Uniform(Vec<Rational>),
    /// `w_i^n`, indexed `[processor][load]`.
    Unrelated(Vec<Vec<Rational>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Platform {
    speeds: ComputeSpeeds,
    z: Vec<Rational>,
    tau: Vec<Rational>,
}

impl Platform {
    pub fn new(w: Vec<Rational>, z: Vec<Rational>, tau: Vec<Rational>) -> Result<Self, ModelError> {
        if w.iter().any(|x| !x.is_positive()) {
            return Err(ModelError::Platform("unit compute times must be > 0".into()));
        }
        Self::build(w.len(), ComputeSpeeds::Uniform(w), z, tau)
    }

    /// Unrelated machines: `w[i][n]` is the unit compute time of processor
    /// `i` on load `n`.
    pub fn unrelated(w: Vec<Vec<Rational>>, z: Vec<Rational>, tau: Vec<Rational>) -> Result<Self, ModelError> {
        if w.iter().flatten().any(|x| !x.is_positive()) {
            return Err(ModelError::Platform("unit compute times must be > 0".into()));
        }
        let width = w.first().map_or(0, Vec::len);
        if width == 0 || w.iter().any(|row| row.len() != width) {
            return Err(ModelError::Platform("unrelated compute matrix must be rectangular and non-empty".into()));
        }
        Self::build(w.len(), ComputeSpeeds::Unrelated(w), z, tau)
    }

    /// Identical links and processors, all available at time zero.
    pub fn homogeneous(m: usize, w: Rational, z: Rational) -> Result<Self, ModelError> {
        Self::new(vec![w; m], vec![z; m.saturating_sub(1)], vec![Rational::zero(); m])
    }

    fn build(m: usize, speeds: ComputeSpeeds, z: Vec<Rational>, tau: Vec<Rational>) -> Result<Self, ModelError> {
        if m == 0 {
            return Err(ModelError::Platform("need at least one processor".into()));
        }
        if z.len() != m - 1 {
            return Err(ModelError::Platform(format!("expected {} link times, got {}", m - 1, z.len())));
        }
        if tau.len() != m {
            return Err(ModelError::Platform(format!("expected {m} availability dates, got {}", tau.len())));
        }
        if z.iter().any(|x| !x.is_positive()) {
            return Err(ModelError::Platform("unit link times must be > 0".into()));
        }
        if tau.iter().any(Signed::is_negative) {
            return Err(ModelError::Platform("availability dates must be >= 0".into()));
        }
        Ok(Self { speeds, z, tau })
    }

    pub fn m(&self) -> usize {
        self.tau.len()
    }

    pub fn links(&self) -> usize {
        self.z.len()
    }

    pub fn speeds(&self) -> &ComputeSpeeds {
        &self.speeds
    }

    /// Unit compute time of processor `i` on load `n`.
    pub fn w(&self, i: usize, n: usize) -> &Rational {
        match &self.speeds {
            ComputeSpeeds::Uniform(w) => &w[i],
            ComputeSpeeds::Unrelated(w) => &w[i][n],
        }
    }

    pub fn z(&self) -> &[Rational] {
        &self.z
    }

    pub fn tau(&self) -> &[Rational] {
        &self.tau
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadSet {
    v_comm: Vec<Rational>,
    v_comp: Vec<Rational>,
    release: Option<Vec<Rational>>,
}

impl LoadSet {
    pub fn new(v_comm: Vec<Rational>, v_comp: Vec<Rational>) -> Result<Self, ModelError> {
        if v_comm.is_empty() {
            return Err(ModelError::Loads("need at least one load".into()));
        }
        if v_comm.len() != v_comp.len() {
            return Err(ModelError::Loads(format!(
                "{} communication volumes but {} computation volumes",
                v_comm.len(),
                v_comp.len()
            )));
        }
        if v_comm.iter().chain(&v_comp).any(|x| !x.is_positive()) {
            return Err(ModelError::Loads("volumes must be > 0".into()));
        }
        Ok(Self { v_comm, v_comp, release: None })
    }

    /// `count` loads with unit communication and computation volume.
    pub fn unit(count: usize) -> Result<Self, ModelError> {
        Self::new(vec![Rational::one(); count], vec![Rational::one(); count])
    }

    pub fn with_release(mut self, release: Vec<Rational>) -> Result<Self, ModelError> {
        if release.len() != self.v_comm.len() {
            return Err(ModelError::Loads(format!("expected {} release dates, got {}", self.v_comm.len(), release.len())));
        }
        if release.iter().any(Signed::is_negative) {
            return Err(ModelError::Loads("release dates must be >= 0".into()));
        }
        self.release = Some(release);
        Ok(self)
    }

    pub fn count(&self) -> usize {
        self.v_comm.len()
    }

    pub fn v_comm(&self) -> &[Rational] {
        &self.v_comm
    }

    pub fn v_comp(&self) -> &[Rational] {
        &self.v_comp
    }

    pub fn release(&self) -> Option<&[Rational]> {
        self.release.as_deref()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstallmentPlan {
    q: Vec<usize>,
}

impl InstallmentPlan {
    pub fn new(q: Vec<usize>) -> Result<Self, ModelError> {
        if q.is_empty() {
            return Err(ModelError::Plan("empty plan".into()));
        }
        if q.contains(&0) {
            return Err(ModelError::Plan("every load needs at least one installment".into()));
        }
        Ok(Self { q })
    }

    pub fn uniform(loads: usize, q: usize) -> Result<Self, ModelError> {
        Self::new(vec![q; loads])
    }

    pub fn q(&self) -> &[usize] {
        &self.q
    }

    pub fn total(&self) -> usize {
        self.q.iter().sum()
    }
}

/// A platform, a load set and a plan that agree with each other.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub platform: Platform,
    pub loads: LoadSet,
    pub plan: InstallmentPlan,
}

impl Instance {
    pub fn new(platform: Platform, loads: LoadSet, plan: InstallmentPlan) -> Result<Self, ModelError> {
        if plan.q().len() != loads.count() {
            return Err(ModelError::Dimension(format!(
                "plan covers {} loads, load set has {}",
                plan.q().len(),
                loads.count()
            )));
        }
        if let ComputeSpeeds::Unrelated(w) = platform.speeds() {
            if w[0].len() != loads.count() {
                return Err(ModelError::Dimension(format!(
                    "unrelated compute matrix has {} columns for {} loads",
                    w[0].len(),
                    loads.count()
                )));
            }
        }
        Ok(Self { platform, loads, plan })
    }

    pub fn with_plan(&self, plan: InstallmentPlan) -> Result<Self, ModelError> {
        Self::new(self.platform.clone(), self.loads.clone(), plan)
    }

    pub fn m(&self) -> usize {
        self.platform.m()
    }

    pub fn loads(&self) -> usize {
        self.loads.count()
    }

    pub fn q(&self, n: usize) -> usize {
        self.plan.q()[n]
    }

    /// A zero table shaped `[n][j][width]` for this plan.
    pub fn table(&self, width: usize) -> PerInstallment<Rational> {
        self.plan.q().iter().map(|&q| vec![vec![Rational::zero(); width]; q]).collect()
    }

    /// Every load computed entirely on `P1` in its first installment.
    pub fn all_local_fractions(&self) -> PerInstallment<Rational> {
        let mut gamma = self.table(self.m());
        for load in &mut gamma {
            load[0][0] = Rational::one();
        }
        gamma
    }
}

/// A complete timeline: fractions plus start and end instants of every
/// communication and computation.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// `gamma[n][j][i]`: fraction of load `n` computed by processor `i`
    /// during installment `j`.
    pub gamma: PerInstallment<Rational>,
    /// `[n][j][l]`: transfer over link `l` (processor `l` to `l + 1`).
    pub comm_start: PerInstallment<Rational>,
    pub comm_end: PerInstallment<Rational>,
    /// `[n][j][i]`: computation on processor `i`.
    pub comp_start: PerInstallment<Rational>,
    pub comp_end: PerInstallment<Rational>,
    pub makespan: Rational,
}

impl Schedule {
    pub fn loads(&self) -> usize {
        self.gamma.len()
    }

    pub fn processors(&self) -> usize {
        self.gamma.first().and_then(|l| l.first()).map_or(0, Vec::len)
    }

    /// The installment counts implied by the fraction table.
    pub fn plan(&self) -> Result<InstallmentPlan, ModelError> {
        InstallmentPlan::new(self.gamma.iter().map(Vec::len).collect())
    }

    /// Completion time of the last installment of the last load, maximized
    /// over processors.
    pub fn final_completion(&self) -> Rational {
        match self.loads() {
            0 => Rational::zero(),
            n => self.load_completion(n - 1),
        }
    }

    /// Completion time of load `n` on the slowest processor.
    pub fn load_completion(&self, n: usize) -> Rational {
        self.comp_end[n].last().and_then(|ce| ce.iter().cloned().max()).unwrap_or_else(Rational::zero)
    }

    /// Total fraction of load `n` assigned to processor `i`.
    pub fn share(&self, n: usize, i: usize) -> Rational {
        self.gamma[n].iter().map(|row| &row[i]).sum()
    }

    /// Fraction of load `n` carried by installment `j`, over all processors.
    pub fn installment_size(&self, n: usize, j: usize) -> Rational {
        self.gamma[n][j].iter().sum()
    }
}

/// The value of the `makespan` field.
pub fn makespan(s: &Schedule) -> Rational {
    s.makespan.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn platform_checks_invariants() {
        assert!(Platform::new(vec![], vec![], vec![]).is_err());
        assert!(Platform::new(vec![int(1)], vec![int(1)], vec![int(0)]).is_err());
        assert!(Platform::new(vec![int(0)], vec![], vec![int(0)]).is_err());
        assert!(Platform::new(vec![int(1), int(1)], vec![int(0)], vec![int(0), int(0)]).is_err());
        assert!(Platform::new(vec![int(1)], vec![], vec![int(-1)]).is_err());
        let p = Platform::new(vec![int(1), ratio(1, 2)], vec![int(3)], vec![int(0), int(2)]).unwrap();
        assert_eq!(p.m(), 2);
        assert_eq!(p.w(1, 5), &ratio(1, 2));
    }

    #[test]
    fn unrelated_matrix_must_match_load_count() {
        let p = Platform::unrelated(vec![vec![int(1), int(2)], vec![int(3), int(4)]], vec![int(1)], vec![int(0); 2]).unwrap();
        assert_eq!(p.w(1, 0), &int(3));
        let loads = LoadSet::unit(3).unwrap();
        let plan = InstallmentPlan::uniform(3, 1).unwrap();
        assert!(matches!(Instance::new(p.clone(), loads, plan), Err(ModelError::Dimension(_))));
        assert!(Instance::new(p, LoadSet::unit(2).unwrap(), InstallmentPlan::uniform(2, 1).unwrap()).is_ok());
    }

    #[test]
    fn loads_and_plans_check_invariants() {
        assert!(LoadSet::new(vec![], vec![]).is_err());
        assert!(LoadSet::new(vec![int(1)], vec![int(0)]).is_err());
        assert!(LoadSet::unit(2).unwrap().with_release(vec![int(1)]).is_err());
        assert!(LoadSet::unit(1).unwrap().with_release(vec![int(-1)]).is_err());
        assert!(InstallmentPlan::new(vec![1, 0]).is_err());
        assert_eq!(InstallmentPlan::new(vec![2, 3]).unwrap().total(), 5);
    }
}
