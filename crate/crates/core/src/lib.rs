//! Optimal divisible-load schedules on heterogeneous linear processor chains.
//!
//! A chain `P1 - ... - Pm` receives `N` divisible loads on `P1`; each load is
//! forwarded hop by hop in a prescribed number of installments under the
//! one-port model. For a fixed installment plan, [`lp::optimal_schedule`]
//! builds the scheduling linear program and solves it with an exact rational
//! simplex. [`reference`] holds closed forms for the two-processor example
//! used to show that load-by-load heuristics can fail, and [`refine`] the
//! installment splitting that shows more installments always help under a
//! linear cost model.

pub mod cli;
pub mod error;
pub mod gantt;
pub mod lp;
pub mod model;
pub mod rational;
pub mod reference;
pub mod refine;
pub mod scenario;

pub use error::ModelError;
pub use model::{Instance, InstallmentPlan, LoadSet, Platform, Schedule};
pub use rational::Rational;
