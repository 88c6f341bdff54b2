//! Constrained Bayesian optimization benchmark suite: a catalog of
//! deterministic test functions with box domains and inequality
//! constraints, a Gaussian-process optimizer driven by expected
//! (feasible) improvement, and a seeded Monte Carlo harness with
//! R-compatible six-number summaries.

pub mod acquisition;
pub mod bench;
pub mod gp;
pub mod optimizer;
pub mod testfuns;

pub use acquisition::{efi, expected_improvement, prob_feasible, Incumbent};
pub use bench::{run_reps, summarize, BenchSummary};
pub use gp::{FitConfig, GpModel, PredictiveMoments};
pub use optimizer::{best_feasible, lhs_design, run, BestFeasible, Trace};
pub use testfuns::{evaluate, list_functions, lookup, BoxDomain, Evaluation, FunctionSpec};
