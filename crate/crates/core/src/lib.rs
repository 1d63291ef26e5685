//! Exact-arithmetic policy iteration for discounted robust MDPs and robust
//! Markov chains with `L1` and `L_inf` uncertainty balls.
//!
//! Every number in the solvers is a [`Rational`]. Policy evaluation uses
//! fraction-free elimination, the adversary's inner problem is solved by the
//! sort-and-transfer oracles, and the recorded traces can be checked against
//! the convergence inequalities in [`diagnostics`].

pub mod benchmarks;
pub mod bounds;
pub mod diagnostics;
pub mod error;
pub mod format;
pub mod linalg;
pub mod model;
pub mod oracles;
pub mod rational;
pub mod reduction;
pub mod rmc_pi;
pub mod rmdp_pi;

pub use benchmarks::{BenchmarkKind, BenchmarkSpec};
pub use diagnostics::{verify_rmdp_trace, verify_trace, Report};
pub use error::{Error, Result};
pub use format::{model_to_json, parse_model};
pub use model::{
    build_batch_rmc, induce_rmc, validate_rmdp, AdversaryPolicy, AgentPolicy, BatchRmc, Norm, Rmc,
    Rmdp, Transition, UncertaintySet, ValueVector, Violation,
};
pub use rational::Rational;
pub use reduction::{build_root_sum_gadget, decide_root_sum, Decision, GadgetInstance};
pub use rmc_pi::{rmc_policy_iteration, RmcSolveTrace};
pub use rmdp_pi::{rmdp_policy_iteration, ImprovementMode, RmdpSolveTrace};
