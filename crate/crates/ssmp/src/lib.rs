//! Subset-sum matching toolkit.
//!
//! Given two lists of non-zero fixed-point amounts and a tolerance, find
//! disjoint pairs of subsets whose sums agree within the tolerance, and
//! prefer solutions that cover many elements with many small matches.
//!
//! The crate provides the instance model, exhaustive oracles for small
//! instances, two polynomial-space heuristics (a meet-in-the-middle split
//! search and a pseudo-polynomial table scan, both driven by a greedy outer
//! loop), an exact 0-1 programming formulation with a built-in
//! branch-and-bound plus an external-solver escape hatch, and a seeded
//! benchmark instance generator.

pub mod amount;
pub mod benchgen;
pub mod deadline;
pub mod dp;
pub mod exact;
pub mod greedy;
pub mod instance;
pub mod oracle;
pub mod search;
pub mod subset;

pub use amount::{format_amount, parse_amount, Amount, ParseAmountError};
pub use benchgen::{generate, generate_one, Family, GenConfig};
pub use deadline::{Deadline, SolveError};
pub use dp::{
    backtrack_subsets, discretize_reorganize, matched_sums, tabulate, DpConfig, DpSolver, DpTable,
    IndexMask, MatchedSums, ReorgProblem,
};
pub use exact::{
    build_model, encode_warm_start, solve_exact, Backend, ExactConfig, ExactResult, ExactStatus,
    ExternalBackend, MilpModel,
};
pub use greedy::{greedy_solve, DecisionOutcome, DecisionSolver, GreedyResult, GreedyStatus};
pub use instance::{
    Instance, InstanceError, InvalidReason, Match, Residual, Side, Solution, Violation,
};
pub use oracle::{decision_oracle, optimal_oracle, DecisionOracle};
pub use search::{SearchConfig, SearchSolver, SplitCache, SubsetOrder};
pub use subset::{Subset, MAX_SIDE};
