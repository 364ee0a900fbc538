//! Exact optimization of the full matching measure.
//!
//! The problem is encoded as a mixed-integer model ([`model`]) and solved
//! either by the built-in branch-and-bound ([`bb`]) or by an external
//! LP-file solver ([`external`]). Either way the result is decoded back
//! into a validated [`Solution`] with a status saying how far the proof got.

pub mod bb;
pub mod external;
pub mod model;

use std::time::Instant;

use crate::deadline::{Deadline, SolveError};
use crate::instance::{Instance, Solution};

pub use bb::{branch_and_bound, BbOutcome};
pub use external::{ExternalBackend, BACKEND_ARGS_ENV, BACKEND_ENV};
pub use model::{
    build_model, encode_warm_start, parse_solution_listing, write_mst, Constraint, MilpModel, Sense,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactStatus {
    /// Search finished; the solution is proved best.
    Optimal,
    /// Deadline hit with a feasible solution in hand.
    FeasibleIncumbent,
    /// Deadline hit before any solution was produced (external backends
    /// only; the internal search always holds at least the empty solution).
    TimedOutNoIncumbent,
}

pub struct ExactResult {
    pub status: ExactStatus,
    pub solution: Solution,
    /// Measure of `solution`.
    pub psi: i64,
    /// Proven upper bound when available; equals `psi` iff optimal.
    pub bound: Option<i64>,
    /// Incumbent improvements as `(seconds, measure)` pairs.
    pub incumbents: Vec<(f64, i64)>,
}

#[derive(Clone, Debug, Default)]
pub enum Backend {
    #[default]
    Internal,
    External(ExternalBackend),
}

#[derive(Clone, Debug)]
pub struct ExactConfig {
    pub symmetry_breaking: bool,
    pub backend: Backend,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig { symmetry_breaking: true, backend: Backend::Internal }
    }
}

impl ExactConfig {
    /// Default config, but using the externally configured solver when the
    /// environment names one.
    pub fn from_env() -> Self {
        ExactConfig {
            backend: match ExternalBackend::from_env() {
                Some(b) => Backend::External(b),
                None => Backend::Internal,
            },
            ..ExactConfig::default()
        }
    }
}

pub fn solve_exact(
    instance: &Instance,
    config: &ExactConfig,
    deadline: &Deadline,
    warm_start: Option<&Solution>,
) -> Result<ExactResult, SolveError> {
    if instance.m() == 0 || instance.n() == 0 {
        return Ok(ExactResult {
            status: ExactStatus::Optimal,
            solution: Solution::empty(),
            psi: 0,
            bound: Some(0),
            incumbents: vec![(0.0, 0)],
        });
    }
    match &config.backend {
        Backend::Internal => {
            let out = bb::branch_and_bound(instance, deadline, warm_start)?;
            Ok(ExactResult {
                status: if out.optimal {
                    ExactStatus::Optimal
                } else {
                    ExactStatus::FeasibleIncumbent
                },
                bound: out.optimal.then_some(out.psi),
                psi: out.psi,
                solution: out.solution,
                incumbents: out.incumbents,
            })
        }
        Backend::External(backend) => {
            solve_external(instance, config, backend, deadline, warm_start)
        }
    }
}

fn solve_external(
    instance: &Instance,
    config: &ExactConfig,
    backend: &ExternalBackend,
    deadline: &Deadline,
    warm_start: Option<&Solution>,
) -> Result<ExactResult, SolveError> {
    let started = Instant::now();
    let milp = model::build_model(instance, config.symmetry_breaking);
    let warm_assignment = match warm_start {
        Some(s) => Some(model::encode_warm_start(&milp, s)?),
        None => None,
    };
    let warm_psi = warm_start.map(|s| instance.psi(s).expect("warm start checked"));

    match backend.run(&milp, warm_assignment.as_deref(), deadline)? {
        Some((optimal, assignment)) => {
            milp.check_assignment(&assignment)
                .map_err(|e| SolveError::Backend(format!("infeasible point returned: {e}")))?;
            let solution = milp.decode(&assignment);
            assert!(
                instance.check_solution(&solution).is_ok(),
                "model feasibility must imply solution feasibility"
            );
            let psi = instance.psi(&solution).expect("just checked");
            debug_assert_eq!(psi, milp.objective_of(&assignment));
            if let Some(floor) = warm_psi {
                if optimal && psi < floor {
                    return Err(SolveError::Backend(format!(
                        "claimed optimum {psi} is below the warm start {floor}"
                    )));
                }
                if psi < floor {
                    // keep the better incumbent we already hold
                    return Ok(ExactResult {
                        status: ExactStatus::FeasibleIncumbent,
                        solution: warm_start.unwrap().clone(),
                        psi: floor,
                        bound: None,
                        incumbents: vec![(started.elapsed().as_secs_f64(), floor)],
                    });
                }
            }
            Ok(ExactResult {
                status: if optimal { ExactStatus::Optimal } else { ExactStatus::FeasibleIncumbent },
                bound: optimal.then_some(psi),
                psi,
                solution,
                incumbents: vec![(started.elapsed().as_secs_f64(), psi)],
            })
        }
        None => match warm_start {
            // no incumbent from the backend, but the warm start still stands
            Some(s) => Ok(ExactResult {
                status: ExactStatus::FeasibleIncumbent,
                psi: warm_psi.unwrap(),
                solution: s.clone(),
                bound: None,
                incumbents: vec![(started.elapsed().as_secs_f64(), warm_psi.unwrap())],
            }),
            None => Ok(ExactResult {
                status: ExactStatus::TimedOutNoIncumbent,
                solution: Solution::empty(),
                psi: 0,
                bound: None,
                incumbents: Vec::new(),
            }),
        },
    }
}
