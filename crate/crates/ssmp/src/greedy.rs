//! Greedy outer loop.
//!
//! Repeatedly asks a decision solver for one match on the residual instance,
//! commits it, and removes the matched elements. Stops when the solver
//! reports no match, a side runs empty, or the deadline expires (keeping the
//! partial solution).

use crate::deadline::{Deadline, SolveError};
use crate::instance::{Instance, Match, Solution};
use crate::subset::Subset;

/// Outcome of a single find-one-match query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecisionOutcome {
    Match(Match),
    NoMatch,
}

/// A solver answering "is there any single valid match in this instance?".
pub trait DecisionSolver {
    fn solve_decision(
        &self,
        instance: &Instance,
        deadline: &Deadline,
    ) -> Result<DecisionOutcome, SolveError>;

    fn name(&self) -> &'static str;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreedyStatus {
    Completed,
    TimedOut,
}

#[derive(Clone, Debug)]
pub struct GreedyResult {
    pub solution: Solution,
    pub status: GreedyStatus,
    /// Loop passes, including the final one that found nothing.
    pub iterations: usize,
}

pub fn greedy_solve(
    instance: &Instance,
    solver: &dyn DecisionSolver,
    deadline: &Deadline,
) -> Result<GreedyResult, SolveError> {
    let mut solution = Solution::empty();
    let mut residual = instance.clone();
    // residual index -> original index, composed across removals
    let mut a_map: Vec<usize> = (0..instance.m()).collect();
    let mut b_map: Vec<usize> = (0..instance.n()).collect();
    let mut iterations = 0;

    let status = loop {
        iterations += 1;
        if residual.m() == 0 || residual.n() == 0 {
            // no pair can be formed; the solver would only confirm that
            break GreedyStatus::Completed;
        }
        if deadline.expired() {
            break GreedyStatus::TimedOut;
        }
        match solver.solve_decision(&residual, deadline) {
            Ok(DecisionOutcome::Match(m)) => {
                let original = Match {
                    w: translate(&m.w, &a_map, instance.m()),
                    v: translate(&m.v, &b_map, instance.n()),
                };
                debug_assert!(instance.is_valid_match(&original));
                solution.matches.push(original);
                let r = residual
                    .remove_matched(&Solution { matches: vec![m] })
                    .expect("decision solvers return valid matches");
                a_map = r.a_map.iter().map(|&i| a_map[i]).collect();
                b_map = r.b_map.iter().map(|&i| b_map[i]).collect();
                residual = r.instance;
            }
            Ok(DecisionOutcome::NoMatch) => break GreedyStatus::Completed,
            Err(SolveError::TimedOut) => break GreedyStatus::TimedOut,
            Err(e) => return Err(e),
        }
    };

    Ok(GreedyResult { solution, status, iterations })
}

fn translate(subset: &Subset, map: &[usize], original_len: usize) -> Subset {
    Subset::from_indices(original_len, subset.indices().map(|i| map[i]))
}
