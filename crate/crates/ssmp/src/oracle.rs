//! Exhaustive reference oracles for small instances.
//!
//! Both walk the full search space and exist to pin down ground truth in
//! tests and tiny CLI runs; the guards reject anything big enough to hurt.

use crate::deadline::{Deadline, SolveError};
use crate::greedy::{DecisionOutcome, DecisionSolver};
use crate::instance::{Instance, Match, Solution};
use crate::subset::Subset;

/// Largest `M + N` the pairwise subset enumeration will accept.
pub const DECISION_LIMIT: usize = 24;

/// Largest `M + N` the optimal label enumeration will accept.
pub const OPTIMAL_LIMIT: usize = 10;

/// Try every non-empty `(w, v)` pair in ascending mask order and return the
/// first valid match.
pub fn decision_oracle(instance: &Instance) -> Result<DecisionOutcome, SolveError> {
    let size = instance.m() + instance.n();
    if size > DECISION_LIMIT {
        return Err(SolveError::TooLargeForOracle { size, limit: DECISION_LIMIT });
    }
    let a_sums = all_subset_sums(instance.a());
    let b_sums = all_subset_sums(instance.b());
    let eps = instance.epsilon();
    for (w, &sa) in a_sums.iter().enumerate().skip(1) {
        for (v, &sb) in b_sums.iter().enumerate().skip(1) {
            if (sa - sb).abs() <= eps {
                let m = Match {
                    w: Subset::from_bits(instance.m(), w as u128),
                    v: Subset::from_bits(instance.n(), v as u128),
                };
                debug_assert!(instance.is_valid_match(&m));
                return Ok(DecisionOutcome::Match(m));
            }
        }
    }
    Ok(DecisionOutcome::NoMatch)
}

/// Sums for every mask over `values`; `out[m]` reuses `out[m without lowest bit]`.
fn all_subset_sums(values: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; 1 << values.len()];
    for mask in 1..out.len() {
        let low = mask.trailing_zeros() as usize;
        out[mask] = out[mask & (mask - 1)] + values[low];
    }
    out
}

/// Exhaustive maximization of the objective. Every element is assigned
/// either "unmatched" or a match label; labels are introduced in first-use
/// order so permuted labelings are visited once.
pub fn optimal_oracle(instance: &Instance, k_weight: i64) -> Result<(i64, Solution), SolveError> {
    let size = instance.m() + instance.n();
    if size > OPTIMAL_LIMIT {
        return Err(SolveError::TooLargeForOracle { size, limit: OPTIMAL_LIMIT });
    }
    let k_max = instance.m().min(instance.n());
    let mut labels = vec![0usize; size];
    let mut best: Option<(i64, Solution)> = None;
    assign(instance, k_weight, k_max, &mut labels, 0, 0, &mut best);
    Ok(best.unwrap_or((0, Solution::empty())))
}

fn assign(
    instance: &Instance,
    k_weight: i64,
    k_max: usize,
    labels: &mut [usize],
    pos: usize,
    used: usize,
    best: &mut Option<(i64, Solution)>,
) {
    if pos == labels.len() {
        if let Some((psi, solution)) = score(instance, k_weight, labels, used) {
            if best.as_ref().map_or(true, |(b, _)| psi > *b) {
                *best = Some((psi, solution));
            }
        }
        return;
    }
    let top = (used + 1).min(k_max);
    for label in 0..=top {
        labels[pos] = label;
        assign(instance, k_weight, k_max, labels, pos + 1, used.max(label), best);
    }
    labels[pos] = 0;
}

/// Feasibility check plus objective for one complete labeling; `None` when
/// some slot is empty on a side or out of tolerance.
fn score(
    instance: &Instance,
    k_weight: i64,
    labels: &[usize],
    used: usize,
) -> Option<(i64, Solution)> {
    let m = instance.m();
    let mut matches = Vec::with_capacity(used);
    for slot in 1..=used {
        let mut w = Subset::empty(m);
        let mut v = Subset::empty(instance.n());
        for (t, &label) in labels.iter().enumerate() {
            if label == slot {
                if t < m {
                    w.insert(t);
                } else {
                    v.insert(t - m);
                }
            }
        }
        let mt = Match { w, v };
        if !instance.is_valid_match(&mt) {
            return None;
        }
        matches.push(mt);
    }
    let solution = Solution { matches };
    let psi = instance.objective(&solution, k_weight).expect("slots are disjoint by construction");
    Some((psi, solution))
}

/// The decision oracle as a plug-in decision solver, mostly so the greedy
/// loop has a trusted reference implementation in tests.
pub struct DecisionOracle;

impl DecisionSolver for DecisionOracle {
    fn solve_decision(
        &self,
        instance: &Instance,
        deadline: &Deadline,
    ) -> Result<DecisionOutcome, SolveError> {
        deadline.check()?;
        decision_oracle(instance)
    }

    fn name(&self) -> &'static str {
        "oracle"
    }
}
