//! Depth-first branch-and-bound over slot assignments.
//!
//! Elements are considered in a fixed order, all of `a` then all of `b`;
//! each is either left unmatched or placed in a slot. Slots open in
//! first-use order and only while `a` elements remain, which removes slot
//! permutations from the tree the same way the model's ordering rows do.
//! The bound assumes every remaining element can still be matched and every
//! remaining opening used, so pruning is sound for maximization.

use std::time::Instant;

use crate::deadline::{Deadline, SolveError};
use crate::instance::{Instance, Match, Solution};
use crate::subset::Subset;

pub struct BbOutcome {
    pub solution: Solution,
    pub psi: i64,
    /// The tree was exhausted; the result is proved best.
    pub optimal: bool,
    /// `(seconds since start, measure)` every time the incumbent improved,
    /// including the starting point.
    pub incumbents: Vec<(f64, i64)>,
}

pub fn branch_and_bound(
    instance: &Instance,
    deadline: &Deadline,
    warm_start: Option<&Solution>,
) -> Result<BbOutcome, SolveError> {
    let mut search = Search::new(instance, deadline);
    if let Some(s) = warm_start {
        if let Err(v) = instance.check_solution(s) {
            return Err(SolveError::BadWarmStart(format!("{v:?}")));
        }
        search.best = labels_of(instance, s);
        search.best_psi = instance.psi(s).expect("checked feasible");
    }
    search.incumbents.push((0.0, search.best_psi));
    search.dfs(0);
    let solution = solution_of(instance, &search.best);
    debug_assert!(instance.check_solution(&solution).is_ok());
    Ok(BbOutcome {
        psi: search.best_psi,
        solution,
        optimal: !search.timed_out,
        incumbents: search.incumbents,
    })
}

/// Per-element slot labels: 0 is unmatched, `s + 1` is slot `s`. Positions
/// `0..m` are the `a` side, `m..m+n` the `b` side.
fn labels_of(instance: &Instance, s: &Solution) -> Vec<usize> {
    let mut labels = vec![0usize; instance.m() + instance.n()];
    for (slot, mat) in s.matches.iter().enumerate() {
        for i in mat.w.indices() {
            labels[i] = slot + 1;
        }
        for j in mat.v.indices() {
            labels[instance.m() + j] = slot + 1;
        }
    }
    labels
}

fn solution_of(instance: &Instance, labels: &[usize]) -> Solution {
    let slots = labels.iter().max().copied().unwrap_or(0);
    let mut matches =
        vec![Match { w: Subset::empty(instance.m()), v: Subset::empty(instance.n()) }; slots];
    for (pos, &label) in labels.iter().enumerate() {
        if label == 0 {
            continue;
        }
        let mat = &mut matches[label - 1];
        if pos < instance.m() {
            mat.w.insert(pos);
        } else {
            mat.v.insert(pos - instance.m());
        }
    }
    matches.retain(|m| !m.w.is_empty() || !m.v.is_empty());
    Solution { matches }
}

struct Search<'a> {
    instance: &'a Instance,
    deadline: &'a Deadline,
    k_max: usize,
    total: usize,
    labels: Vec<usize>,
    slot_diff: Vec<i128>,
    slot_a: Vec<u32>,
    slot_b: Vec<u32>,
    used: usize,
    matched: usize,
    /// Open slots still waiting for a `b` element.
    missing_b: usize,
    best_psi: i64,
    best: Vec<usize>,
    incumbents: Vec<(f64, i64)>,
    start: Instant,
    nodes: u64,
    timed_out: bool,
}

impl<'a> Search<'a> {
    fn new(instance: &'a Instance, deadline: &'a Deadline) -> Self {
        let k_max = instance.m().min(instance.n());
        let total = instance.m() + instance.n();
        Search {
            instance,
            deadline,
            k_max,
            total,
            labels: vec![0; total],
            slot_diff: vec![0; k_max],
            slot_a: vec![0; k_max],
            slot_b: vec![0; k_max],
            used: 0,
            matched: 0,
            missing_b: 0,
            best_psi: 0,
            best: vec![0; total],
            incumbents: Vec::new(),
            start: Instant::now(),
            nodes: 0,
            timed_out: false,
        }
    }

    fn dfs(&mut self, depth: usize) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes & 4095 == 0 && self.deadline.expired() {
            self.timed_out = true;
            return;
        }

        let m = self.instance.m();
        let rem_a = m.saturating_sub(depth);
        let rem_b = if depth <= m { self.instance.n() } else { self.total - depth };
        if self.missing_b > rem_b {
            return; // some open slot can no longer get a b element
        }
        let remaining = self.total - depth;
        let openable = self.k_max.min(self.used + rem_a.min(rem_b));
        let upper = (self.matched + remaining + openable) as i64;
        if upper <= self.best_psi {
            return;
        }

        if depth == self.total {
            self.take_leaf();
            return;
        }

        let is_a = depth < m;
        let value = if is_a {
            self.instance.a()[depth] as i128
        } else {
            -(self.instance.b()[depth - m] as i128)
        };

        for slot in 0..self.used {
            self.place(depth, slot, is_a, value);
            self.dfs(depth + 1);
            self.unplace(depth, slot, is_a, value);
        }
        if is_a && self.used < self.k_max {
            let slot = self.used;
            self.used += 1;
            self.missing_b += 1;
            self.place(depth, slot, is_a, value);
            self.dfs(depth + 1);
            self.unplace(depth, slot, is_a, value);
            self.missing_b -= 1;
            self.used -= 1;
        }
        self.dfs(depth + 1); // leave unmatched
    }

    fn place(&mut self, depth: usize, slot: usize, is_a: bool, value: i128) {
        self.labels[depth] = slot + 1;
        self.slot_diff[slot] += value;
        if is_a {
            self.slot_a[slot] += 1;
        } else {
            if self.slot_b[slot] == 0 {
                self.missing_b -= 1;
            }
            self.slot_b[slot] += 1;
        }
        self.matched += 1;
    }

    fn unplace(&mut self, depth: usize, slot: usize, is_a: bool, value: i128) {
        self.labels[depth] = 0;
        self.slot_diff[slot] -= value;
        if is_a {
            self.slot_a[slot] -= 1;
        } else {
            self.slot_b[slot] -= 1;
            if self.slot_b[slot] == 0 {
                self.missing_b += 1;
            }
        }
        self.matched -= 1;
    }

    fn take_leaf(&mut self) {
        let eps = self.instance.epsilon() as i128;
        for slot in 0..self.used {
            if self.slot_a[slot] == 0 || self.slot_b[slot] == 0 || self.slot_diff[slot].abs() > eps
            {
                return;
            }
        }
        let psi = (self.matched + self.used) as i64;
        if psi > self.best_psi {
            self.best_psi = psi;
            self.best.copy_from_slice(&self.labels);
            self.incumbents.push((self.start.elapsed().as_secs_f64(), psi));
        }
    }
}
