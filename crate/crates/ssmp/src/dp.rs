//! Pseudo-polynomial decision solver.
//!
//! Amounts are scaled by `rho`, rounded, and reorganized into two lists of
//! positive integers: `eta` takes the positive scaled `a` entries and the
//! negated negative `b` entries, `lambda` the rest. A match in the original
//! instance corresponds to a pair of subsets, one per list, whose sums land
//! within `bar_eps` of each other; `bar_eps` widens the tolerance enough to
//! absorb every rounding error, so no original match is lost.
//!
//! Reachable subset sums are tabulated per list in boolean tables (packed
//! bit rows). The scan walks sum pairs `(i, j)` by ascending deviation,
//! backtracks the subsets behind each sum, and validates candidate pairs
//! against the original amounts. When the inputs are integers and `rho = 1`
//! the discretization is lossless and candidates need no validation.

use crate::amount::{div_ceil, div_round_half_away, pow10};
use crate::deadline::{Deadline, SolveError};
use crate::greedy::{DecisionOutcome, DecisionSolver};
use crate::instance::{Instance, Match, Side};
use crate::subset::Subset;

/// Default cap on `rows x cols` per reachability table.
pub const DEFAULT_TABLE_CELLS: u64 = 1 << 31;

/// Subsets collected per side of a sum pair before candidate streaming
/// falls back to exhaustive nested iteration.
const COLLECT_CAP: usize = 4096;

#[derive(Clone, Copy, Debug)]
pub struct DpConfig {
    /// Discretization scale; higher values keep more precision and grow the
    /// tables linearly.
    pub rho: i64,
    pub max_table_cells: u64,
    /// Validate candidates even when the discretization is lossless.
    /// Testing aid; the shortcut and the full check must agree.
    pub force_general: bool,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig { rho: 1, max_table_cells: DEFAULT_TABLE_CELLS, force_general: false }
    }
}

impl DpConfig {
    pub fn with_rho(rho: i64) -> Self {
        DpConfig { rho, ..DpConfig::default() }
    }

    /// Scale used when the caller does not pick one: integers scan exactly at
    /// `rho = 1`; real amounts keep one extra digit for loose tolerances and
    /// full input precision when the tolerance is exact.
    pub fn default_rho(instance: &Instance) -> i64 {
        if instance.digits() == 0 {
            1
        } else if instance.epsilon() == 0 {
            10_000
        } else if instance.epsilon() >= pow10(instance.digits()) {
            1
        } else {
            10
        }
    }
}

/// Index set over a reorganized list (up to 256 entries).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexMask([u64; 4]);

impl IndexMask {
    pub fn empty() -> Self {
        IndexMask::default()
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut m = IndexMask::default();
        for i in indices {
            m.set(i);
        }
        m
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < 256);
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < 256 && self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn intersects(&self, other: &IndexMask) -> bool {
        (0..4).any(|k| self.0[k] & other.0[k] != 0)
    }

    pub fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            std::iter::successors(Some(w), |&w| (w != 0).then(|| w & (w - 1)))
                .take_while(|&w| w != 0)
                .map(move |w| k * 64 + w.trailing_zeros() as usize)
        })
    }
}

/// The discretized, sign-sorted form of an instance.
pub struct ReorgProblem {
    pub eta: Vec<i64>,
    pub lambda: Vec<i64>,
    /// Original element behind each `eta` position.
    pub eta_origin: Vec<(Side, usize)>,
    pub lambda_origin: Vec<(Side, usize)>,
    /// Widened tolerance on discretized sums.
    pub bar_eps: i64,
    pub rho: i64,
    /// Discretization introduced no rounding error (integers, `rho = 1`).
    pub exact: bool,
    /// Elements whose scaled value rounded to zero; they are left out of the
    /// lists and can never appear in a returned match.
    pub dropped: Vec<(Side, usize)>,
    // cached per-entry data for candidate validation
    eta_units: Vec<i64>,
    lambda_units: Vec<i64>,
    eta_a: IndexMask,
    eta_b: IndexMask,
    lambda_a: IndexMask,
    lambda_b: IndexMask,
}

pub fn discretize_reorganize(instance: &Instance, rho: i64) -> ReorgProblem {
    assert!(rho >= 1, "scale must be positive");
    let p10 = pow10(instance.digits()) as i128;
    let scale = |units: i64| div_round_half_away(rho as i128 * units as i128, p10) as i64;

    let mut r = ReorgProblem {
        eta: Vec::new(),
        lambda: Vec::new(),
        eta_origin: Vec::new(),
        lambda_origin: Vec::new(),
        bar_eps: 0,
        rho,
        exact: instance.digits() == 0 && rho == 1,
        dropped: Vec::new(),
        eta_units: Vec::new(),
        lambda_units: Vec::new(),
        eta_a: IndexMask::empty(),
        eta_b: IndexMask::empty(),
        lambda_a: IndexMask::empty(),
        lambda_b: IndexMask::empty(),
    };

    // contribution of an element to w.a - v.b when its entry is selected
    for (m, &x) in instance.a().iter().enumerate() {
        let v = scale(x);
        if v == 0 {
            r.dropped.push((Side::A, m));
        } else if v > 0 {
            r.eta_a.set(r.eta.len());
            r.eta.push(v);
            r.eta_origin.push((Side::A, m));
            r.eta_units.push(x);
        } else {
            r.lambda_a.set(r.lambda.len());
            r.lambda.push(-v);
            r.lambda_origin.push((Side::A, m));
            r.lambda_units.push(x);
        }
    }
    for (n, &x) in instance.b().iter().enumerate() {
        let v = scale(x);
        if v == 0 {
            r.dropped.push((Side::B, n));
        } else if v > 0 {
            r.lambda_b.set(r.lambda.len());
            r.lambda.push(v);
            r.lambda_origin.push((Side::B, n));
            r.lambda_units.push(-x);
        } else {
            r.eta_b.set(r.eta.len());
            r.eta.push(-v);
            r.eta_origin.push((Side::B, n));
            r.eta_units.push(-x);
        }
    }

    r.bar_eps = if r.exact {
        instance.epsilon()
    } else {
        // ceil(rho * eps + (M + N) / 2) with eps in original units
        let num = 2 * rho as i128 * instance.epsilon() as i128
            + (instance.m() + instance.n()) as i128 * p10;
        div_ceil(num, 2 * p10) as i64
    };
    r
}

impl ReorgProblem {
    /// Discretized sum pair an original match maps to. Dropped elements
    /// contribute nothing.
    pub fn sums_for_match(&self, m: &Match) -> (i64, i64) {
        let selected = |side: Side, idx: usize| match side {
            Side::A => m.w.contains(idx),
            Side::B => m.v.contains(idx),
        };
        let i = self
            .eta
            .iter()
            .zip(&self.eta_origin)
            .filter(|(_, &(side, idx))| selected(side, idx))
            .map(|(&v, _)| v)
            .sum();
        let j = self
            .lambda
            .iter()
            .zip(&self.lambda_origin)
            .filter(|(_, &(side, idx))| selected(side, idx))
            .map(|(&v, _)| v)
            .sum();
        (i, j)
    }

    /// Original-index match for a candidate subset pair.
    fn to_match(&self, p: &IndexMask, q: &IndexMask, m: usize, n: usize) -> Match {
        let mut w = Subset::empty(m);
        let mut v = Subset::empty(n);
        let mut place = |(side, idx): (Side, usize)| match side {
            Side::A => w.insert(idx),
            Side::B => v.insert(idx),
        };
        for i in p.indices() {
            place(self.eta_origin[i]);
        }
        for j in q.indices() {
            place(self.lambda_origin[j]);
        }
        Match { w, v }
    }

    /// `w.a - v.b` in original units for a candidate pair; exact arithmetic,
    /// this is the real validation behind the discretized scan.
    fn candidate_deviation(&self, p: &IndexMask, q: &IndexMask) -> i64 {
        let sum =
            |mask: &IndexMask, units: &[i64]| -> i64 { mask.indices().map(|i| units[i]).sum() };
        sum(p, &self.eta_units) + sum(q, &self.lambda_units)
    }

    fn sides_nonempty(&self, p: &IndexMask, q: &IndexMask) -> bool {
        let has_a = p.intersects(&self.eta_a) || q.intersects(&self.lambda_a);
        let has_b = p.intersects(&self.eta_b) || q.intersects(&self.lambda_b);
        has_a && has_b
    }
}

/// Reachability table: `reachable(k, i)` says some subset of the first `k`
/// values sums to `i`. Rows are packed bit vectors.
pub struct DpTable {
    values: Vec<i64>,
    width: usize,
    rows: Vec<Vec<u64>>,
}

pub fn tabulate(values: &[i64], x: i64, max_cells: u64) -> Result<DpTable, SolveError> {
    assert!(x >= 0);
    assert!(values.iter().all(|&v| v >= 1), "list entries must be positive");
    let width = x as usize + 1;
    let cells = (values.len() as u128 + 1) * width as u128;
    if cells > max_cells as u128 {
        return Err(SolveError::TableTooLarge { cells, budget: max_cells });
    }
    let words = width.div_ceil(64);
    let tail_mask = if width % 64 == 0 { u64::MAX } else { (1u64 << (width % 64)) - 1 };
    let mut rows = Vec::with_capacity(values.len() + 1);
    let mut row = vec![0u64; words];
    row[0] = 1; // the empty subset reaches zero
    rows.push(row);
    for (k, &v) in values.iter().enumerate() {
        let mut next = rows[k].clone();
        if (v as usize) < width {
            or_shifted(&mut next, &rows[k], v as usize);
            *next.last_mut().unwrap() &= tail_mask;
        }
        rows.push(next);
    }
    Ok(DpTable { values: values.to_vec(), width, rows })
}

/// `dst |= src << shift` over packed words.
fn or_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let ws = shift / 64;
    let bs = shift % 64;
    for i in ws..dst.len() {
        let mut bits = src[i - ws] << bs;
        if bs > 0 && i > ws {
            bits |= src[i - ws - 1] >> (64 - bs);
        }
        dst[i] |= bits;
    }
}

impl DpTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest representable sum.
    pub fn x(&self) -> i64 {
        self.width as i64 - 1
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// True when some subset of `values[..k]` sums to `i`.
    pub fn reachable(&self, k: usize, i: i64) -> bool {
        debug_assert!(i >= 0 && (i as usize) < self.width);
        let i = i as usize;
        self.rows[k][i / 64] >> (i % 64) & 1 == 1
    }

    pub fn reachable_full(&self, i: i64) -> bool {
        i >= 0 && (i as usize) < self.width && self.reachable(self.values.len(), i)
    }

    /// Columns with a set bit in the last row, ascending.
    pub fn reachable_sums(&self) -> impl Iterator<Item = i64> + '_ {
        let last = &self.rows[self.values.len()];
        last.iter().enumerate().flat_map(|(k, &w)| {
            std::iter::successors(Some(w), |&w| (w != 0).then(|| w & (w - 1)))
                .take_while(|&w| w != 0)
                .map(move |w| (k * 64 + w.trailing_zeros() as usize) as i64)
        })
    }

    /// Lazy enumeration of every subset that sums to `target`. Walks the
    /// table top-down, pruning on unreachable cells; a column of zero is a
    /// leaf since only all-skip can follow.
    pub fn subsets(&self, target: i64) -> SubsetIter<'_> {
        let mut stack = Vec::new();
        if self.reachable_full(target) {
            stack.push(Node {
                row: self.values.len(),
                col: target,
                taken: IndexMask::empty(),
                tried_skip: false,
            });
        }
        SubsetIter { table: self, stack }
    }
}

struct Node {
    row: usize,
    col: i64,
    taken: IndexMask,
    tried_skip: bool,
}

pub struct SubsetIter<'a> {
    table: &'a DpTable,
    stack: Vec<Node>,
}

impl Iterator for SubsetIter<'_> {
    type Item = IndexMask;

    fn next(&mut self) -> Option<IndexMask> {
        while let Some(node) = self.stack.pop() {
            if !node.tried_skip {
                if node.col == 0 {
                    // everything below is skipped; emit directly
                    return Some(node.taken);
                }
                if node.row == 0 {
                    continue;
                }
                let Node { row, col, taken, .. } = node;
                self.stack.push(Node { row, col, taken, tried_skip: true });
                if self.table.reachable(row - 1, col) {
                    self.stack.push(Node { row: row - 1, col, taken, tried_skip: false });
                }
            } else {
                let v = self.table.values[node.row - 1];
                let below = node.col - v;
                if below >= 0 && self.table.reachable(node.row - 1, below) {
                    let mut taken = node.taken;
                    taken.set(node.row - 1);
                    self.stack.push(Node {
                        row: node.row - 1,
                        col: below,
                        taken,
                        tried_skip: false,
                    });
                }
            }
        }
        None
    }
}

/// Every subset achieving `target`, materialized. Convenience for tests and
/// small scans; the solver streams instead.
pub fn backtrack_subsets(table: &DpTable, target: i64) -> Vec<IndexMask> {
    table.subsets(target).collect()
}

/// Last-row sum pairs grouped by absolute deviation: `pairs(e)` holds every
/// `(i, j)` with both sums reachable and `|i - j| = e`.
pub struct MatchedSums {
    by_deviation: Vec<Vec<(i64, i64)>>,
}

impl MatchedSums {
    pub fn pairs(&self, e: i64) -> &[(i64, i64)] {
        &self.by_deviation[e as usize]
    }

    pub fn max_deviation(&self) -> i64 {
        self.by_deviation.len() as i64 - 1
    }

    pub fn total(&self) -> usize {
        self.by_deviation.iter().map(|v| v.len()).sum()
    }
}

pub fn matched_sums(t_eta: &DpTable, t_lambda: &DpTable, bar_eps: i64) -> MatchedSums {
    let mut by_deviation = Vec::with_capacity(bar_eps as usize + 1);
    for e in 0..=bar_eps {
        let mut pairs = Vec::new();
        for_each_pair(t_eta, t_lambda, e, |i, j| {
            pairs.push((i, j));
            None::<()>
        });
        by_deviation.push(pairs);
    }
    MatchedSums { by_deviation }
}

/// Visit `(i, j)` pairs at deviation `e` in ascending `i`, lower `j` first.
/// Stops early when the visitor returns a value.
fn for_each_pair<T>(
    t_eta: &DpTable,
    t_lambda: &DpTable,
    e: i64,
    mut visit: impl FnMut(i64, i64) -> Option<T>,
) -> Option<T> {
    for i in t_eta.reachable_sums() {
        if i - e >= 0 && t_lambda.reachable_full(i - e) {
            if let Some(t) = visit(i, i - e) {
                return Some(t);
            }
        }
        if e > 0 && t_lambda.reachable_full(i + e) {
            if let Some(t) = visit(i, i + e) {
                return Some(t);
            }
        }
    }
    None
}

pub struct DpSolver {
    pub config: DpConfig,
}

impl DpSolver {
    pub fn new(config: DpConfig) -> Self {
        DpSolver { config }
    }

    pub fn with_rho(rho: i64) -> Self {
        DpSolver::new(DpConfig::with_rho(rho))
    }
}

impl Default for DpSolver {
    fn default() -> Self {
        DpSolver::new(DpConfig::default())
    }
}

impl DecisionSolver for DpSolver {
    fn solve_decision(
        &self,
        instance: &Instance,
        deadline: &Deadline,
    ) -> Result<DecisionOutcome, SolveError> {
        if instance.m() == 0 || instance.n() == 0 {
            return Ok(DecisionOutcome::NoMatch);
        }
        let reorg = discretize_reorganize(instance, self.config.rho);
        let sum_eta: i64 = reorg.eta.iter().sum();
        let sum_lambda: i64 = reorg.lambda.iter().sum();
        // widen each side's cap so pairs straddling the smaller total within
        // tolerance stay representable
        let x_eta = sum_eta.min(sum_lambda + reorg.bar_eps);
        let x_lambda = sum_lambda.min(sum_eta + reorg.bar_eps);
        let t_eta = tabulate(&reorg.eta, x_eta, self.config.max_table_cells)?;
        deadline.check()?;
        let t_lambda = tabulate(&reorg.lambda, x_lambda, self.config.max_table_cells)?;
        deadline.check()?;

        let validate = !reorg.exact || self.config.force_general;
        let eps = instance.epsilon();
        let mut scratch = Scratch::default();

        for e in 0..=reorg.bar_eps {
            deadline.check()?;
            let found = for_each_pair(&t_eta, &t_lambda, e, |i, j| {
                match try_pair(
                    instance,
                    &reorg,
                    &t_eta,
                    &t_lambda,
                    i,
                    j,
                    validate,
                    eps,
                    deadline,
                    &mut scratch,
                ) {
                    Ok(None) => None,
                    Ok(Some(m)) => Some(Ok(m)),
                    Err(err) => Some(Err(err)),
                }
            });
            match found {
                Some(Ok(m)) => {
                    assert!(instance.is_valid_match(&m), "table scan produced a bad match");
                    return Ok(DecisionOutcome::Match(m));
                }
                Some(Err(err)) => return Err(err),
                None => {}
            }
        }
        Ok(DecisionOutcome::NoMatch)
    }

    fn name(&self) -> &'static str {
        "dp"
    }
}

#[derive(Default)]
struct Scratch {
    left: Vec<IndexMask>,
    right: Vec<IndexMask>,
}

/// Enumerate candidate subset pairs behind the sums `(i, j)`, smallest
/// subsets first, and return the first pair that survives validation.
#[allow(clippy::too_many_arguments)]
fn try_pair(
    instance: &Instance,
    reorg: &ReorgProblem,
    t_eta: &DpTable,
    t_lambda: &DpTable,
    i: i64,
    j: i64,
    validate: bool,
    eps: i64,
    deadline: &Deadline,
    scratch: &mut Scratch,
) -> Result<Option<Match>, SolveError> {
    let accept = |p: &IndexMask, q: &IndexMask| -> Option<Match> {
        if !reorg.sides_nonempty(p, q) {
            return None;
        }
        if validate && reorg.candidate_deviation(p, q).abs() > eps {
            return None;
        }
        let m = reorg.to_match(p, q, instance.m(), instance.n());
        debug_assert!(instance.is_valid_match(&m));
        Some(m)
    };

    scratch.left.clear();
    scratch.right.clear();
    let mut left_iter = t_eta.subsets(i);
    let left_complete = loop {
        match left_iter.next() {
            Some(mask) => {
                scratch.left.push(mask);
                if scratch.left.len() >= COLLECT_CAP {
                    break false;
                }
            }
            None => break true,
        }
    };
    let mut right_iter = t_lambda.subsets(j);
    let right_complete = loop {
        match right_iter.next() {
            Some(mask) => {
                scratch.right.push(mask);
                if scratch.right.len() >= COLLECT_CAP {
                    break false;
                }
            }
            None => break true,
        }
    };
    if scratch.left.len() > 1 {
        scratch.left.sort_by_key(|m| m.count());
    }
    if scratch.right.len() > 1 {
        scratch.right.sort_by_key(|m| m.count());
    }

    let mut polled = 0usize;
    for p in &scratch.left {
        for q in &scratch.right {
            polled += 1;
            if polled & 1023 == 0 {
                deadline.check()?;
            }
            if let Some(m) = accept(p, q) {
                return Ok(Some(m));
            }
        }
    }

    if left_complete && right_complete {
        return Ok(None);
    }

    // Overflow path: some side had more subsets than the collection cap.
    // Re-stream the full cross product; the deadline is the only bound here.
    for p in t_eta.subsets(i) {
        for q in t_lambda.subsets(j) {
            polled += 1;
            if polled & 1023 == 0 {
                deadline.check()?;
            }
            if let Some(m) = accept(&p, &q) {
                return Ok(Some(m));
            }
        }
    }
    Ok(None)
}
