//! Problem instances, matches, and solutions.
//!
//! An instance holds two lists of non-zero fixed-point amounts `a` and `b`
//! plus a tolerance `epsilon`. A match pairs a subset of `a` with a subset of
//! `b` whose sums agree within `epsilon`; a solution is a set of matches that
//! are pairwise disjoint on both sides.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::{format_amount, parse_amount, Amount, ParseAmountError, MAX_DIGITS};
use crate::subset::{Subset, MAX_SIDE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    a: Vec<Amount>,
    b: Vec<Amount>,
    epsilon: Amount,
    digits: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("zero amount at {side:?}[{index}]")]
    ZeroAmount { side: Side, index: usize },
    #[error("epsilon must be non-negative")]
    NegativeEpsilon,
    #[error("side {side:?} has {len} elements, over the {MAX_SIDE} cap")]
    SideTooLong { side: Side, len: usize },
    #[error("side {side:?} is empty")]
    EmptySide { side: Side },
    #[error("{digits} decimal digits over the {MAX_DIGITS} cap")]
    TooManyDigits { digits: u32 },
    #[error("bad amount: {0}")]
    BadAmount(#[from] ParseAmountError),
    #[error("bad instance json: {0}")]
    BadJson(String),
}

impl Instance {
    /// Residual instances produced while solving may have an empty side;
    /// instances read from files may not (see [`Instance::from_json`]).
    pub fn new(
        a: Vec<Amount>,
        b: Vec<Amount>,
        epsilon: Amount,
        digits: u32,
    ) -> Result<Self, InstanceError> {
        if digits > MAX_DIGITS {
            return Err(InstanceError::TooManyDigits { digits });
        }
        if epsilon < 0 {
            return Err(InstanceError::NegativeEpsilon);
        }
        for (side, list) in [(Side::A, &a), (Side::B, &b)] {
            if list.len() > MAX_SIDE {
                return Err(InstanceError::SideTooLong { side, len: list.len() });
            }
            if let Some(index) = list.iter().position(|&x| x == 0) {
                return Err(InstanceError::ZeroAmount { side, index });
            }
        }
        Ok(Instance { a, b, epsilon, digits })
    }

    pub fn a(&self) -> &[Amount] {
        &self.a
    }

    pub fn b(&self) -> &[Amount] {
        &self.b
    }

    pub fn side(&self, side: Side) -> &[Amount] {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    pub fn epsilon(&self) -> Amount {
        self.epsilon
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// Same amounts with the two sides exchanged. `|x - y|` is symmetric, so
    /// match validity carries over with `w` and `v` swapped.
    pub fn swapped(&self) -> Instance {
        Instance {
            a: self.b.clone(),
            b: self.a.clone(),
            epsilon: self.epsilon,
            digits: self.digits,
        }
    }

    pub fn sum(&self, side: Side, subset: &Subset) -> i64 {
        let values = self.side(side);
        assert_eq!(subset.len(), values.len(), "subset indexes a different side");
        subset.indices().map(|i| values[i]).sum()
    }

    /// The matching predicate: both subsets non-empty and the subset sums
    /// within `epsilon` of each other.
    pub fn is_valid_match(&self, m: &Match) -> bool {
        assert_eq!(m.w.len(), self.m(), "match w built for a different instance");
        assert_eq!(m.v.len(), self.n(), "match v built for a different instance");
        if m.w.is_empty() || m.v.is_empty() {
            return false;
        }
        let diff = self.sum(Side::A, &m.w) - self.sum(Side::B, &m.v);
        diff.abs() <= self.epsilon
    }

    /// `Ok` when every match is valid and matches are pairwise disjoint on
    /// both sides; otherwise the first violation found.
    pub fn check_solution(&self, s: &Solution) -> Result<(), Violation> {
        for (k, m) in s.matches.iter().enumerate() {
            if !self.is_valid_match(m) {
                let reason = if m.w.is_empty() || m.v.is_empty() {
                    InvalidReason::EmptySubset
                } else {
                    let deviation = self.sum(Side::A, &m.w) - self.sum(Side::B, &m.v);
                    InvalidReason::OutOfTolerance { deviation }
                };
                return Err(Violation::InvalidMatch { index: k, reason });
            }
        }
        for i in 0..s.matches.len() {
            for j in i + 1..s.matches.len() {
                if !s.matches[i].w.is_disjoint(&s.matches[j].w) {
                    return Err(Violation::Overlap { first: i, second: j, side: Side::A });
                }
                if !s.matches[i].v.is_disjoint(&s.matches[j].v) {
                    return Err(Violation::Overlap { first: i, second: j, side: Side::B });
                }
            }
        }
        Ok(())
    }

    pub fn is_feasible_solution(&self, s: &Solution) -> bool {
        self.check_solution(s).is_ok()
    }

    /// Objective: total matched elements plus `k_weight` per match. Errors on
    /// infeasible solutions rather than scoring them.
    pub fn objective(&self, s: &Solution, k_weight: i64) -> Result<i64, Violation> {
        self.check_solution(s)?;
        let elements: i64 = s.matches.iter().map(|m| (m.w.count() + m.v.count()) as i64).sum();
        Ok(elements + k_weight * s.matches.len() as i64)
    }

    /// Objective at the default match weight of 1.
    pub fn psi(&self, s: &Solution) -> Result<i64, Violation> {
        self.objective(s, 1)
    }

    /// Remove every element referenced by `s`, producing the residual
    /// instance plus maps from residual indices back to the original ones.
    pub fn remove_matched(&self, s: &Solution) -> Result<Residual, Violation> {
        self.check_solution(s)?;
        let mut in_a = Subset::empty(self.m());
        let mut in_b = Subset::empty(self.n());
        for m in &s.matches {
            for i in m.w.indices() {
                in_a.insert(i);
            }
            for j in m.v.indices() {
                in_b.insert(j);
            }
        }
        let keep = |list: &[Amount], used: &Subset| {
            let mut vals = Vec::new();
            let mut map = Vec::new();
            for (i, &x) in list.iter().enumerate() {
                if !used.contains(i) {
                    vals.push(x);
                    map.push(i);
                }
            }
            (vals, map)
        };
        let (a, a_map) = keep(&self.a, &in_a);
        let (b, b_map) = keep(&self.b, &in_b);
        let instance = Instance { a, b, epsilon: self.epsilon, digits: self.digits };
        Ok(Residual { instance, a_map, b_map })
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let raw: RawInstance =
            serde_json::from_str(text).map_err(|e| InstanceError::BadJson(e.to_string()))?;
        let digits = raw.digits;
        if digits > MAX_DIGITS {
            return Err(InstanceError::TooManyDigits { digits });
        }
        let parse_list = |items: &[String]| -> Result<Vec<Amount>, InstanceError> {
            items.iter().map(|s| parse_amount(s, digits).map_err(InstanceError::from)).collect()
        };
        let a = parse_list(&raw.a)?;
        let b = parse_list(&raw.b)?;
        for (side, list) in [(Side::A, &a), (Side::B, &b)] {
            if list.is_empty() {
                return Err(InstanceError::EmptySide { side });
            }
        }
        let epsilon = parse_amount(&raw.epsilon, digits)?;
        Instance::new(a, b, epsilon, digits)
    }

    pub fn to_json(&self) -> String {
        let fmt_list =
            |xs: &[Amount]| xs.iter().map(|&x| format_amount(x, self.digits)).collect::<Vec<_>>();
        let raw = RawInstance {
            a: fmt_list(&self.a),
            b: fmt_list(&self.b),
            epsilon: format_amount(self.epsilon, self.digits),
            digits: self.digits,
        };
        serde_json::to_string(&raw).expect("instance serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    a: Vec<String>,
    b: Vec<String>,
    epsilon: String,
    digits: u32,
}

/// One matched pair of subsets: `w` indexes into `a`, `v` into `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Match {
    pub w: Subset,
    pub v: Subset,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Solution {
    pub matches: Vec<Match>,
}

impl Solution {
    pub fn empty() -> Self {
        Solution { matches: Vec::new() }
    }

    /// Parse the index-list form `{"matches": [{"w": [...], "v": [...]}]}`.
    /// Indices are 0-based positions in the original instance.
    pub fn from_json(text: &str, m: usize, n: usize) -> Result<Self, SolutionFormatError> {
        let raw: RawSolution =
            serde_json::from_str(text).map_err(|e| SolutionFormatError::BadJson(e.to_string()))?;
        let mut matches = Vec::with_capacity(raw.matches.len());
        for (k, rm) in raw.matches.iter().enumerate() {
            let build = |len: usize, idx: &[usize], side: Side| {
                let mut s = Subset::empty(len);
                for &i in idx {
                    if i >= len {
                        return Err(SolutionFormatError::IndexOutOfRange {
                            match_index: k,
                            side,
                            index: i,
                            len,
                        });
                    }
                    s.insert(i);
                }
                Ok(s)
            };
            matches.push(Match { w: build(m, &rm.w, Side::A)?, v: build(n, &rm.v, Side::B)? });
        }
        Ok(Solution { matches })
    }

    pub fn to_json(&self) -> String {
        let raw = RawSolution {
            matches: self
                .matches
                .iter()
                .map(|m| RawMatch { w: m.w.indices().collect(), v: m.v.indices().collect() })
                .collect(),
        };
        serde_json::to_string(&raw).expect("solution serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct RawSolution {
    matches: Vec<RawMatch>,
}

#[derive(Serialize, Deserialize)]
struct RawMatch {
    w: Vec<usize>,
    v: Vec<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolutionFormatError {
    #[error("bad solution json: {0}")]
    BadJson(String),
    #[error("match {match_index}: index {index} out of range for side {side:?} of length {len}")]
    IndexOutOfRange { match_index: usize, side: Side, index: usize, len: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Violation {
    #[error("match {index} is invalid: {reason}")]
    InvalidMatch { index: usize, reason: InvalidReason },
    #[error("matches {first} and {second} overlap on side {side:?}")]
    Overlap { first: usize, second: usize, side: Side },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InvalidReason {
    #[error("a side of the match is empty")]
    EmptySubset,
    #[error("subset sums deviate by {deviation} units")]
    OutOfTolerance { deviation: i64 },
}

/// Result of [`Instance::remove_matched`]: `a_map[i]` is the original index
/// of residual element `a[i]`, likewise `b_map`.
#[derive(Clone, Debug)]
pub struct Residual {
    pub instance: Instance,
    pub a_map: Vec<usize>,
    pub b_map: Vec<usize>,
}
