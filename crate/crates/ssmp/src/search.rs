//! Meet-in-the-middle decision solver.
//!
//! The longer side `b` is split at position `r`. Every subset of the prefix
//! `b[..r]` is listed with its sum; every subset of the suffix `b[r..]` goes
//! into an associative table keyed by its sum (bucketed by `round(sum / eps)`
//! when `eps > 0`). The scan then walks non-empty subsets `w` of the short
//! side and, for each prefix entry, probes the table for a suffix that closes
//! the gap within tolerance.
//!
//! The split trades the `2^N` enumeration of one side for `2^r + 2^(N-r)`
//! cached entries and a `2^(M+r)`-pair scan, which is what makes instances
//! with one long side tractable.

use crate::amount::div_round_half_away;
use crate::deadline::{Deadline, SolveError};
use crate::greedy::{DecisionOutcome, DecisionSolver};
use crate::instance::{Instance, Match};
use crate::subset::{masked_sum, Subset};

/// Order in which candidate subsets `w` of the short side are scanned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SubsetOrder {
    /// Fewest elements first; finds fine-grained matches early.
    #[default]
    PopcountAscending,
    /// Plain ascending bit-mask order.
    IndexAscending,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    /// Split position into the cached (longer) side; `None` picks
    /// `round((N - M) / 2)`.
    pub r: Option<usize>,
    pub order: SubsetOrder,
    /// Cap on `2^r + 2^(N-r)` cache entries; guards against building a
    /// cache that could never be scanned in time anyway.
    pub max_cache_entries: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { r: None, order: SubsetOrder::PopcountAscending, max_cache_entries: 1 << 24 }
    }
}

/// Default split `round((N - M) / 2)`, ties rounded up (away from zero);
/// requires `n >= m`.
pub fn default_split(m: usize, n: usize) -> usize {
    debug_assert!(n >= m);
    (n - m + 1) / 2
}

/// The cached half of the algorithm: prefix subset sums plus the keyed
/// suffix table.
pub struct SplitCache {
    r: usize,
    /// Tolerance the keys were computed under; probes must use the same one.
    epsilon: i64,
    /// `(sum, mask)` for every subset of `b[..r]`, empty subset included.
    prefix: Vec<(i64, u128)>,
    /// `(key, sum, mask)` for every subset of `b[r..]`, sorted by key.
    /// Masks are relative to the suffix.
    keyed: Vec<(i64, i64, u128)>,
}

impl SplitCache {
    pub fn build(b: &[i64], r: usize, epsilon: i64) -> Result<Self, SolveError> {
        Self::build_bounded(
            b,
            r,
            epsilon,
            SearchConfig::default().max_cache_entries,
            &Deadline::none(),
        )
    }

    pub fn build_bounded(
        b: &[i64],
        r: usize,
        epsilon: i64,
        max_entries: u64,
        deadline: &Deadline,
    ) -> Result<Self, SolveError> {
        let n = b.len();
        if r > n {
            return Err(SolveError::SplitOutOfRange { r, n });
        }
        let entries = pow2(r) + pow2(n - r);
        if entries > max_entries as u128 {
            return Err(SolveError::CacheTooLarge { entries, budget: max_entries });
        }
        let prefix = part_sums(&b[..r], deadline)?;
        let mut keyed: Vec<(i64, i64, u128)> = Vec::with_capacity(1 << (n - r));
        for (sum, mask) in PartSums::new(&b[r..]) {
            if keyed.len() & 8191 == 0 {
                deadline.check()?;
            }
            keyed.push((key_for(sum, epsilon), sum, mask));
        }
        keyed.sort_unstable_by_key(|e| e.0);
        Ok(SplitCache { r, epsilon, prefix, keyed })
    }

    /// Number of prefix entries; always exactly `2^r`.
    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    /// Total entries across all suffix buckets; always exactly `2^(N-r)`.
    pub fn keyed_len(&self) -> usize {
        self.keyed.len()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// All suffix entries whose key equals `key`.
    pub fn bucket(&self, key: i64) -> &[(i64, i64, u128)] {
        let lo = self.keyed.partition_point(|e| e.0 < key);
        let hi = lo + self.keyed[lo..].partition_point(|e| e.0 <= key);
        &self.keyed[lo..hi]
    }
}

/// Bucket key for a suffix sum: the sum itself under an exact tolerance,
/// otherwise the rounded ratio so that any sum within `eps` of a probe lands
/// in one of the three adjacent buckets.
fn key_for(sum: i64, epsilon: i64) -> i64 {
    if epsilon == 0 {
        sum
    } else {
        div_round_half_away(sum as i128, epsilon as i128) as i64
    }
}

fn pow2(e: usize) -> u128 {
    if e >= 127 {
        u128::MAX
    } else {
        1u128 << e
    }
}

/// Gray-code walk over all subsets of `values`: one element toggles per
/// step, so each sum is one addition away from the previous.
struct PartSums<'a> {
    values: &'a [i64],
    index: u64,
    total: u64,
    sum: i64,
    mask: u128,
}

impl<'a> PartSums<'a> {
    fn new(values: &'a [i64]) -> Self {
        assert!(values.len() < 64, "part too large to enumerate");
        PartSums { values, index: 0, total: 1u64 << values.len(), sum: 0, mask: 0 }
    }
}

impl Iterator for PartSums<'_> {
    type Item = (i64, u128);

    fn next(&mut self) -> Option<(i64, u128)> {
        if self.index == self.total {
            return None;
        }
        if self.index > 0 {
            let bit = self.index.trailing_zeros() as usize;
            let flag = 1u128 << bit;
            if self.mask & flag == 0 {
                self.mask |= flag;
                self.sum += self.values[bit];
            } else {
                self.mask &= !flag;
                self.sum -= self.values[bit];
            }
        }
        self.index += 1;
        Some((self.sum, self.mask))
    }
}

fn part_sums(values: &[i64], deadline: &Deadline) -> Result<Vec<(i64, u128)>, SolveError> {
    let mut out = Vec::with_capacity(1 << values.len());
    for entry in PartSums::new(values) {
        if out.len() & 8191 == 0 {
            deadline.check()?;
        }
        out.push(entry);
    }
    Ok(out)
}

pub struct SearchSolver {
    pub config: SearchConfig,
}

impl SearchSolver {
    pub fn new(config: SearchConfig) -> Self {
        SearchSolver { config }
    }

    pub fn with_r(r: usize) -> Self {
        SearchSolver { config: SearchConfig { r: Some(r), ..SearchConfig::default() } }
    }
}

impl Default for SearchSolver {
    fn default() -> Self {
        SearchSolver::new(SearchConfig::default())
    }
}

impl DecisionSolver for SearchSolver {
    fn solve_decision(
        &self,
        instance: &Instance,
        deadline: &Deadline,
    ) -> Result<DecisionOutcome, SolveError> {
        if instance.m() == 0 || instance.n() == 0 {
            return Ok(DecisionOutcome::NoMatch);
        }
        // cache the longer side; mirror the answer back afterwards
        let swapped = instance.m() > instance.n();
        let (short, long) =
            if swapped { (instance.b(), instance.a()) } else { (instance.a(), instance.b()) };
        let r = match self.config.r {
            Some(r) if r > long.len() => {
                return Err(SolveError::SplitOutOfRange { r, n: long.len() })
            }
            Some(r) => r,
            None => default_split(short.len(), long.len()),
        };
        let epsilon = instance.epsilon();
        let cache =
            SplitCache::build_bounded(long, r, epsilon, self.config.max_cache_entries, deadline)?;

        let found = match self.config.order {
            SubsetOrder::PopcountAscending => {
                let mut found = None;
                'outer: for k in 1..=short.len() {
                    for w in FixedCountMasks::new(short.len(), k) {
                        if let Some(v) = scan_one(short, &cache, w, deadline)? {
                            found = Some((w, v));
                            break 'outer;
                        }
                    }
                }
                found
            }
            SubsetOrder::IndexAscending => {
                let mut found = None;
                let mut w: u128 = 1;
                let end = pow2(short.len());
                while w < end {
                    if let Some(v) = scan_one(short, &cache, w, deadline)? {
                        found = Some((w, v));
                        break;
                    }
                    w += 1;
                }
                found
            }
        };

        match found {
            Some((w_bits, v_bits)) => {
                let m = if swapped {
                    Match {
                        w: Subset::from_bits(instance.m(), v_bits),
                        v: Subset::from_bits(instance.n(), w_bits),
                    }
                } else {
                    Match {
                        w: Subset::from_bits(instance.m(), w_bits),
                        v: Subset::from_bits(instance.n(), v_bits),
                    }
                };
                assert!(instance.is_valid_match(&m), "split scan produced a bad match");
                Ok(DecisionOutcome::Match(m))
            }
            None => Ok(DecisionOutcome::NoMatch),
        }
    }

    fn name(&self) -> &'static str {
        "search"
    }
}

/// Probe every prefix entry for `w`; returns the combined cached-side mask
/// of the first hit.
fn scan_one(
    short: &[i64],
    cache: &SplitCache,
    w: u128,
    deadline: &Deadline,
) -> Result<Option<u128>, SolveError> {
    deadline.check()?;
    let epsilon = cache.epsilon;
    let sw = masked_sum(short, w);
    for (i, &(c, vp)) in cache.prefix.iter().enumerate() {
        if i & 4095 == 4095 {
            deadline.check()?;
        }
        let gap = sw - c;
        let center = key_for(gap, epsilon);
        let keys =
            if epsilon == 0 { [center, center, center] } else { [center - 1, center, center + 1] };
        let mut probed = i64::MIN;
        for key in keys {
            if key == probed {
                continue; // eps == 0 probes a single key
            }
            probed = key;
            for &(_, d, vs) in cache.bucket(key) {
                if (d - gap).abs() <= epsilon {
                    let v = if vs == 0 { vp } else { vp | (vs << cache.r) };
                    if v != 0 {
                        return Ok(Some(v));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// All masks of `len` bits with exactly `count` ones, ascending.
struct FixedCountMasks {
    current: u128,
    last: u128,
    done: bool,
}

impl FixedCountMasks {
    fn new(len: usize, count: usize) -> Self {
        debug_assert!(count >= 1 && count <= len && len <= 128);
        let first = ones(count);
        FixedCountMasks { current: first, last: first << (len - count), done: false }
    }
}

fn ones(k: usize) -> u128 {
    if k >= 128 {
        u128::MAX
    } else {
        (1u128 << k) - 1
    }
}

impl Iterator for FixedCountMasks {
    type Item = u128;

    fn next(&mut self) -> Option<u128> {
        if self.done {
            return None;
        }
        let out = self.current;
        if out == self.last {
            self.done = true;
        } else {
            // Gosper's hack: next mask with the same popcount
            let c = out & out.wrapping_neg();
            let rippled = out + c;
            self.current = rippled | (((out ^ rippled) / c) >> 2);
        }
        Some(out)
    }
}
