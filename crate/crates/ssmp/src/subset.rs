//! Index subsets over one side of an instance, packed into a bit mask.
//!
//! Sides are capped at 128 elements, so a `u128` covers every position.

use std::fmt;

/// Hard cap on elements per side; keeps inclusion masks in one `u128`.
pub const MAX_SIDE: usize = 128;

/// A subset of the indices `0..len` of one side.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset {
    bits: u128,
    len: u8,
}

impl Subset {
    pub fn empty(len: usize) -> Self {
        assert!(len <= MAX_SIDE, "side of {len} over the {MAX_SIDE} cap");
        Subset { bits: 0, len: len as u8 }
    }

    /// Build from a raw mask; bits at or above `len` must be clear.
    pub fn from_bits(len: usize, bits: u128) -> Self {
        let mut s = Subset::empty(len);
        assert!(len == MAX_SIDE || bits >> len == 0, "mask has bits past index {len}");
        s.bits = bits;
        s
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Subset::empty(len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, index: usize) {
        assert!(index < self.len as usize, "index {index} out of range");
        self.bits |= 1u128 << index;
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.len as usize && self.bits >> index & 1 == 1
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    /// Length of the side this subset indexes into, not the member count.
    pub fn len(&self) -> usize {
        self.len as usize
    }

    /// Number of selected indices.
    pub fn count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_disjoint(&self, other: &Subset) -> bool {
        self.bits & other.bits == 0
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        BitIter(self.bits)
    }
}

pub(crate) struct BitIter(pub u128);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.indices()).finish()
    }
}

/// Sum of `values[i]` over the set bits of `mask`.
pub(crate) fn masked_sum(values: &[i64], mask: u128) -> i64 {
    BitIter(mask).map(|i| values[i]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_membership() {
        let s = Subset::from_indices(5, [0, 3]);
        assert!(s.contains(0));
        assert!(!s.contains(1));
        assert!(s.contains(3));
        assert_eq!(s.count(), 2);
        assert_eq!(s.indices().collect::<Vec<_>>(), vec![0, 3]);
        assert_eq!(format!("{s:?}"), "{0, 3}");
    }

    #[test]
    fn disjointness() {
        let s = Subset::from_indices(4, [0, 1]);
        let t = Subset::from_indices(4, [2]);
        let u = Subset::from_indices(4, [1, 3]);
        assert!(s.is_disjoint(&t));
        assert!(!s.is_disjoint(&u));
        assert!(Subset::empty(4).is_disjoint(&s));
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn insert_past_len_panics() {
        Subset::empty(3).insert(3);
    }

    #[test]
    fn full_width_mask() {
        let s = Subset::from_bits(128, u128::MAX);
        assert_eq!(s.count(), 128);
        assert!(s.contains(127));
    }

    #[test]
    fn masked_sums() {
        assert_eq!(masked_sum(&[5, -3, 7], 0b101), 12);
        assert_eq!(masked_sum(&[5, -3, 7], 0), 0);
    }
}
