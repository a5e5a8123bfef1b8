//! Sets of positions as 64-bit masks.

use std::fmt;

/// Widest network the bitmask representation (and hence the exact solver and
/// tracked-set machinery) can index. The simulator itself has no such limit.
pub const MAX_SET_POSITIONS: usize = 64;

/// A subset of the gossiping positions. Bit `i` set means position `i`
/// (0-based) is a member. All text output is 1-based.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositionSet(u64);

impl PositionSet {
    pub const EMPTY: PositionSet = PositionSet(0);

    /// The set {0, 1, .., n-1}.
    pub fn full(n: usize) -> PositionSet {
        assert!(n <= MAX_SET_POSITIONS, "position set limited to 64 bits");
        if n == 64 {
            PositionSet(u64::MAX)
        } else {
            PositionSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> PositionSet {
        assert!(i < MAX_SET_POSITIONS);
        PositionSet(1 << i)
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> PositionSet {
        let mut s = PositionSet::EMPTY;
        for i in members {
            s = s.with(i);
        }
        s
    }

    pub fn from_bits(bits: u64) -> PositionSet {
        PositionSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_SET_POSITIONS && self.0 >> i & 1 == 1
    }

    #[must_use]
    pub fn with(self, i: usize) -> PositionSet {
        assert!(i < MAX_SET_POSITIONS);
        PositionSet(self.0 | 1 << i)
    }

    #[must_use]
    pub fn without(self, i: usize) -> PositionSet {
        assert!(i < MAX_SET_POSITIONS);
        PositionSet(self.0 & !(1 << i))
    }

    /// The set after the node at member position `i` swaps away and the node
    /// at non-member position `j` takes its place: S ∪ {j} \ {i}.
    #[must_use]
    pub fn swapped(self, i: usize, j: usize) -> PositionSet {
        debug_assert!(self.contains(i) && !self.contains(j));
        self.without(i).with(j)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: PositionSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Member positions in increasing order, 0-based.
    pub fn iter(self) -> SetIter {
        SetIter(self.0)
    }

    pub fn members_one_based(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }

    /// CSV-safe member list, e.g. "1|3|4". 1-based.
    pub fn members_label(self) -> String {
        let parts: Vec<String> = self.iter().map(|i| (i + 1).to_string()).collect();
        parts.join("|")
    }
}

pub struct SetIter(u64);

impl Iterator for SetIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            let i = self.0.trailing_zeros() as usize;
            self.0 &= self.0 - 1;
            Some(i)
        }
    }
}

impl fmt::Debug for PositionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for PositionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// All size-`k` subsets of {0..n} in increasing bitmask order (Gosper's hack).
pub fn sets_of_size(n: usize, k: usize) -> Vec<PositionSet> {
    assert!(n <= MAX_SET_POSITIONS && k <= n);
    if k == 0 {
        return vec![PositionSet::EMPTY];
    }
    if k == MAX_SET_POSITIONS {
        return vec![PositionSet(u64::MAX)];
    }
    let limit: u64 = if n == MAX_SET_POSITIONS {
        u64::MAX
    } else {
        (1 << n) - 1
    };
    let mut out = Vec::new();
    let mut v: u64 = (1 << k) - 1;
    loop {
        out.push(PositionSet(v));
        // next higher integer with the same popcount
        let c = v & v.wrapping_neg();
        let Some(r) = v.checked_add(c) else { break };
        if r > limit || r == 0 {
            break;
        }
        v = (((r ^ v) >> 2) / c) | r;
        if v > limit {
            break;
        }
    }
    out
}
