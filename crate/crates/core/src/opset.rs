//! Bitmask sets of variable operations.
//!
//! Operation `2m` is the opening of the `m`-th variable (in sorted variable
//! order) and `2m + 1` its closing.

use std::fmt;

/// Maximum number of variables an extraction grammar may declare.
pub const MAX_VARIABLES: usize = 15;

/// A set of variable operations over at most [`MAX_VARIABLES`] variables.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpSet(u32);

impl OpSet {
    pub const EMPTY: OpSet = OpSet(0);

    /// Every operation of the first `k` variables.
    pub fn full(k: usize) -> OpSet {
        debug_assert!(k <= MAX_VARIABLES);
        OpSet(((1u64 << (2 * k)) - 1) as u32)
    }

    pub fn singleton(bit: u8) -> OpSet {
        OpSet(1 << bit)
    }

    pub fn from_bits(bits: u32) -> OpSet {
        OpSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, bit: u8) -> bool {
        self.0 & (1 << bit) != 0
    }

    pub fn insert(&mut self, bit: u8) {
        self.0 |= 1 << bit;
    }

    pub fn union(self, other: OpSet) -> OpSet {
        OpSet(self.0 | other.0)
    }

    pub fn intersection(self, other: OpSet) -> OpSet {
        OpSet(self.0 & other.0)
    }

    pub fn difference(self, other: OpSet) -> OpSet {
        OpSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: OpSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: OpSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Opening operations in this set, re-indexed onto the closing bits.
    fn opens_as_closes(self) -> u32 {
        (self.0 & 0x5555_5555) << 1
    }

    /// True if some variable is closed in `self` and opened in `later`; a
    /// ref-word placing `later` after `self` would then be invalid.
    pub fn closes_before_opens_in(self, later: OpSet) -> bool {
        self.0 & 0xAAAA_AAAA & later.opens_as_closes() != 0
    }

    /// Bits of the set in increasing order.
    pub fn iter(self) -> impl Iterator<Item = u8> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let bit = rest.trailing_zeros() as u8;
                rest &= rest - 1;
                Some(bit)
            }
        })
    }

    /// All subsets of `self`, starting with the empty set.
    pub fn subsets(self) -> impl Iterator<Item = OpSet> {
        let mask = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(OpSet(cur))
        })
    }
}

impl FromIterator<u8> for OpSet {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        let mut set = OpSet::EMPTY;
        for bit in iter {
            set.insert(bit);
        }
        set
    }
}

impl fmt::Debug for OpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OpSet({:#b})", self.0)
    }
}

/// Variable index of an operation bit.
pub fn bit_var(bit: u8) -> usize {
    (bit / 2) as usize
}

/// True if the operation bit opens its variable.
pub fn bit_is_open(bit: u8) -> bool {
    bit.is_multiple_of(2)
}

pub fn open_bit(var: usize) -> u8 {
    (2 * var) as u8
}

pub fn close_bit(var: usize) -> u8 {
    (2 * var + 1) as u8
}
