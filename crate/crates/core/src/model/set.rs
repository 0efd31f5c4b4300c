use std::fmt;

/// Largest carrier a [`StateSet`] can index.
pub const MAX_STATES: usize = 64;

/// A subset of an ordered carrier, stored as a bit-vector over state indices.
///
/// The set itself does not know the carrier size; operations that need it
/// (complement, enumeration) take it explicitly.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct StateSet(u64);

impl StateSet {
    pub const EMPTY: StateSet = StateSet(0);

    pub fn from_bits(bits: u64) -> Self {
        StateSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// The whole carrier `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_STATES, "carrier of {n} states exceeds {MAX_STATES}");
        if n == MAX_STATES {
            StateSet(u64::MAX)
        } else {
            StateSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_STATES);
        StateSet(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices.into_iter().fold(StateSet::EMPTY, |acc, i| acc.with(i))
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_STATES && self.0 & (1u64 << i) != 0
    }

    #[must_use]
    pub fn with(self, i: usize) -> Self {
        self.union(StateSet::singleton(i))
    }

    #[must_use]
    pub fn without(self, i: usize) -> Self {
        self.difference(StateSet::singleton(i))
    }

    pub fn insert(&mut self, i: usize) {
        *self = self.with(i);
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[must_use]
    pub fn union(self, other: StateSet) -> Self {
        StateSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: StateSet) -> Self {
        StateSet(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: StateSet) -> Self {
        StateSet(self.0 & !other.0)
    }

    #[must_use]
    pub fn symmetric_difference(self, other: StateSet) -> Self {
        StateSet(self.0 ^ other.0)
    }

    #[must_use]
    pub fn complement(self, n: usize) -> Self {
        StateSet::full(n).difference(self)
    }

    pub fn is_subset(self, other: StateSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_within(self, n: usize) -> bool {
        self.is_subset(StateSet::full(n))
    }

    /// Least member.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Shifts every member up by `offset` (used to embed into a sum carrier).
    #[must_use]
    pub fn shifted(self, offset: usize) -> Self {
        let moved = self.0.checked_shl(offset as u32).unwrap_or(0);
        assert!(
            offset == 0 || self.0 >> (MAX_STATES - offset) == 0,
            "shift leaves the {MAX_STATES}-state range"
        );
        StateSet(moved)
    }

    /// Members in `[offset, offset + len)`, moved down to start at zero.
    #[must_use]
    pub fn window(self, offset: usize, len: usize) -> Self {
        let down = self.0.checked_shr(offset as u32).unwrap_or(0);
        StateSet(down).intersection(StateSet::full(len))
    }

    /// All subsets of `self`, in increasing bit order (starting at the empty set).
    pub fn subsets(self) -> impl Iterator<Item = StateSet> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let current = next?;
            next = if current == mask {
                None
            } else {
                Some((current.wrapping_sub(mask)) & mask)
            };
            Some(StateSet(current))
        })
    }

    /// All subsets of `{0, .., n-1}`.
    pub fn all_subsets(n: usize) -> impl Iterator<Item = StateSet> {
        StateSet::full(n).subsets()
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for StateSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        StateSet::from_indices(iter)
    }
}
