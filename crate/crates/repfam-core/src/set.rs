//! Small-universe element sets backed by a 128-bit mask.
//!
//! Every ground set in this crate (matroid elements, circuit variables,
//! graph vertices and edges) is indexed by small integers, so a bitmask is
//! both the fastest and the most convenient representation. The numeric
//! order of masks doubles as the canonical tie-breaking order everywhere a
//! deterministic choice among equal-weight sets is required.

use std::fmt;

/// A subset of a ground set of at most 128 elements.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ElemSet(pub u128);

/// Maximum supported ground-set size.
pub const MAX_GROUND: usize = 128;

impl ElemSet {
    pub const EMPTY: ElemSet = ElemSet(0);

    pub fn singleton(e: usize) -> Self {
        debug_assert!(e < MAX_GROUND);
        ElemSet(1u128 << e)
    }

    pub fn from_elems<I: IntoIterator<Item = usize>>(elems: I) -> Self {
        let mut s = ElemSet::EMPTY;
        for e in elems {
            s.insert(e);
        }
        s
    }

    /// Full set {0, .., n-1}.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_GROUND);
        if n == MAX_GROUND {
            ElemSet(u128::MAX)
        } else {
            ElemSet((1u128 << n) - 1)
        }
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, e: usize) -> bool {
        e < MAX_GROUND && self.0 >> e & 1 == 1
    }

    pub fn insert(&mut self, e: usize) {
        debug_assert!(e < MAX_GROUND);
        self.0 |= 1u128 << e;
    }

    pub fn remove(&mut self, e: usize) {
        self.0 &= !(1u128 << e);
    }

    pub fn union(&self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 | other.0)
    }

    pub fn intersect(&self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 & other.0)
    }

    pub fn minus(&self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 & !other.0)
    }

    pub fn is_disjoint(&self, other: ElemSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(&self, other: ElemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(&self) -> Elems {
        Elems(self.0)
    }

    /// Smallest element, if any.
    pub fn min_elem(&self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    /// All subsets of `universe` with exactly `k` elements, in increasing
    /// mask order (colexicographic for fixed k).
    pub fn subsets_of_size(universe: ElemSet, k: usize) -> Vec<ElemSet> {
        let elems: Vec<usize> = universe.iter().collect();
        let n = elems.len();
        let mut out = Vec::new();
        if k > n {
            return out;
        }
        if k == 0 {
            out.push(ElemSet::EMPTY);
            return out;
        }
        // Gosper's hack over compact positions, remapped through `elems` so
        // the output order matches mask order even for sparse universes.
        let mut v: u128 = (1u128 << k) - 1;
        let last: u128 = ((1u128 << k) - 1) << (n - k);
        loop {
            let mut s = ElemSet::EMPTY;
            let mut bits = v;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                s.insert(elems[i]);
                bits &= bits - 1;
            }
            out.push(s);
            if v == last {
                break;
            }
            let c = v & v.wrapping_neg();
            let r = v + c;
            v = (((r ^ v) >> 2) / c) | r;
        }
        out
    }

    /// All subsets of `universe` of size at most `k`, sizes interleaved by
    /// mask order within each size class.
    pub fn subsets_up_to_size(universe: ElemSet, k: usize) -> Vec<ElemSet> {
        (0..=k)
            .flat_map(|s| ElemSet::subsets_of_size(universe, s))
            .collect()
    }

    pub fn as_mask(&self) -> u128 {
        self.0
    }
}

impl FromIterator<usize> for ElemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        ElemSet::from_elems(iter)
    }
}

/// Iterator over the elements of an [`ElemSet`] in increasing order.
pub struct Elems(u128);

impl Iterator for Elems {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let e = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(e)
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut s = ElemSet::from_elems([1, 3, 5]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(3));
        assert!(!s.contains(2));
        s.remove(3);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 5]);
        assert!(s.is_subset_of(ElemSet::from_elems([0, 1, 5, 7])));
        assert!(s.is_disjoint(ElemSet::from_elems([2, 4])));
    }

    #[test]
    fn subsets_enumeration() {
        let u = ElemSet::full(5);
        let twos = ElemSet::subsets_of_size(u, 2);
        assert_eq!(twos.len(), 10);
        // colex: {0,1} first, {3,4} last
        assert_eq!(twos[0], ElemSet::from_elems([0, 1]));
        assert_eq!(twos[9], ElemSet::from_elems([3, 4]));
        // strictly increasing mask order
        assert!(twos.windows(2).all(|w| w[0].0 < w[1].0));
        assert_eq!(ElemSet::subsets_of_size(u, 0), vec![ElemSet::EMPTY]);
        assert_eq!(ElemSet::subsets_of_size(u, 6).len(), 0);
        assert_eq!(ElemSet::subsets_up_to_size(u, 2).len(), 1 + 5 + 10);
    }

    #[test]
    fn subsets_of_sparse_universe() {
        let u = ElemSet::from_elems([2, 5, 9]);
        let pairs = ElemSet::subsets_of_size(u, 2);
        assert_eq!(
            pairs,
            vec![
                ElemSet::from_elems([2, 5]),
                ElemSet::from_elems([2, 9]),
                ElemSet::from_elems([5, 9]),
            ]
        );
    }
}
