use fixedbitset::FixedBitSet;
use serde::{Serialize, Serializer};
use std::fmt;

/// Set of indices below a fixed universe size.
///
/// Used both for vertex sets (universe = vertex count) and for sets of
/// boundary proxies (universe = horizon size).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IdSet {
    bits: FixedBitSet,
}

pub type VertexSet = IdSet;
pub type ProxySet = IdSet;

impl IdSet {
    pub fn empty(universe: usize) -> Self {
        Self { bits: FixedBitSet::with_capacity(universe) }
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        Self { bits }
    }

    pub fn from_ids<I: IntoIterator<Item = usize>>(universe: usize, ids: I) -> Self {
        let mut s = Self::empty(universe);
        for i in ids {
            s.insert(i);
        }
        s
    }

    pub fn from_predicate(universe: usize, mut pred: impl FnMut(usize) -> bool) -> Self {
        let mut s = Self::empty(universe);
        for i in 0..universe {
            if pred(i) {
                s.bits.insert(i);
            }
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits.contains(i)
    }

    /// Panics if `i` is outside the universe.
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.universe(), "id {i} outside universe {}", self.universe());
        !self.bits.put(i)
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.universe() {
            self.bits.set(i, false);
        }
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<usize> {
        self.bits.minimum()
    }

    pub fn union(&self, other: &Self) -> Self {
        self.check(other);
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Self { bits }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.check(other);
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Self { bits }
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.check(other);
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        Self { bits }
    }

    pub fn complement(&self) -> Self {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        Self { bits }
    }

    pub fn union_with(&mut self, other: &Self) {
        self.check(other);
        self.bits.union_with(&other.bits);
    }

    pub fn intersect_with(&mut self, other: &Self) {
        self.check(other);
        self.bits.intersect_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &Self) {
        self.check(other);
        self.bits.difference_with(&other.bits);
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.check(other);
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.check(other);
        self.bits.is_disjoint(&other.bits)
    }

    pub fn intersection_count(&self, other: &Self) -> usize {
        self.check(other);
        self.bits.intersection_count(&other.bits)
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.universe(), other.universe(), "sets over different universes");
    }
}

impl fmt::Debug for IdSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for IdSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra() {
        let a = IdSet::from_ids(10, [1, 2, 3]);
        let b = IdSet::from_ids(10, [3, 4]);
        assert_eq!(a.union(&b).to_vec(), vec![1, 2, 3, 4]);
        assert_eq!(a.intersection(&b).to_vec(), vec![3]);
        assert_eq!(a.difference(&b).to_vec(), vec![1, 2]);
        assert_eq!(a.complement().len(), 7);
        assert!(IdSet::from_ids(10, [3]).is_subset(&a));
        assert_eq!(a.intersection_count(&b), 1);
    }

    #[test]
    fn full_and_empty() {
        assert_eq!(IdSet::full(5).len(), 5);
        assert!(IdSet::empty(5).is_empty());
        assert_eq!(IdSet::full(0).len(), 0);
    }
}
