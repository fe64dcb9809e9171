//! Finite distributions with exact weights, and sets of worlds.

use std::collections::{BTreeMap, BTreeSet};

use crate::rational::Rational;

/// Weights over a finite carrier. Zero weights are not stored.
///
/// A `Distribution` may be built from arbitrary weights so that models read
/// from disk can be validated and reported on; [`Distribution::is_probability`]
/// tells whether it is a genuine probability measure.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Distribution<K: Ord> {
    weights: BTreeMap<K, Rational>,
}

impl<K: Ord + Clone> Distribution<K> {
    pub fn from_weights(entries: impl IntoIterator<Item = (K, Rational)>) -> Self {
        let mut weights: BTreeMap<K, Rational> = BTreeMap::new();
        for (k, w) in entries {
            *weights.entry(k).or_insert_with(Rational::zero) += w;
        }
        weights.retain(|_, w| !w.is_zero());
        Distribution { weights }
    }

    pub fn point(k: K) -> Self {
        Distribution::from_weights([(k, Rational::one())])
    }

    /// Uniform weights over `keys` (duplicates ignored).
    pub fn uniform(keys: impl IntoIterator<Item = K>) -> Self {
        let set: BTreeSet<K> = keys.into_iter().collect();
        let w = Rational::new(1, set.len() as i64);
        Distribution::from_weights(set.into_iter().map(|k| (k, w.clone())))
    }

    pub fn weight(&self, k: &K) -> Rational {
        self.weights.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    /// Keys with strictly positive weight.
    pub fn support(&self) -> impl Iterator<Item = &K> + '_ {
        self.weights
            .iter()
            .filter(|(_, w)| w.is_positive())
            .map(|(k, _)| k)
    }

    pub fn support_set(&self) -> BTreeSet<K> {
        self.support().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Rational)> + '_ {
        self.weights.iter()
    }

    pub fn total(&self) -> Rational {
        self.weights.values().sum()
    }

    pub fn is_probability(&self) -> bool {
        !self.weights.is_empty()
            && self.weights.values().all(|w| !w.is_negative())
            && self.total() == Rational::one()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Pushes the distribution forward along `f`, summing collided weights.
    pub fn map<L: Ord + Clone>(&self, mut f: impl FnMut(&K) -> L) -> Distribution<L> {
        Distribution::from_weights(self.weights.iter().map(|(k, w)| (f(k), w.clone())))
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Distribution::from_weights(self.weights.iter().map(|(k, w)| (k.clone(), w * factor)))
    }
}

/// A set of worlds of one model, identified by index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventSet(BTreeSet<usize>);

impl EventSet {
    pub fn empty() -> Self {
        EventSet(BTreeSet::new())
    }

    pub fn all(n: usize) -> Self {
        EventSet((0..n).collect())
    }

    pub fn contains(&self, w: usize) -> bool {
        self.0.contains(&w)
    }

    pub fn insert(&mut self, w: usize) -> bool {
        self.0.insert(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &EventSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersection(&self, other: &EventSet) -> EventSet {
        EventSet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn union(&self, other: &EventSet) -> EventSet {
        EventSet(self.0.union(&other.0).copied().collect())
    }

    pub fn as_set(&self) -> &BTreeSet<usize> {
        &self.0
    }
}

impl FromIterator<usize> for EventSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        EventSet(iter.into_iter().collect())
    }
}

/// `{w : reach(w) ⊆ event}`, the box operator shared by every belief modality.
pub(crate) fn box_operator<'a, F, I>(n: usize, event: &EventSet, mut reach: F) -> EventSet
where
    F: FnMut(usize) -> I,
    I: Iterator<Item = usize> + 'a,
{
    (0..n)
        .filter(|&w| reach(w).all(|v| event.contains(v)))
        .collect()
}
