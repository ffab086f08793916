use crate::dtree::DecisionTree;
use crate::measures::GoodnessTuple;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchiveEntry {
    pub tree: DecisionTree,
    pub goodness: GoodnessTuple,
}

/// Mutually incomparable `(tree, goodness)` pairs, at most one per goodness
/// tuple.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<ArchiveEntry> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn goodness_set(&self) -> Vec<GoodnessTuple> {
        let mut set: Vec<_> = self.entries.iter().map(|e| e.goodness).collect();
        set.sort_by_key(|g| (g.correct, g.explainability));
        set
    }

    /// Whether some entry has goodness `g'` with `goodness ⪯ g'`.
    pub fn covers(&self, goodness: &GoodnessTuple) -> bool {
        self.entries.iter().any(|e| goodness.weakly_below(&e.goodness))
    }

    /// Inserts unless an entry is at least as good; drops entries the new one
    /// strictly dominates. Returns whether the archive changed.
    pub fn insert(&mut self, tree: DecisionTree, goodness: GoodnessTuple) -> bool {
        if self.covers(&goodness) {
            return false;
        }
        self.entries.retain(|e| !e.goodness.strictly_below(&goodness));
        self.entries.push(ArchiveEntry { tree, goodness });
        debug_assert!(self.is_antichain());
        true
    }

    /// Removes and returns entries matching `pred`.
    pub fn extract_if(&mut self, mut pred: impl FnMut(&ArchiveEntry) -> bool) -> Vec<ArchiveEntry> {
        let (taken, kept) = std::mem::take(&mut self.entries)
            .into_iter()
            .partition(|e| pred(e));
        self.entries = kept;
        taken
    }

    pub fn remove(&mut self, index: usize) -> ArchiveEntry {
        self.entries.remove(index)
    }

    pub fn is_antichain(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, a)| {
            self.entries.iter().enumerate().all(|(j, b)| {
                i == j || (!a.goodness.strictly_below(&b.goodness) && a.goodness != b.goodness)
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn g(c: u64, e: u64) -> GoodnessTuple {
        GoodnessTuple::new(c, e)
    }

    fn with(points: &[(u64, u64)]) -> ParetoArchive {
        let mut a = ParetoArchive::new();
        for (i, &(c, e)) in points.iter().enumerate() {
            a.insert(DecisionTree::leaf(i), g(c, e));
        }
        a
    }

    #[test]
    fn dominated_insert_is_ignored() {
        let mut a = with(&[(6, 11)]);
        assert!(!a.insert(DecisionTree::leaf(9), g(5, 10)));
        assert_eq!(a.goodness_set(), vec![g(6, 11)]);
    }

    #[test]
    fn dominator_replaces() {
        let mut a = with(&[(6, 11)]);
        assert!(a.insert(DecisionTree::leaf(9), g(7, 12)));
        assert_eq!(a.goodness_set(), vec![g(7, 12)]);
    }

    #[test]
    fn incomparable_coexist() {
        let mut a = with(&[(5, 10)]);
        assert!(a.insert(DecisionTree::leaf(9), g(6, 9)));
        assert_eq!(a.goodness_set(), vec![g(5, 10), g(6, 9)]);
    }

    #[test]
    fn equal_keeps_incumbent() {
        let mut a = with(&[(5, 10)]);
        assert!(!a.insert(DecisionTree::leaf(9), g(5, 10)));
        assert_eq!(a.entries()[0].tree, DecisionTree::leaf(0));
    }

    proptest! {
        #[test]
        fn antichain_and_monotone(points in proptest::collection::vec((0u64..8, 0u64..8), 0..40)) {
            let mut a = ParetoArchive::new();
            for (i, &(c, e)) in points.iter().enumerate() {
                let before = a.clone();
                a.insert(DecisionTree::leaf(i), g(c, e));
                prop_assert!(a.is_antichain());
                for old in before.entries() {
                    prop_assert!(a.covers(&old.goodness));
                }
                prop_assert!(a.covers(&g(c, e)));
            }
            // result is exactly the maximal elements of the inserted set
            let mut maximal: Vec<_> = points
                .iter()
                .map(|&(c, e)| g(c, e))
                .filter(|p| !points.iter().any(|&(c, e)| p.strictly_below(&g(c, e))))
                .collect();
            maximal.sort_by_key(|p| (p.correct, p.explainability));
            maximal.dedup();
            prop_assert_eq!(a.goodness_set(), maximal);
        }
    }
}
