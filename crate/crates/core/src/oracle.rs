//! Brute-force reference answers for small spaces: every rooted tree is
//! enumerated and scored, and fronts and LPO sets are read off directly.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;

use crate::dtree::{count_trees, enumerate_trees, DecisionTree, TreeSpace};
use crate::measures::{goodness, Dataset, GoodnessTuple};
use crate::momcts::ArchiveEntry;

/// Refuse to enumerate spaces larger than this.
pub const ORACLE_LIMIT: u64 = 2_000_000;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("space has {count} trees, the oracle enumerates at most {limit}")]
pub struct TooLarge {
    pub count: BigUint,
    pub limit: u64,
}

/// Every tree with at least one internal node, scored, keyed by goodness.
/// Each goodness tuple keeps its lexicographically smallest tree text.
#[derive(Debug, Clone)]
pub struct Oracle {
    samples: u64,
    max_explainability: u64,
    best: BTreeMap<GoodnessTuple, (String, DecisionTree)>,
    trees: usize,
}

impl Oracle {
    pub fn build(space: &TreeSpace, data: &Dataset) -> Result<Self, TooLarge> {
        let count = count_trees(space);
        if count > BigUint::from(ORACLE_LIMIT) {
            return Err(TooLarge {
                count,
                limit: ORACLE_LIMIT,
            });
        }
        let mut best: BTreeMap<GoodnessTuple, (String, DecisionTree)> = BTreeMap::new();
        let mut trees = 0;
        for tree in enumerate_trees(space).filter(|t| t.internal_count() > 0) {
            trees += 1;
            let g = goodness(&tree, space, data).expect("enumerated trees are in budget");
            let text = space.render(&tree);
            match best.get(&g) {
                Some((old, _)) if *old <= text => {}
                _ => {
                    best.insert(g, (text, tree));
                }
            }
        }
        Ok(Self {
            samples: data.len() as u64,
            max_explainability: space.max_explainability(),
            best,
            trees,
        })
    }

    /// Number of rooted trees enumerated.
    pub fn tree_count(&self) -> usize {
        self.trees
    }

    /// Distinct goodness tuples reached by some rooted tree.
    pub fn goodness_set(&self) -> impl Iterator<Item = &GoodnessTuple> {
        self.best.keys()
    }

    pub fn representative(&self, g: &GoodnessTuple) -> Option<&DecisionTree> {
        self.best.get(g).map(|(_, t)| t)
    }

    fn entries(&self, set: &BTreeSet<GoodnessTuple>) -> Vec<ArchiveEntry> {
        set.iter()
            .map(|g| ArchiveEntry {
                tree: self.best[g].1.clone(),
                goodness: *g,
            })
            .collect()
    }

    /// Whether no reachable tuple lies in `(g, g + slack]`.
    pub fn is_lpo(&self, g: &GoodnessTuple, delta_count: u64, delta_e: u64) -> bool {
        let high = GoodnessTuple::new(
            (g.correct + delta_count).min(self.samples),
            (g.explainability + delta_e).min(self.max_explainability),
        );
        !self
            .best
            .keys()
            .any(|h| g.strictly_below(h) && h.weakly_below(&high))
    }

    /// Global Pareto front.
    pub fn front(&self) -> BTreeSet<GoodnessTuple> {
        maximal(self.best.keys().copied())
    }

    /// Every reachable tuple that is LPO for the slack.
    pub fn lpo_set(&self, delta_count: u64, delta_e: u64) -> BTreeSet<GoodnessTuple> {
        self.best
            .keys()
            .filter(|g| self.is_lpo(g, delta_count, delta_e))
            .copied()
            .collect()
    }

    /// Mutually incomparable LPO tuples: the maximal elements of the LPO set.
    pub fn incomparable_lpo(&self, delta_count: u64, delta_e: u64) -> BTreeSet<GoodnessTuple> {
        maximal(self.lpo_set(delta_count, delta_e))
    }

    pub fn front_entries(&self) -> Vec<ArchiveEntry> {
        self.entries(&self.front())
    }

    pub fn incomparable_lpo_entries(&self, delta_count: u64, delta_e: u64) -> Vec<ArchiveEntry> {
        self.entries(&self.incomparable_lpo(delta_count, delta_e))
    }
}

/// Elements not strictly below any other element.
pub fn maximal(set: impl IntoIterator<Item = GoodnessTuple>) -> BTreeSet<GoodnessTuple> {
    let all: Vec<GoodnessTuple> = set.into_iter().collect();
    all.iter()
        .filter(|g| !all.iter().any(|h| g.strictly_below(h)))
        .copied()
        .collect()
}
