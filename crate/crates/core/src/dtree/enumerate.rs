//! Exhaustive enumeration and counting of complete trees within the budget.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{DecisionTree, Node, TreeSpace};

/// All ways to fill `arity` child slots with trees from `by_size` whose sizes
/// add up to exactly `total`.
fn child_tuples(by_size: &[Vec<Node>], arity: usize, total: usize) -> Vec<Vec<Node>> {
    if arity == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        if by_size[first].is_empty() {
            continue;
        }
        let rest = child_tuples(by_size, arity - 1, total - first);
        for head in &by_size[first] {
            for tail in &rest {
                let mut tuple = Vec::with_capacity(arity);
                tuple.push(head.clone());
                tuple.extend(tail.iter().cloned());
                out.push(tuple);
            }
        }
    }
    out
}

fn levels(space: &TreeSpace, max: usize) -> Vec<Vec<Node>> {
    let mut by_size: Vec<Vec<Node>> = Vec::with_capacity(max + 1);
    by_size.push((0..space.labels().len()).map(Node::Leaf).collect());
    for n in 1..=max {
        let mut level = Vec::new();
        for (func, f) in space.functions().iter().enumerate() {
            for children in child_tuples(&by_size, f.branch_count, n - 1) {
                level.push(Node::Internal { func, children });
            }
        }
        by_size.push(level);
    }
    by_size
}

/// Complete trees with exactly `internal` internal nodes.
pub fn exact_size_trees(space: &TreeSpace, internal: usize) -> Vec<DecisionTree> {
    levels(space, internal)
        .pop()
        .unwrap_or_default()
        .into_iter()
        .map(DecisionTree::from_root)
        .collect()
}

/// Every complete tree with at most `budget` internal nodes, ordered by size.
///
/// The result is materialized level by level, so callers should bound the
/// space with [`count_trees`] first.
pub fn enumerate_trees(space: &TreeSpace) -> impl Iterator<Item = DecisionTree> {
    levels(space, space.budget())
        .into_iter()
        .flatten()
        .map(DecisionTree::from_root)
}

/// Number of complete trees with at most `budget` internal nodes.
pub fn count_trees(space: &TreeSpace) -> BigUint {
    let budget = space.budget();
    let mut exact: Vec<BigUint> = vec![BigUint::from(space.labels().len())];
    for n in 1..=budget {
        let mut total = BigUint::zero();
        for f in space.functions() {
            // tuples[s] = number of child tuples of the current arity with total size s
            let mut tuples = vec![BigUint::zero(); n];
            tuples[0] = BigUint::one();
            for _ in 0..f.branch_count {
                let mut next = vec![BigUint::zero(); n];
                for (s, ways) in tuples.iter().enumerate() {
                    if ways.is_zero() {
                        continue;
                    }
                    for (t, count) in exact.iter().enumerate() {
                        if s + t < n {
                            next[s + t] += ways * count;
                        }
                    }
                }
                tuples = next;
            }
            total += &tuples[n - 1];
        }
        exact.push(total);
    }
    exact.into_iter().sum()
}
