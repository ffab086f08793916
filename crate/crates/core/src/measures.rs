//! Correctness and explainability of trees, the goodness ordering, and the
//! sample size needed for a PAC estimate of correctness.

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtree::{DecisionTree, TreeError, TreeSpace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("row {row}: {source}")]
    BadRow { row: usize, source: TreeError },
    #[error("row {row}: label {label} is not declared")]
    BadLabel { row: usize, label: usize },
    #[error("tree has {internal} internal nodes, budget is {budget}")]
    OverBudget { internal: usize, budget: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("PAC parameters must lie strictly inside (0, 1): epsilon={epsilon}, delta={delta}")]
    BadPac { epsilon: f64, delta: f64 },
}

/// One labeled sample: encoded feature columns and the black box's label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub features: Vec<u16>,
    pub label: usize,
}

/// Labeled samples drawn from the black box, validated against a space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    rows: Vec<Sample>,
}

impl Dataset {
    pub fn new(space: &TreeSpace, rows: Vec<Sample>) -> Result<Self, MeasureError> {
        if rows.is_empty() {
            return Err(MeasureError::EmptyDataset);
        }
        for (i, row) in rows.iter().enumerate() {
            for f in space.functions() {
                f.branch(&row.features)
                    .map_err(|source| MeasureError::BadRow { row: i, source })?;
            }
            if row.label >= space.labels().len() {
                return Err(MeasureError::BadLabel {
                    row: i,
                    label: row.label,
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Sample] {
        &self.rows
    }

    /// Number of samples, `K`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Correctness (as a sample count) and explainability of one tree. Larger is
/// better on both axes. `Ord` is lexicographic and only used for sorting;
/// dominance is [`GoodnessTuple::strictly_below`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GoodnessTuple {
    pub correct: u64,
    pub explainability: u64,
}

/// Outcome of comparing `a` against `b` under the strict product order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    StrictlyDominates,
    EqualOrIncomparable,
    Dominated,
}

impl GoodnessTuple {
    pub fn new(correct: u64, explainability: u64) -> Self {
        Self {
            correct,
            explainability,
        }
    }

    /// `self ⪯ other`: no worse on either axis.
    pub fn weakly_below(&self, other: &Self) -> bool {
        self.correct <= other.correct && self.explainability <= other.explainability
    }

    /// `self ≺ other`: weakly below and strictly worse on one axis.
    pub fn strictly_below(&self, other: &Self) -> bool {
        self.weakly_below(other) && self != other
    }

    pub fn compare(&self, other: &Self) -> Dominance {
        if other.strictly_below(self) {
            Dominance::StrictlyDominates
        } else if self.strictly_below(other) {
            Dominance::Dominated
        } else {
            Dominance::EqualOrIncomparable
        }
    }

    pub fn fraction(&self, samples: usize) -> f64 {
        self.correct as f64 / samples as f64
    }
}

impl fmt::Display for GoodnessTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.correct, self.explainability)
    }
}

/// Compares two tuples; see [`GoodnessTuple::compare`].
pub fn dominates(a: &GoodnessTuple, b: &GoodnessTuple) -> Dominance {
    a.compare(b)
}

/// Number of samples the tree labels the same way as the black box.
pub fn correctness(
    tree: &DecisionTree,
    space: &TreeSpace,
    data: &Dataset,
) -> Result<u64, TreeError> {
    if !tree.is_complete() {
        return Err(TreeError::Partial);
    }
    let mut count = 0;
    for row in data.rows() {
        if tree.eval(space, &row.features)? == row.label {
            count += 1;
        }
    }
    Ok(count)
}

/// `(B - m)(W + 1) + Σ weight(node)` over the `m` internal nodes.
pub fn explainability(tree: &DecisionTree, space: &TreeSpace) -> Result<u64, MeasureError> {
    if !tree.is_complete() {
        return Err(TreeError::Partial.into());
    }
    let internal = tree.internal_count();
    if internal > space.budget() {
        return Err(MeasureError::OverBudget {
            internal,
            budget: space.budget(),
        });
    }
    let unused = (space.budget() - internal) as u64 * (space.max_weight() as u64 + 1);
    let used: u64 = tree
        .function_usage(space.functions().len())
        .iter()
        .zip(space.functions())
        .map(|(&n, f)| n as u64 * f.weight as u64)
        .sum();
    Ok(unused + used)
}

pub fn goodness(
    tree: &DecisionTree,
    space: &TreeSpace,
    data: &Dataset,
) -> Result<GoodnessTuple, MeasureError> {
    Ok(GoodnessTuple::new(
        correctness(tree, space, data)?,
        explainability(tree, space)?,
    ))
}

/// Tolerance `epsilon` and confidence `1 - delta` of the correctness estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacParams {
    epsilon: f64,
    delta: f64,
}

impl PacParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self, MeasureError> {
        let inside = |x: f64| x > 0.0 && x < 1.0;
        if !inside(epsilon) || !inside(delta) {
            return Err(MeasureError::BadPac { epsilon, delta });
        }
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Default for PacParams {
    fn default() -> Self {
        Self {
            epsilon: 0.25,
            delta: 0.1,
        }
    }
}

fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::MAX);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Hoeffding sample size for a finite class of `class_size` hypotheses:
/// `ceil(ln(2 |G| / delta) / (2 epsilon^2))`.
pub fn sample_complexity_for_count(class_size: &BigUint, pac: PacParams) -> u64 {
    let log_term = std::f64::consts::LN_2 + ln_big(class_size) - pac.delta.ln();
    (log_term / (2.0 * pac.epsilon * pac.epsilon)).ceil() as u64
}

pub fn sample_complexity(space: &TreeSpace, pac: PacParams) -> u64 {
    sample_complexity_for_count(&crate::dtree::count_trees(space), pac)
}

/// Tolerance guaranteed by `samples` rows at confidence `1 - delta`.
pub fn achieved_epsilon(class_size: &BigUint, delta: f64, samples: usize) -> f64 {
    let log_term = std::f64::consts::LN_2 + ln_big(class_size) - delta.ln();
    (log_term / (2.0 * samples as f64)).sqrt()
}
