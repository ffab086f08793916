//! Deterministic multi-objective MDP over partial trees.
//!
//! States are partial trees, actions expand one hole with one production rule,
//! and the two-dimensional reward is the goodness of the tree reached when it
//! becomes complete (zero otherwise).

use crate::dtree::{Action, DecisionTree, TreeSpace};
use crate::measures::{goodness, Dataset, GoodnessTuple};

/// Action-set restrictions. All default to on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Restrictions {
    /// Only expand the first hole.
    pub first_hole_only: bool,
    /// Drop actions whose hole index exceeds the hole count (self-loops).
    pub skip_self_loops: bool,
    /// Forbid label rules on the initial state, so single-leaf trees are
    /// never produced.
    pub no_root_labels: bool,
}

impl Default for Restrictions {
    fn default() -> Self {
        Self {
            first_hole_only: true,
            skip_self_loops: true,
            no_root_labels: true,
        }
    }
}

impl Restrictions {
    /// The unrestricted action set.
    pub fn none() -> Self {
        Self {
            first_hole_only: false,
            skip_self_loops: false,
            no_root_labels: false,
        }
    }
}

/// Upper bound on the number of holes of a partial tree within budget.
pub fn max_holes(space: &TreeSpace) -> usize {
    1 + space.budget() * (space.max_branches() - 1)
}

pub struct MoMdp<'a> {
    space: &'a TreeSpace,
    data: &'a Dataset,
    n_max: usize,
    restrictions: Restrictions,
}

impl<'a> MoMdp<'a> {
    pub fn new(space: &'a TreeSpace, data: &'a Dataset, restrictions: Restrictions) -> Self {
        Self {
            space,
            data,
            n_max: max_holes(space),
            restrictions,
        }
    }

    pub fn space(&self) -> &'a TreeSpace {
        self.space
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn restrictions(&self) -> Restrictions {
        self.restrictions
    }

    /// Bound on the hole index of an action.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn initial_state(&self) -> DecisionTree {
        DecisionTree::hole()
    }

    /// Actions available in `state`, in ascending `(hole, rule)` order.
    pub fn legal_actions(&self, state: &DecisionTree) -> Vec<Action> {
        let holes = state.hole_count();
        if holes == 0 {
            return Vec::new();
        }
        let fcount = self.space.functions().len();
        let rules = self.space.rule_count();
        let can_grow = state.internal_count() < self.space.budget();
        let is_initial = holes == 1 && state.internal_count() == 0;
        let hole_bound = if self.restrictions.first_hole_only {
            1
        } else if self.restrictions.skip_self_loops {
            holes
        } else {
            self.n_max
        };
        let mut actions = Vec::new();
        for hole in 0..hole_bound {
            for rule in 0..rules {
                let is_function = rule < fcount;
                if is_function && !can_grow {
                    continue;
                }
                if !is_function && is_initial && self.restrictions.no_root_labels {
                    continue;
                }
                actions.push(Action::new(hole, rule));
            }
        }
        actions
    }

    /// Deterministic transition. The reward is the goodness of the successor
    /// when it is complete and `(0, 0)` otherwise.
    ///
    /// Panics if `action` is not legal in `state`.
    pub fn step(&self, state: &DecisionTree, action: Action) -> (DecisionTree, GoodnessTuple) {
        assert!(
            self.is_legal(state, action),
            "illegal action {action} in state {}",
            self.space.render(state)
        );
        let next = state.apply_action(self.space, action);
        let reward = self.reward(&next);
        (next, reward)
    }

    pub fn is_legal(&self, state: &DecisionTree, action: Action) -> bool {
        self.legal_actions(state).contains(&action)
    }

    /// Terminal reward of a state, `(0, 0)` for partial trees.
    pub fn reward(&self, state: &DecisionTree) -> GoodnessTuple {
        if state.is_complete() {
            goodness(state, self.space, self.data).expect("states stay within budget")
        } else {
            GoodnessTuple::new(0, 0)
        }
    }
}
