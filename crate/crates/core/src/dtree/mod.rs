//! Decision trees over a finite grammar of feature functions and labels.
//!
//! A tree is built from three node kinds: an internal node applies a feature
//! function and branches on its result, a leaf outputs a label, and a hole is
//! an unexpanded non-terminal. Trees without holes are *complete*.

mod enumerate;
mod text;

use std::fmt;

use thiserror::Error;

pub use enumerate::{count_trees, enumerate_trees, exact_size_trees};
pub use text::{ParseError, ParseErrorKind};

/// Textual token reserved for holes.
pub const HOLE_TOKEN: &str = "N";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("a tree space needs at least one function")]
    NoFunctions,
    #[error("a tree space needs at least one label")]
    NoLabels,
    #[error("function `{0}` must have at least two branches")]
    TooFewBranches(String),
    #[error("function `{0}` must have a positive weight")]
    ZeroWeight(String),
    #[error("invalid symbol name `{0}`")]
    BadName(String),
    #[error("symbol `{0}` is declared twice")]
    DuplicateName(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("tree contains holes")]
    Partial,
    #[error("tree references function {0} which is not in the space")]
    UnknownFunction(usize),
    #[error("tree references label {0} which is not in the space")]
    UnknownLabel(usize),
    #[error("node for `{name}` has {found} children, expected {expected}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("row has no value for column {0}")]
    MissingColumn(usize),
    #[error("function `{name}` produced branch {branch} outside 0..{branch_count}")]
    BranchOutOfRange {
        name: String,
        branch: usize,
        branch_count: usize,
    },
}

/// A feature function: reads one encoded column and branches on its value.
///
/// Branch indices are zero-based, so a function with `branch_count` 3 maps
/// every valid row to 0, 1 or 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSpec {
    pub name: String,
    pub branch_count: usize,
    pub weight: u32,
    pub column: usize,
}

impl FunctionSpec {
    pub fn new(name: impl Into<String>, branch_count: usize, weight: u32, column: usize) -> Self {
        Self {
            name: name.into(),
            branch_count,
            weight,
            column,
        }
    }

    /// Branch taken on `row`.
    pub fn branch(&self, row: &[u16]) -> Result<usize, TreeError> {
        let value = *row
            .get(self.column)
            .ok_or(TreeError::MissingColumn(self.column))? as usize;
        if value >= self.branch_count {
            return Err(TreeError::BranchOutOfRange {
                name: self.name.clone(),
                branch: value,
                branch_count: self.branch_count,
            });
        }
        Ok(value)
    }
}

/// The finite interpretation class: functions, labels and a budget on the
/// number of internal nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeSpace {
    functions: Vec<FunctionSpec>,
    labels: Vec<String>,
    budget: usize,
    max_weight: u32,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    name != HOLE_TOKEN
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

impl TreeSpace {
    pub fn new(
        functions: Vec<FunctionSpec>,
        labels: Vec<String>,
        budget: usize,
    ) -> Result<Self, SpaceError> {
        if functions.is_empty() {
            return Err(SpaceError::NoFunctions);
        }
        if labels.is_empty() {
            return Err(SpaceError::NoLabels);
        }
        let mut seen = std::collections::HashSet::new();
        for f in &functions {
            if !valid_name(&f.name) {
                return Err(SpaceError::BadName(f.name.clone()));
            }
            if f.branch_count < 2 {
                return Err(SpaceError::TooFewBranches(f.name.clone()));
            }
            if f.weight == 0 {
                return Err(SpaceError::ZeroWeight(f.name.clone()));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(SpaceError::DuplicateName(f.name.clone()));
            }
        }
        for l in &labels {
            if !valid_name(l) {
                return Err(SpaceError::BadName(l.clone()));
            }
            if !seen.insert(l.as_str()) {
                return Err(SpaceError::DuplicateName(l.clone()));
            }
        }
        let max_weight = functions.iter().map(|f| f.weight).max().unwrap_or(1);
        Ok(Self {
            functions,
            labels,
            budget,
            max_weight,
        })
    }

    pub fn functions(&self) -> &[FunctionSpec] {
        &self.functions
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Largest function weight, `W`.
    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    pub fn max_branches(&self) -> usize {
        self.functions.iter().map(|f| f.branch_count).max().unwrap_or(2)
    }

    /// Number of production rules: one per function, then one per label.
    pub fn rule_count(&self) -> usize {
        self.functions.len() + self.labels.len()
    }

    /// Upper bound on explainability, `B * (W + 1)`.
    pub fn max_explainability(&self) -> u64 {
        self.budget as u64 * (self.max_weight as u64 + 1)
    }

    /// Same space with a different node budget.
    pub fn with_budget(&self, budget: usize) -> Self {
        Self {
            budget,
            ..self.clone()
        }
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.name == name)
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    pub fn parse(&self, text: &str) -> Result<DecisionTree, ParseError> {
        text::parse(self, text)
    }

    pub fn render(&self, tree: &DecisionTree) -> String {
        text::render(self, tree)
    }

    /// Checks that every node refers to declared symbols with the right arity.
    pub fn check(&self, tree: &DecisionTree) -> Result<(), TreeError> {
        fn walk(space: &TreeSpace, node: &Node) -> Result<(), TreeError> {
            match node {
                Node::Hole => Ok(()),
                Node::Leaf(l) if *l < space.labels.len() => Ok(()),
                Node::Leaf(l) => Err(TreeError::UnknownLabel(*l)),
                Node::Internal { func, children } => {
                    let f = space
                        .functions
                        .get(*func)
                        .ok_or(TreeError::UnknownFunction(*func))?;
                    if children.len() != f.branch_count {
                        return Err(TreeError::Arity {
                            name: f.name.clone(),
                            expected: f.branch_count,
                            found: children.len(),
                        });
                    }
                    children.iter().try_for_each(|c| walk(space, c))
                }
            }
        }
        walk(self, &tree.root)
    }
}

/// One node of a (possibly partial) decision tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Internal { func: usize, children: Vec<Node> },
    Leaf(usize),
    Hole,
}

impl Node {
    fn internal_count(&self) -> usize {
        match self {
            Node::Internal { children, .. } => {
                1 + children.iter().map(Node::internal_count).sum::<usize>()
            }
            _ => 0,
        }
    }

    fn hole_count(&self) -> usize {
        match self {
            Node::Internal { children, .. } => children.iter().map(Node::hole_count).sum(),
            Node::Hole => 1,
            Node::Leaf(_) => 0,
        }
    }

    /// Replaces the `index`-th hole (depth-first, left to right). Returns the
    /// number of holes seen if the target was not in this subtree.
    fn replace_hole(&mut self, index: usize, with: &Node) -> Result<(), usize> {
        match self {
            Node::Hole => {
                if index == 0 {
                    *self = with.clone();
                    Ok(())
                } else {
                    Err(1)
                }
            }
            Node::Leaf(_) => Err(0),
            Node::Internal { children, .. } => {
                let mut seen = 0;
                for child in children.iter_mut() {
                    match child.replace_hole(index - seen, with) {
                        Ok(()) => return Ok(()),
                        Err(n) => seen += n,
                    }
                }
                Err(seen)
            }
        }
    }
}

/// A production-rule application on a partial tree: expand hole number `hole`
/// (zero-based, depth-first left-to-right order) with rule `rule`. Rules
/// `0..|F|` are functions; rules `|F|..|F|+|L|` are labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub hole: usize,
    pub rule: usize,
}

impl Action {
    pub fn new(hole: usize, rule: usize) -> Self {
        Self { hole, rule }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.hole, self.rule)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecisionTree {
    root: Node,
}

impl DecisionTree {
    /// The initial partial tree: a single hole.
    pub fn hole() -> Self {
        Self { root: Node::Hole }
    }

    pub fn leaf(label: usize) -> Self {
        Self {
            root: Node::Leaf(label),
        }
    }

    pub fn from_root(root: Node) -> Self {
        Self { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    pub fn is_complete(&self) -> bool {
        self.hole_count() == 0
    }

    pub fn internal_count(&self) -> usize {
        self.root.internal_count()
    }

    pub fn hole_count(&self) -> usize {
        self.root.hole_count()
    }

    /// Number of internal nodes per function index.
    pub fn function_usage(&self, function_count: usize) -> Vec<usize> {
        fn walk(node: &Node, counts: &mut [usize]) {
            if let Node::Internal { func, children } = node {
                counts[*func] += 1;
                children.iter().for_each(|c| walk(c, counts));
            }
        }
        let mut counts = vec![0; function_count];
        walk(&self.root, &mut counts);
        counts
    }

    /// Label produced on `row`. Partial trees are rejected.
    pub fn eval(&self, space: &TreeSpace, row: &[u16]) -> Result<usize, TreeError> {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(l) => return Ok(*l),
                Node::Hole => return Err(TreeError::Partial),
                Node::Internal { func, children } => {
                    let f = space
                        .functions()
                        .get(*func)
                        .ok_or(TreeError::UnknownFunction(*func))?;
                    let branch = f.branch(row)?;
                    node = children.get(branch).ok_or_else(|| TreeError::Arity {
                        name: f.name.clone(),
                        expected: f.branch_count,
                        found: children.len(),
                    })?;
                }
            }
        }
    }

    /// Applies a production rule to the `action.hole`-th hole. When the tree
    /// has fewer holes, the tree is returned unchanged.
    ///
    /// Panics if `action.rule` is not a rule of `space`.
    pub fn apply_action(&self, space: &TreeSpace, action: Action) -> DecisionTree {
        assert!(
            action.rule < space.rule_count(),
            "rule {} out of range for {} rules",
            action.rule,
            space.rule_count()
        );
        let fcount = space.functions().len();
        let replacement = if action.rule < fcount {
            Node::Internal {
                func: action.rule,
                children: vec![Node::Hole; space.functions()[action.rule].branch_count],
            }
        } else {
            Node::Leaf(action.rule - fcount)
        };
        let mut next = self.clone();
        match next.root.replace_hole(action.hole, &replacement) {
            Ok(()) => next,
            Err(_) => self.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig1a_space(budget: usize) -> TreeSpace {
        TreeSpace::new(
            vec![
                FunctionSpec::new("clouds", 3, 1, 0),
                FunctionSpec::new("time", 2, 4, 1),
                FunctionSpec::new("pos", 2, 3, 2),
            ],
            vec!["alert".into(), "no_alert".into()],
            budget,
        )
        .unwrap()
    }

    const FIG1A: &str = "clouds[alert,time[pos[alert,no_alert],alert],time[alert,no_alert]]";

    fn small_space() -> TreeSpace {
        TreeSpace::new(
            vec![FunctionSpec::new("f1", 2, 1, 0)],
            vec!["l1".into(), "l2".into()],
            1,
        )
        .unwrap()
    }

    #[test]
    fn fig1a_eval() {
        let space = fig1a_space(5);
        let tree = space.parse(FIG1A).unwrap();
        // clouds -> first branch goes straight to "alert"
        assert_eq!(tree.eval(&space, &[0, 1, 1]).unwrap(), 0);
        // clouds -> third branch, time -> second branch
        assert_eq!(tree.eval(&space, &[2, 1, 0]).unwrap(), 1);
        assert_eq!(tree.eval(&space, &[1, 0, 1]).unwrap(), 1);
        assert_eq!(tree.internal_count(), 4);
        assert_eq!(tree.hole_count(), 0);
    }

    #[test]
    fn leaf_eval_ignores_row() {
        let space = small_space();
        let tree = DecisionTree::leaf(0);
        assert_eq!(tree.eval(&space, &[1]).unwrap(), 0);
        assert_eq!(tree.eval(&space, &[0]).unwrap(), 0);
    }

    #[test]
    fn partial_tree_eval_rejected() {
        let space = small_space();
        let tree = space.parse("f1[N,l2]").unwrap();
        assert_eq!(tree.eval(&space, &[0]), Err(TreeError::Partial));
        assert_eq!(tree.eval(&space, &[1]).unwrap(), 1);
    }

    #[test]
    fn counts() {
        let space = small_space();
        let leaf = space.parse("l1").unwrap();
        assert_eq!((leaf.internal_count(), leaf.hole_count()), (0, 0));
        let partial = space.parse("f1[N,l2]").unwrap();
        assert_eq!((partial.internal_count(), partial.hole_count()), (1, 1));
    }

    #[test]
    fn apply_action_cases() {
        let space = small_space();
        let start = DecisionTree::hole();
        let s1 = start.apply_action(&space, Action::new(0, 0));
        assert_eq!(space.render(&s1), "f1[N,N]");
        // Only two holes: the third is out of range and the state loops.
        let same = s1.apply_action(&space, Action::new(2, 1));
        assert_eq!(same, s1);
        let s2 = s1.apply_action(&space, Action::new(1, 1));
        assert_eq!(space.render(&s2), "f1[N,l1]");
        let s3 = s2.apply_action(&space, Action::new(0, 2));
        assert_eq!(space.render(&s3), "f1[l2,l1]");
        assert!(s3.is_complete());
        // complete trees have no holes to expand
        assert_eq!(s3.apply_action(&space, Action::new(0, 0)), s3);
    }

    #[test]
    #[should_panic]
    fn apply_action_bad_rule_panics() {
        let space = small_space();
        DecisionTree::hole().apply_action(&space, Action::new(0, 3));
    }

    #[test]
    fn space_validation() {
        let f = |n: &str, b, w| FunctionSpec::new(n, b, w, 0);
        let labels = vec!["a".to_string()];
        assert_eq!(
            TreeSpace::new(vec![], labels.clone(), 1),
            Err(SpaceError::NoFunctions)
        );
        assert_eq!(
            TreeSpace::new(vec![f("g", 2, 1)], vec![], 1),
            Err(SpaceError::NoLabels)
        );
        assert_eq!(
            TreeSpace::new(vec![f("g", 1, 1)], labels.clone(), 1),
            Err(SpaceError::TooFewBranches("g".into()))
        );
        assert_eq!(
            TreeSpace::new(vec![f("g", 2, 0)], labels.clone(), 1),
            Err(SpaceError::ZeroWeight("g".into()))
        );
        assert_eq!(
            TreeSpace::new(vec![f("N", 2, 1)], labels.clone(), 1),
            Err(SpaceError::BadName("N".into()))
        );
        assert_eq!(
            TreeSpace::new(vec![f("a", 2, 1)], labels, 1),
            Err(SpaceError::DuplicateName("a".into()))
        );
        let s = fig1a_space(5);
        assert_eq!(s.max_weight(), 4);
        assert_eq!(s.max_branches(), 3);
        assert_eq!(s.max_explainability(), 25);
    }

    #[test]
    fn function_usage_counts() {
        let space = fig1a_space(5);
        let tree = space.parse(FIG1A).unwrap();
        assert_eq!(tree.function_usage(3), vec![1, 2, 1]);
    }
}
