//! CNF encoding of "some tree in the space has goodness strictly above
//! `(c_lo, e_lo)` and at most `(c_hi, e_hi)`", and decoding of models back
//! into trees.
//!
//! Internal nodes are numbered `0..B` in a topological order with node 0 as
//! the root. Each node gets exactly one function; each branch of a node's
//! function points to exactly one later node or label; every node has at most
//! one incoming edge. Nodes unreachable from the root are unused and count
//! `W + 1` towards explainability. Because the root is always used, trees
//! with zero internal nodes are not expressible.

mod card;
mod formula;
mod varmap;

use thiserror::Error;

use crate::dtree::{DecisionTree, Node, TreeSpace};
use crate::measures::{goodness, Dataset, GoodnessTuple};

pub use card::{at_most_one, exactly_one, Totalizer, WeightedCounter};
pub use formula::{Assignment, Bit, Cnf, Lit};
pub use varmap::{Target, VarMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("the encoding needs a node budget of at least 1")]
    ZeroBudget,
    #[error("invalid window {0:?}")]
    BadWindow(Window),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("model does not satisfy the instance")]
    Unsatisfied,
    #[error("node {node} has {count} functions assigned")]
    FunctionCount { node: usize, count: usize },
    #[error("branch {branch} of node {node} has {count} targets")]
    TargetCount {
        node: usize,
        branch: usize,
        count: usize,
    },
    #[error("node {0} is reached twice")]
    SharedNode(usize),
    #[error("decoded goodness {goodness} lies outside window {window:?}")]
    OutsideWindow {
        goodness: GoodnessTuple,
        window: Window,
    },
}

/// Goodness window `(c_lo, e_lo) ≺ g ⪯ (c_hi, e_hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Window {
    pub c_lo: u64,
    pub e_lo: u64,
    pub c_hi: u64,
    pub e_hi: u64,
}

impl Window {
    pub fn new(
        c_lo: u64,
        e_lo: u64,
        c_hi: u64,
        e_hi: u64,
        samples: usize,
        max_explainability: u64,
    ) -> Result<Self, CnfError> {
        let w = Self {
            c_lo,
            e_lo,
            c_hi,
            e_hi,
        };
        if c_lo > c_hi || c_hi > samples as u64 || e_lo > e_hi || e_hi > max_explainability {
            return Err(CnfError::BadWindow(w));
        }
        Ok(w)
    }

    /// Window of slack `(dc, de)` above `g`, clipped to the axis maxima.
    pub fn above(g: GoodnessTuple, dc: u64, de: u64, samples: usize, max_explainability: u64) -> Self {
        Self {
            c_lo: g.correct,
            e_lo: g.explainability,
            c_hi: (g.correct + dc).min(samples as u64).max(g.correct),
            e_hi: (g.explainability + de)
                .min(max_explainability)
                .max(g.explainability),
        }
    }

    pub fn low(&self) -> GoodnessTuple {
        GoodnessTuple::new(self.c_lo, self.e_lo)
    }

    pub fn high(&self) -> GoodnessTuple {
        GoodnessTuple::new(self.c_hi, self.e_hi)
    }

    /// Whether `g` strictly dominates the low corner and is weakly below the
    /// high corner.
    pub fn admits(&self, g: &GoodnessTuple) -> bool {
        self.low().strictly_below(g) && g.weakly_below(&self.high())
    }
}

/// A built formula together with its variable map and window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfInstance {
    pub cnf: Cnf,
    pub vars: VarMap,
    pub window: Window,
}

/// Incremental builder for the sub-formulas. Correctness and explainability
/// counters are created on first use and shared between the bound and
/// dominance constraints.
pub struct Encoder<'a> {
    space: &'a TreeSpace,
    data: &'a Dataset,
    cnf: Cnf,
    vars: VarMap,
    correct: Option<Totalizer>,
    explain: Option<WeightedCounter>,
}

impl<'a> Encoder<'a> {
    pub fn new(space: &'a TreeSpace, data: &'a Dataset) -> Result<Self, CnfError> {
        if space.budget() == 0 {
            return Err(CnfError::ZeroBudget);
        }
        let mut cnf = Cnf::new();
        let vars = VarMap::structural(&mut cnf, space);
        Ok(Self {
            space,
            data,
            cnf,
            vars,
            correct: None,
            explain: None,
        })
    }

    pub fn cnf(&self) -> &Cnf {
        &self.cnf
    }

    pub fn vars(&self) -> &VarMap {
        &self.vars
    }

    /// One function per node, one target per live branch, no target on dead
    /// branches, at most one incoming edge per node.
    pub fn build_syntax(&mut self) {
        let fns = self.space.functions();
        for i in 0..self.vars.budget() {
            exactly_one(&mut self.cnf, &self.vars.lambda[i]);
            for c in 0..self.space.max_branches() {
                let targets: Vec<Lit> = self.vars.tau[i][c].iter().map(|&(_, l)| l).collect();
                at_most_one(&mut self.cnf, &targets);
                for (p, f) in fns.iter().enumerate() {
                    let lam = self.vars.lambda[i][p];
                    if c < f.branch_count {
                        let mut clause = vec![!lam];
                        clause.extend(&targets);
                        self.cnf.add_clause(clause);
                    } else {
                        for &t in &targets {
                            self.cnf.add_clause(vec![!lam, !t]);
                        }
                    }
                }
            }
        }
        for j in 1..self.vars.budget() {
            let incoming = self.vars.incoming(j);
            at_most_one(&mut self.cnf, &incoming);
        }
    }

    fn correctness_counter(&mut self) -> &Totalizer {
        if self.correct.is_none() {
            let budget = self.vars.budget();
            let k = self.data.len();
            self.vars.m = (0..budget)
                .map(|_| (0..k).map(|_| self.cnf.new_var()).collect())
                .collect();
            for i in 0..budget {
                for (s, sample) in self.data.rows().iter().enumerate() {
                    let here = self.vars.m[i][s];
                    for (p, f) in self.space.functions().iter().enumerate() {
                        let lam = self.vars.lambda[i][p];
                        let c = f.branch(&sample.features).expect("dataset validated");
                        for &(target, tau) in &self.vars.tau[i][c] {
                            let there = match target {
                                Target::Node(j) => Bit::Lit(self.vars.m[j][s]),
                                Target::Label(l) => Bit::constant(l == sample.label),
                            };
                            let guard = [Bit::Lit(!lam), Bit::Lit(!tau)];
                            self.cnf
                                .add_bits(&[guard[0], guard[1], Bit::Lit(!here), there]);
                            self.cnf
                                .add_bits(&[guard[0], guard[1], Bit::Lit(here), !there]);
                        }
                    }
                }
            }
            let roots: Vec<Lit> = self.vars.m[0].clone();
            self.correct = Some(Totalizer::build(&mut self.cnf, &roots));
        }
        self.correct.as_ref().unwrap()
    }

    fn explainability_counter(&mut self) -> &WeightedCounter {
        if self.explain.is_none() {
            let budget = self.vars.budget();
            let fcount = self.space.functions().len();
            self.vars.u = (0..budget).map(|_| self.cnf.new_var()).collect();
            self.vars.ubar = (0..budget).map(|_| self.cnf.new_var()).collect();
            self.vars.lambda_prime = (0..budget)
                .map(|_| (0..fcount).map(|_| self.cnf.new_var()).collect())
                .collect();
            let u = self.vars.u.clone();
            self.cnf.add_clause(vec![u[0]]);
            for i in 1..budget {
                let mut reasons = Vec::new();
                for parent in 0..i {
                    for branch in &self.vars.tau[parent] {
                        for &(t, tau) in branch {
                            if t == Target::Node(i) {
                                let z = self.cnf.new_var();
                                self.cnf.add_clause(vec![!z, tau]);
                                self.cnf.add_clause(vec![!z, u[parent]]);
                                self.cnf.add_clause(vec![!tau, !u[parent], z]);
                                self.cnf.add_clause(vec![!z, u[i]]);
                                reasons.push(z);
                            }
                        }
                    }
                }
                let mut clause = vec![!u[i]];
                clause.extend(reasons);
                self.cnf.add_clause(clause);
            }
            for i in 0..budget {
                let ubar = self.vars.ubar[i];
                self.cnf.add_clause(vec![u[i], ubar]);
                self.cnf.add_clause(vec![!u[i], !ubar]);
                for p in 0..fcount {
                    let lp = self.vars.lambda_prime[i][p];
                    let lam = self.vars.lambda[i][p];
                    self.cnf.add_clause(vec![!lp, lam]);
                    self.cnf.add_clause(vec![!lp, u[i]]);
                    self.cnf.add_clause(vec![!lam, !u[i], lp]);
                }
            }
            let unused_weight = self.space.max_weight() as u64 + 1;
            let mut items = Vec::new();
            for i in 0..budget {
                for (p, f) in self.space.functions().iter().enumerate() {
                    items.push((self.vars.lambda_prime[i][p], f.weight as u64));
                }
                items.push((self.vars.ubar[i], unused_weight));
            }
            self.explain = Some(WeightedCounter::build(&mut self.cnf, &items));
        }
        self.explain.as_ref().unwrap()
    }

    /// `c_lo <= C <= c_hi` over the correctly classified sample count.
    pub fn build_corr(&mut self, c_lo: u64, c_hi: u64) {
        let k = self.data.len() as u64;
        if c_lo == 0 && c_hi >= k {
            // bounds are vacuous; definitions still come with the counter
            self.correctness_counter();
            return;
        }
        let (lo, hi) = {
            let t = self.correctness_counter();
            (t.at_least(c_lo as i64), t.at_least(c_hi as i64 + 1))
        };
        self.cnf.add_bits(&[lo]);
        self.cnf.add_bits(&[!hi]);
    }

    /// `e_lo <= E <= e_hi` over the weighted explainability sum.
    pub fn build_exp(&mut self, e_lo: u64, e_hi: u64) {
        let (lo, hi) = {
            let w = self.explainability_counter();
            (w.at_least(e_lo as i64), w.at_least(e_hi as i64 + 1))
        };
        self.cnf.add_bits(&[lo]);
        self.cnf.add_bits(&[!hi]);
    }

    /// `(c, e) ≺ (C, E)`: either `C > c ∧ E >= e` or `C >= c ∧ E > e`.
    pub fn build_dominance(&mut self, c: u64, e: u64) {
        let (c_ge, c_gt) = {
            let t = self.correctness_counter();
            (t.at_least(c as i64), t.at_least(c as i64 + 1))
        };
        let (e_ge, e_gt) = {
            let w = self.explainability_counter();
            (w.at_least(e as i64), w.at_least(e as i64 + 1))
        };
        let first = self.cnf.new_var();
        let second = self.cnf.new_var();
        self.cnf.add_clause(vec![first, second]);
        self.cnf.add_bits(&[Bit::Lit(!first), c_gt]);
        self.cnf.add_bits(&[Bit::Lit(!first), e_ge]);
        self.cnf.add_bits(&[Bit::Lit(!second), c_ge]);
        self.cnf.add_bits(&[Bit::Lit(!second), e_gt]);
    }

    pub fn finish(self, window: Window) -> CnfInstance {
        CnfInstance {
            cnf: self.cnf,
            vars: self.vars,
            window,
        }
    }
}

/// Full formula for `window`: syntax, correctness and explainability bounds,
/// and strict dominance of the low corner.
pub fn build_phi(
    space: &TreeSpace,
    data: &Dataset,
    window: Window,
) -> Result<CnfInstance, CnfError> {
    let mut enc = Encoder::new(space, data)?;
    enc.build_syntax();
    enc.build_corr(window.c_lo, window.c_hi);
    enc.build_exp(window.e_lo, window.e_hi);
    enc.build_dominance(window.c_lo, window.e_lo);
    Ok(enc.finish(window))
}

/// Tree described by the function and edge variables reachable from node 0.
pub fn decode_tree(
    model: &Assignment,
    vars: &VarMap,
    space: &TreeSpace,
) -> Result<DecisionTree, DecodeError> {
    fn node(
        i: usize,
        model: &Assignment,
        vars: &VarMap,
        space: &TreeSpace,
        seen: &mut Vec<bool>,
    ) -> Result<Node, DecodeError> {
        if std::mem::replace(&mut seen[i], true) {
            return Err(DecodeError::SharedNode(i));
        }
        let chosen: Vec<usize> = (0..vars.lambda[i].len())
            .filter(|&p| model.lit(vars.lambda[i][p]))
            .collect();
        if chosen.len() != 1 {
            return Err(DecodeError::FunctionCount {
                node: i,
                count: chosen.len(),
            });
        }
        let func = chosen[0];
        let mut children = Vec::new();
        for c in 0..space.functions()[func].branch_count {
            let targets: Vec<Target> = vars.tau[i][c]
                .iter()
                .filter(|(_, l)| model.lit(*l))
                .map(|(t, _)| *t)
                .collect();
            if targets.len() != 1 {
                return Err(DecodeError::TargetCount {
                    node: i,
                    branch: c,
                    count: targets.len(),
                });
            }
            children.push(match targets[0] {
                Target::Label(l) => Node::Leaf(l),
                Target::Node(j) => node(j, model, vars, space, seen)?,
            });
        }
        Ok(Node::Internal { func, children })
    }
    let mut seen = vec![false; vars.budget()];
    Ok(DecisionTree::from_root(node(0, model, vars, space, &mut seen)?))
}

/// Decodes a model and recomputes its goodness, which must lie in the window.
pub fn decode(
    model: &Assignment,
    instance: &CnfInstance,
    space: &TreeSpace,
    data: &Dataset,
) -> Result<(DecisionTree, GoodnessTuple), DecodeError> {
    if !model.satisfies(&instance.cnf) {
        return Err(DecodeError::Unsatisfied);
    }
    let tree = decode_tree(model, &instance.vars, space)?;
    let g = goodness(&tree, space, data).expect("decoded trees stay within budget");
    if !instance.window.admits(&g) {
        return Err(DecodeError::OutsideWindow {
            goodness: g,
            window: instance.window,
        });
    }
    Ok((tree, g))
}
