use std::fmt::Write;

use crate::dtree::TreeSpace;

use super::formula::{Cnf, Lit};

/// Where a branch edge points: a later internal node or a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Node(usize),
    Label(usize),
}

/// Named variables of the tree encoding. Node 0 is the root; edges only go
/// from a node to a larger-numbered node or to a label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarMap {
    /// `lambda[i][p]`: node `i` applies function `p`.
    pub lambda: Vec<Vec<Lit>>,
    /// `tau[i][c]`: candidate targets of branch `c` of node `i`.
    pub tau: Vec<Vec<Vec<(Target, Lit)>>>,
    /// `m[i][k]`: node `i` labels sample `k` correctly.
    pub m: Vec<Vec<Lit>>,
    /// `u[i]`: node `i` is reachable from the root.
    pub u: Vec<Lit>,
    /// `ubar[i]`: node `i` is unused.
    pub ubar: Vec<Lit>,
    /// `lambda_prime[i][p]`: node `i` is used and applies `p`.
    pub lambda_prime: Vec<Vec<Lit>>,
}

impl VarMap {
    /// Allocates function and edge variables for `space`.
    pub(super) fn structural(cnf: &mut Cnf, space: &TreeSpace) -> Self {
        let budget = space.budget();
        let functions = space.functions().len();
        let labels = space.labels().len();
        let b_max = space.max_branches();
        let lambda = (0..budget)
            .map(|_| (0..functions).map(|_| cnf.new_var()).collect())
            .collect();
        let tau = (0..budget)
            .map(|i| {
                (0..b_max)
                    .map(|_| {
                        (i + 1..budget)
                            .map(Target::Node)
                            .chain((0..labels).map(Target::Label))
                            .map(|t| (t, cnf.new_var()))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            lambda,
            tau,
            m: Vec::new(),
            u: Vec::new(),
            ubar: Vec::new(),
            lambda_prime: Vec::new(),
        }
    }

    pub fn budget(&self) -> usize {
        self.lambda.len()
    }

    /// Edges into internal node `j`.
    pub fn incoming(&self, j: usize) -> Vec<Lit> {
        let mut lits = Vec::new();
        for node in &self.tau[..j] {
            for branch in node {
                lits.extend(
                    branch
                        .iter()
                        .filter(|(t, _)| *t == Target::Node(j))
                        .map(|&(_, l)| l),
                );
            }
        }
        lits
    }

    /// One `name id` line per named variable.
    pub fn sidecar(&self, space: &TreeSpace) -> String {
        let mut out = String::new();
        let fname = |p: usize| &space.functions()[p].name;
        for (i, row) in self.lambda.iter().enumerate() {
            for (p, l) in row.iter().enumerate() {
                let _ = writeln!(out, "lambda[{i}][{}] {}", fname(p), l.var());
            }
        }
        for (i, branches) in self.tau.iter().enumerate() {
            for (c, targets) in branches.iter().enumerate() {
                for (t, l) in targets {
                    let name = match t {
                        Target::Node(j) => format!("node{j}"),
                        Target::Label(x) => space.labels()[*x].clone(),
                    };
                    let _ = writeln!(out, "tau[{i}][{c}][{name}] {}", l.var());
                }
            }
        }
        for (i, l) in self.u.iter().enumerate() {
            let _ = writeln!(out, "u[{i}] {}", l.var());
        }
        for (i, l) in self.ubar.iter().enumerate() {
            let _ = writeln!(out, "ubar[{i}] {}", l.var());
        }
        for (i, row) in self.lambda_prime.iter().enumerate() {
            for (p, l) in row.iter().enumerate() {
                let _ = writeln!(out, "lambda_prime[{i}][{}] {}", fname(p), l.var());
            }
        }
        for (i, row) in self.m.iter().enumerate() {
            for (k, l) in row.iter().enumerate() {
                let _ = writeln!(out, "m[{i}][{k}] {}", l.var());
            }
        }
        out
    }
}
