//! Plain DPLL with unit propagation, for small instances only.

use std::time::Instant;

use crate::cnf::{Assignment, Cnf, Lit};

/// Largest instance the DPLL fallback accepts.
pub const DPLL_MAX_VARS: u32 = 50;

pub(crate) enum Outcome {
    Sat(Assignment),
    Unsat,
    Timeout,
}

fn value(assign: &[Option<bool>], lit: Lit) -> Option<bool> {
    assign[lit.var() as usize].map(|v| v == lit.is_positive())
}

fn propagate(cnf: &Cnf, assign: &mut [Option<bool>], trail: &mut Vec<u32>) -> bool {
    loop {
        let mut changed = false;
        for clause in cnf.clauses() {
            let mut unassigned = None;
            let mut open = 0;
            let mut satisfied = false;
            for &lit in clause {
                match value(assign, lit) {
                    Some(true) => {
                        satisfied = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        open += 1;
                        unassigned = Some(lit);
                    }
                }
            }
            if satisfied {
                continue;
            }
            match (open, unassigned) {
                (0, _) => return false,
                (1, Some(lit)) => {
                    assign[lit.var() as usize] = Some(lit.is_positive());
                    trail.push(lit.var());
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return true;
        }
    }
}

fn search(cnf: &Cnf, assign: &mut Vec<Option<bool>>, deadline: Instant) -> Option<bool> {
    if Instant::now() >= deadline {
        return None;
    }
    let mut trail = Vec::new();
    if !propagate(cnf, assign, &mut trail) {
        for v in trail {
            assign[v as usize] = None;
        }
        return Some(false);
    }
    let Some(var) = (1..assign.len()).find(|&v| assign[v].is_none()) else {
        return Some(true);
    };
    for choice in [true, false] {
        assign[var] = Some(choice);
        match search(cnf, assign, deadline) {
            Some(true) => return Some(true),
            None => return None,
            Some(false) => {}
        }
    }
    assign[var] = None;
    for v in trail {
        assign[v as usize] = None;
    }
    Some(false)
}

pub(crate) fn solve(cnf: &Cnf, deadline: Instant) -> Outcome {
    let mut assign = vec![None; cnf.num_vars() as usize + 1];
    match search(cnf, &mut assign, deadline) {
        None => Outcome::Timeout,
        Some(false) => Outcome::Unsat,
        Some(true) => {
            let mut model = Assignment::new(cnf.num_vars());
            for v in 1..=cnf.num_vars() {
                model.set(v, assign[v as usize].unwrap_or(false));
            }
            Outcome::Sat(model)
        }
    }
}
