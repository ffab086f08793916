//! The CNF encoding is satisfiable exactly when some rooted tree of the space
//! has its goodness inside the window, on random small instances.

use std::collections::BTreeSet;

use lpo_core::cnf::{build_phi, decode, Window};
use lpo_core::dtree::enumerate_trees;
use lpo_core::measures::goodness;
use lpo_core::{Dataset, FunctionSpec, GoodnessTuple, Sample, Solver, SolverResult, TreeSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Duration;

fn random_instance(seed: u64) -> (TreeSpace, Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = rng.gen_range(1..=3);
    let functions: Vec<_> = (0..nf)
        .map(|i| FunctionSpec::new(format!("f{i}"), rng.gen_range(2..=3), rng.gen_range(1..=3), i))
        .collect();
    let nl = rng.gen_range(2..=3);
    let labels = (0..nl).map(|i| format!("l{i}")).collect();
    let space = TreeSpace::new(functions.clone(), labels, rng.gen_range(1..=2)).unwrap();
    let k = rng.gen_range(1..=12);
    let rows = (0..k)
        .map(|_| Sample {
            features: functions
                .iter()
                .map(|f| rng.gen_range(0..f.branch_count as u16))
                .collect(),
            label: rng.gen_range(0..nl),
        })
        .collect();
    let data = Dataset::new(&space, rows).unwrap();
    (space, data)
}

/// Representatives of every class of lower bounds (compared strictly and
/// weakly) and upper bounds (compared weakly).
fn window_values(values: &BTreeSet<u64>, max: u64) -> (BTreeSet<u64>, BTreeSet<u64>) {
    let mut lo: BTreeSet<u64> = [0, max].into();
    let mut hi: BTreeSet<u64> = [0, max].into();
    for &v in values {
        lo.extend([v.saturating_sub(1), v, (v + 1).min(max)]);
        hi.extend([v.saturating_sub(1), v]);
    }
    (lo, hi)
}

fn check_instance(space: &TreeSpace, data: &Dataset) -> usize {
    let gs: BTreeSet<GoodnessTuple> = enumerate_trees(space)
        .filter(|t| t.internal_count() > 0)
        .map(|t| goodness(&t, space, data).unwrap())
        .collect();
    let k = data.len() as u64;
    let emax = space.max_explainability();
    let (c_los, c_his) = window_values(&gs.iter().map(|g| g.correct).collect(), k);
    let (e_los, e_his) = window_values(&gs.iter().map(|g| g.explainability).collect(), emax);
    let mut checked = 0;
    for &c_lo in &c_los {
        for &c_hi in c_his.range(c_lo..) {
            for &e_lo in &e_los {
                for &e_hi in e_his.range(e_lo..) {
                    let w = Window::new(c_lo, e_lo, c_hi, e_hi, data.len(), emax).unwrap();
                    let expect = gs.iter().any(|g| w.admits(g));
                    let inst = build_phi(space, data, w).unwrap();
                    match Solver::Builtin.check_sat(&inst.cnf, Duration::from_secs(30)) {
                        SolverResult::Sat(model) => {
                            assert!(expect, "model outside the space for {w:?}");
                            let (_, g) = decode(&model, &inst, space, data).unwrap();
                            assert!(gs.contains(&g));
                        }
                        SolverResult::Unsat => assert!(!expect, "missed a tree in {w:?}"),
                        other => panic!("{other:?} for {w:?}"),
                    }
                    checked += 1;
                }
            }
        }
    }
    checked
}

#[test]
fn sat_iff_some_tree_in_window() {
    let mut total = 0;
    for seed in 0..30 {
        let (space, data) = random_instance(seed);
        total += check_instance(&space, &data);
    }
    assert!(total > 1000, "only {total} windows checked");
}
