use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dtree::{enumerate_trees, FunctionSpec, TreeSpace};
use crate::measures::{goodness, Dataset, Sample};
use crate::momdp::Restrictions;

fn tiny_space() -> TreeSpace {
    TreeSpace::new(
        vec![FunctionSpec::new("f1", 2, 1, 0)],
        vec!["l1".into(), "l2".into()],
        1,
    )
    .unwrap()
}

fn tiny_data(space: &TreeSpace) -> Dataset {
    let rows = [(0, 0), (0, 0), (0, 1), (1, 1), (1, 1), (1, 0), (1, 1)]
        .iter()
        .map(|&(x, label)| Sample {
            features: vec![x],
            label,
        })
        .collect();
    Dataset::new(space, rows).unwrap()
}

fn wide_space() -> TreeSpace {
    TreeSpace::new(
        vec![
            FunctionSpec::new("a", 2, 1, 0),
            FunctionSpec::new("b", 2, 2, 1),
            FunctionSpec::new("c", 2, 3, 2),
        ],
        vec!["x".into(), "y".into()],
        3,
    )
    .unwrap()
}

fn wide_data(space: &TreeSpace) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows = (0..24)
        .map(|_| {
            let f: Vec<u16> = (0..3).map(|_| rng.gen_range(0..2)).collect();
            let label = if rng.gen_bool(0.85) {
                ((f[0] & f[1]) | f[2]) as usize
            } else {
                rng.gen_range(0..2)
            };
            Sample { features: f, label }
        })
        .collect();
    Dataset::new(space, rows).unwrap()
}

/// Exact Pareto front (as goodness tuples) over a tree list.
fn brute_front(space: &TreeSpace, data: &Dataset, trees: &[DecisionTree]) -> BTreeSet<(u64, u64)> {
    let all: Vec<_> = trees.iter().map(|t| goodness(t, space, data).unwrap()).collect();
    all.iter()
        .filter(|g| !all.iter().any(|h| g.strictly_below(h)))
        .map(|g| (g.correct, g.explainability))
        .collect()
}

fn front_set(archive: &ParetoArchive) -> BTreeSet<(u64, u64)> {
    archive
        .entries()
        .iter()
        .map(|e| (e.goodness.correct, e.goodness.explainability))
        .collect()
}

fn node_with_edges(stats: &[(Action, Stats)], visits: u64) -> SearchNode {
    let mut node = SearchNode::new(DecisionTree::hole(), vec![]);
    node.visits = visits;
    for (i, (action, s)) in stats.iter().enumerate() {
        node.edges.push(Edge {
            action: *action,
            child: i + 1,
            stats: *s,
            exhausted: false,
        });
    }
    node
}

/// Two-point hypervolume by inclusion-exclusion against the origin.
fn hv2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * a[1] + b[0] * b[1] - a[0].min(b[0]) * a[1].min(b[1])
}

#[test]
fn single_child_selected() {
    let stats = Stats {
        visits: 3,
        mean: [0.2, 0.1],
    };
    let node = node_with_edges(&[(Action::new(0, 1), stats)], 4);
    assert_eq!(select_action(&node, &[[0.5, 0.5]], &MctsConfig::default()), 0);
}

#[test]
fn less_visited_child_wins_on_equal_means() {
    let config = MctsConfig::default();
    let mean = [0.3, 0.4];
    let node = node_with_edges(
        &[
            (Action::new(0, 0), Stats { visits: 100, mean }),
            (Action::new(0, 1), Stats { visits: 1, mean }),
        ],
        101,
    );
    // empty archive: the score is the area of the UCB box
    let bonus = |n: f64| std::f64::consts::SQRT_2 * (101f64.ln() / n).sqrt();
    let area = |n: f64| (mean[0] + bonus(n)) * (mean[1] + bonus(n));
    assert!(area(1.0) > area(100.0));
    assert_eq!(select_action(&node, &[], &config), 1);

    // both UCB points extend a one-point archive, so only area counts
    let front = [[0.3, 0.4]];
    let ucb1 = [mean[0] + bonus(1.0), mean[1] + bonus(1.0)];
    let ucb100 = [mean[0] + bonus(100.0), mean[1] + bonus(100.0)];
    assert!((selection_score(ucb1, &front, &config) - hv2(front[0], ucb1)).abs() < 1e-12);
    assert!((selection_score(ucb100, &front, &config) - hv2(front[0], ucb100)).abs() < 1e-12);
    assert_eq!(select_action(&node, &front, &config), 1);

    // penalizing every point: the penalty is computed against the nearest
    // archive point's projection
    let always = MctsConfig {
        penalty_scope: PenaltyScope::Always,
        ..MctsConfig::default()
    };
    let manual = |u: [f64; 2]| {
        let p = perspective(u);
        let q = perspective(front[0]);
        hv2(front[0], u) - ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    };
    assert!((selection_score(ucb1, &front, &always) - manual(ucb1)).abs() < 1e-12);
    assert!((selection_score(ucb100, &front, &always) - manual(ucb100)).abs() < 1e-12);
    assert!(manual(ucb1) > manual(ucb100));
    assert_eq!(select_action(&node, &front, &always), 1);
}

#[test]
fn covered_point_pays_nearest_projection_penalty() {
    let front = [[0.8, 0.8], [0.95, 0.2]];
    let inside = [0.2, 0.6];
    let base = hypervolume(&front, [0.0, 0.0]).unwrap();
    let nearest = [0.8, 0.8];
    let (p, q) = (perspective(inside), perspective(nearest));
    let expected = base - ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    let score = selection_score(inside, &front, &MctsConfig::default());
    assert!((score - expected).abs() < 1e-12);
    assert!(score < base);
}

#[test]
fn dominated_ucb_does_not_gain_hypervolume() {
    let front = [[0.8, 0.8], [0.95, 0.2]];
    let inside = [0.5, 0.5];
    let extending = [0.9, 0.3];
    let base = hypervolume(&front, [0.0, 0.0]).unwrap();
    let with = |p: [f64; 2]| {
        let mut v = front.to_vec();
        v.push(p);
        hypervolume(&v, [0.0, 0.0]).unwrap()
    };
    assert_eq!(with(inside), base);
    assert!(with(extending) > base);
    let default = MctsConfig::default();
    assert!(selection_score(inside, &front, &default) <= selection_score(extending, &front, &default));
    let config = MctsConfig {
        penalty: PenaltyMode::ProjectionNorm,
        ..MctsConfig::default()
    };
    assert!(selection_score(inside, &front, &config) <= selection_score(extending, &front, &config));
    // penalizing every point breaks the ordering on this front
    let always = MctsConfig {
        penalty_scope: PenaltyScope::Always,
        ..MctsConfig::default()
    };
    assert!(selection_score(inside, &front, &always) > selection_score(extending, &front, &always));
}

#[test]
fn ties_go_to_smallest_action() {
    let stats = Stats {
        visits: 2,
        mean: [0.5, 0.5],
    };
    let node = node_with_edges(&[(Action::new(0, 3), stats), (Action::new(0, 1), stats)], 4);
    assert_eq!(select_action(&node, &[], &MctsConfig::default()), 1);
}

#[test]
fn unexplored_without_rave_data_first() {
    let mut node = SearchNode::new(
        DecisionTree::hole(),
        vec![Action::new(0, 0), Action::new(0, 1), Action::new(0, 2)],
    );
    assert_eq!(pick_unexplored(&node), 0);
    node.rave.insert(
        Action::new(0, 0),
        Stats {
            visits: 4,
            mean: [0.9, 0.1],
        },
    );
    assert_eq!(pick_unexplored(&node), 1);
}

#[test]
fn rave_score_prefers_far_from_projection() {
    let mut node = SearchNode::new(DecisionTree::hole(), vec![Action::new(0, 0), Action::new(0, 1)]);
    node.rave.insert(
        Action::new(0, 0),
        Stats {
            visits: 1,
            mean: [0.0, 0.0],
        },
    );
    node.rave.insert(
        Action::new(0, 1),
        Stats {
            visits: 1,
            mean: [3.0, 4.0],
        },
    );
    assert_eq!(rave_score(&node.rave[&Action::new(0, 0)]), 0.0);
    assert!((rave_score(&node.rave[&Action::new(0, 1)]) - 4.0).abs() < 1e-12);
    assert_eq!(pick_unexplored(&node), 1);
}

#[test]
fn widening_limits_children() {
    let config = MctsConfig::default();
    let mut node = SearchNode::new(DecisionTree::hole(), vec![Action::new(0, 0), Action::new(0, 1)]);
    assert!(node.can_widen(&config));
    node.edges.push(Edge {
        action: Action::new(0, 2),
        child: 1,
        stats: Stats::default(),
        exhausted: false,
    });
    node.visits = 1;
    // ceil(1 * 1^0.5) = 1 child allowed
    assert!(!node.can_widen(&config));
    node.visits = 2;
    assert!(node.can_widen(&config));
}

#[test]
fn rollout_from_complete_state() {
    let space = tiny_space();
    let data = tiny_data(&space);
    let mdp = MoMdp::new(&space, &data, Restrictions::default());
    let tree = space.parse("f1[l1,l2]").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = rollout(&mdp, &tree, &mut rng).unwrap();
    assert_eq!(r.tree, tree);
    assert!(r.actions.is_empty());
    assert_eq!(r.goodness, goodness(&tree, &space, &data).unwrap());
}

#[test]
fn rollout_is_seeded() {
    let space = wide_space();
    let data = wide_data(&space);
    let mdp = MoMdp::new(&space, &data, Restrictions::default());
    let run = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..20)
            .map(|_| rollout(&mdp, &mdp.initial_state(), &mut rng).unwrap().actions)
            .collect::<Vec<_>>()
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
}

#[test]
fn rollout_is_uniform_over_completions() {
    let space = tiny_space();
    let data = tiny_data(&space);
    let mdp = MoMdp::new(&space, &data, Restrictions::default());
    let start = space.parse("f1[N,N]").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let trials = 10_000;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for _ in 0..trials {
        let r = rollout(&mdp, &start, &mut rng).unwrap();
        *counts.entry(space.render(&r.tree)).or_default() += 1;
    }
    assert_eq!(counts.len(), 4);
    let p = 0.25;
    let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
    for (tree, n) in counts {
        let dev = (n as f64 - trials as f64 * p).abs();
        assert!(dev <= 3.0 * sigma, "{tree}: {n}");
    }
}

#[test]
fn zero_budget_gives_empty_archive() {
    let space = tiny_space();
    let data = tiny_data(&space);
    let mdp = MoMdp::new(&space, &data, Restrictions::default());
    let archive = run_momcts(&mdp, MctsConfig::default(), Duration::ZERO);
    assert!(archive.is_empty());
}

#[test]
fn tiny_space_front_is_exact() {
    let space = tiny_space();
    let data = tiny_data(&space);
    let all: Vec<_> = enumerate_trees(&space).collect();
    let config = MctsConfig {
        max_iterations: Some(1000),
        ..MctsConfig::default()
    };
    let open = Restrictions {
        no_root_labels: false,
        ..Restrictions::default()
    };
    let mdp = MoMdp::new(&space, &data, open);
    let archive = run_momcts(&mdp, config.clone(), Duration::from_secs(60));
    assert_eq!(front_set(&archive), brute_front(&space, &data, &all));

    let rooted: Vec<_> = all.into_iter().filter(|t| t.internal_count() > 0).collect();
    let mdp = MoMdp::new(&space, &data, Restrictions::default());
    let archive = run_momcts(&mdp, config, Duration::from_secs(60));
    assert_eq!(front_set(&archive), brute_front(&space, &data, &rooted));
}

#[test]
fn seeded_runs_are_identical() {
    let space = wide_space();
    let data = wide_data(&space);
    let mdp = MoMdp::new(&space, &data, Restrictions::default());
    let config = MctsConfig {
        seed: 9,
        max_iterations: Some(400),
        ..MctsConfig::default()
    };
    let a = run_momcts(&mdp, config.clone(), Duration::from_secs(60));
    let b = run_momcts(&mdp, config, Duration::from_secs(60));
    assert_eq!(a, b);
}

#[test]
fn archive_snapshots_are_monotone() {
    let space = wide_space();
    let data = wide_data(&space);
    let mdp = MoMdp::new(&space, &data, Restrictions::default());
    let mut search = Mcts::new(
        &mdp,
        MctsConfig {
            seed: 2,
            ..MctsConfig::default()
        },
    );
    let mut snapshots = Vec::new();
    for _ in 0..300 {
        search.iterate();
        assert!(search.archive().is_antichain());
        snapshots.push(search.archive().clone());
    }
    for (i, early) in snapshots.iter().enumerate() {
        for late in &snapshots[i + 1..] {
            assert!(early.entries().iter().all(|e| late.covers(&e.goodness)));
        }
    }
}

#[test]
fn backup_means_match_recorded_rewards() {
    let space = wide_space();
    let data = wide_data(&space);
    let mdp = MoMdp::new(&space, &data, Restrictions::default());
    let mut search = Mcts::new(
        &mdp,
        MctsConfig {
            seed: 4,
            ..MctsConfig::default()
        },
    );
    let reports: Vec<_> = (0..200).map(|_| search.iterate()).collect();

    // walk every edge by its action prefix and recompute the mean reward of
    // the iterations whose tree path went through it
    let mut stack = vec![(0usize, Vec::<Action>::new())];
    let mut checked = 0;
    while let Some((node, prefix)) = stack.pop() {
        let n = &search.nodes()[node];
        let through: Vec<_> = reports
            .iter()
            .filter(|r| r.tree_depth >= prefix.len() && r.path[..prefix.len()] == prefix[..])
            .collect();
        assert_eq!(n.visits, through.len() as u64);
        if !n.edges.is_empty() {
            let edge_visits: u64 = n.edges.iter().map(|e| e.stats.visits).sum();
            assert_eq!(n.visits, edge_visits + u64::from(node != 0));
        }
        for edge in &n.edges {
            let mut p = prefix.clone();
            p.push(edge.action);
            let rewards: Vec<[f64; 2]> = reports
                .iter()
                .filter(|r| r.tree_depth >= p.len() && r.path[..p.len()] == p[..])
                .map(|r| r.reward)
                .collect();
            assert_eq!(edge.stats.visits, rewards.len() as u64);
            for axis in 0..2 {
                let mean = rewards.iter().map(|r| r[axis]).sum::<f64>() / rewards.len() as f64;
                assert!((edge.stats.mean[axis] - mean).abs() < 1e-9);
                assert!(edge.stats.mean[axis] >= 0.0);
            }
            checked += 1;
            stack.push((edge.child, p));
        }
    }
    assert!(checked > 20);
}

#[test]
fn trace_has_one_line_per_iteration() {
    let space = tiny_space();
    let data = tiny_data(&space);
    let mdp = MoMdp::new(&space, &data, Restrictions::default());
    let mut buf = Vec::new();
    {
        let mut search = Mcts::new(
            &mdp,
            MctsConfig {
                max_iterations: Some(5),
                ..MctsConfig::default()
            },
        )
        .with_trace(&mut buf);
        search.run_until(Instant::now() + Duration::from_secs(10));
    }
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    for (i, line) in lines.iter().enumerate() {
        let cols: Vec<_> = line.split('\t').collect();
        assert_eq!(cols.len(), 3);
        assert_eq!(cols[0], (i + 1).to_string());
        assert!(cols[1].starts_with("0:0"));
    }
}

#[test]
fn hypervolume_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let n = rng.gen_range(1..=20);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let samples = 40_000;
        let hits = (0..samples)
            .filter(|_| {
                let q = [rng.gen::<f64>(), rng.gen::<f64>()];
                pts.iter().any(|p| q[0] <= p[0] && q[1] <= p[1])
            })
            .count();
        let estimate = hits as f64 / samples as f64;
        assert!((hypervolume(&pts, [0.0, 0.0]).unwrap() - estimate).abs() < 1e-2);
    }
}

#[test]
fn exhausted_children_are_skipped() {
    let config = MctsConfig::default();
    let good = Stats { visits: 5, mean: [5.0, 5.0] };
    let poor = Stats { visits: 5, mean: [0.5, 0.5] };
    let mut node = node_with_edges(&[(Action::new(0, 0), good), (Action::new(0, 1), poor)], 10);
    assert_eq!(select_action(&node, &[], &config), 0);
    node.edges[0].exhausted = true;
    assert_eq!(select_action(&node, &[], &config), 1);
    node.edges[1].exhausted = true;
    // nothing left: fall back to the plain score
    assert_eq!(select_action(&node, &[], &config), 0);
    let off = MctsConfig { prune_exhausted: false, ..config };
    node.edges[1].exhausted = false;
    assert_eq!(select_action(&node, &[], &off), 0);
}

#[test]
fn pruned_search_completes_with_exact_front() {
    let space = wide_space();
    let data = wide_data(&space);
    let rooted: Vec<_> = enumerate_trees(&space)
        .filter(|t| t.internal_count() > 0)
        .collect();
    let mdp = MoMdp::new(&space, &data, Restrictions::default());
    let mut search = Mcts::new(
        &mdp,
        MctsConfig {
            seed: 1,
            max_iterations: Some(1_000_000),
            ..MctsConfig::default()
        },
    );
    search.run_until(Instant::now() + Duration::from_secs(60));
    assert!(search.is_complete());
    // stops on its own, well before the cap
    assert!(search.iterations() < 1_000_000);
    assert_eq!(front_set(search.archive()), brute_front(&space, &data, &rooted));
}

#[test]
fn unpruned_search_runs_to_its_cap() {
    let space = tiny_space();
    let data = tiny_data(&space);
    let mdp = MoMdp::new(&space, &data, Restrictions::default());
    let mut search = Mcts::new(
        &mdp,
        MctsConfig {
            prune_exhausted: false,
            max_iterations: Some(500),
            ..MctsConfig::default()
        },
    );
    search.run_until(Instant::now() + Duration::from_secs(60));
    assert_eq!(search.iterations(), 500);
}
