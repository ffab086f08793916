//! Multi-objective Monte Carlo tree search over the tree-building MDP.
//!
//! Each iteration descends the search tree by hypervolume-guided selection,
//! expands one unexplored action when progressive widening allows it, runs a
//! uniformly random rollout to a complete tree, and backs the terminal reward
//! up the path (including all-moves-as-first RAVE statistics). Every complete
//! tree met on the way is offered to a Pareto archive.
//!
//! Rewards inside the search are scaled to `[0, 1]` per axis (correctness by
//! `1/K`, explainability by `1/(B (W + 1))`); the archive keeps raw tuples.

mod archive;
mod hypervolume;

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dtree::{Action, DecisionTree};
use crate::measures::GoodnessTuple;
use crate::momdp::MoMdp;

pub use archive::{ArchiveEntry, ParetoArchive};
pub use hypervolume::{hypervolume, BelowReference};

/// What the L2 penalty in the selection score compares the projected UCB
/// point against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PenaltyMode {
    /// Distance between the projections of the UCB point and of the nearest
    /// archive point.
    #[default]
    NearestArchive,
    /// Norm of the projected UCB point alone.
    ProjectionNorm,
    /// Distance from the UCB point to where its ray from the reference
    /// point meets the piecewise-linear envelope of the archive front.
    FrontEnvelope,
}

/// Which UCB points pay the projection penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PenaltyScope {
    /// Only points the archive already covers; a point that extends the
    /// front scores its hypervolume alone.
    #[default]
    DominatedOnly,
    /// Every point.
    Always,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MctsConfig {
    pub exploration: f64,
    pub widening_k: f64,
    pub widening_alpha: f64,
    pub reference: [f64; 2],
    pub penalty: PenaltyMode,
    pub penalty_scope: PenaltyScope,
    /// Skip subtrees whose complete trees have all been reached.
    pub prune_exhausted: bool,
    pub seed: u64,
    pub max_iterations: Option<u64>,
}

impl Default for MctsConfig {
    fn default() -> Self {
        Self {
            exploration: std::f64::consts::SQRT_2,
            widening_k: 1.0,
            widening_alpha: 0.5,
            reference: [0.0, 0.0],
            penalty: PenaltyMode::NearestArchive,
            penalty_scope: PenaltyScope::DominatedOnly,
            prune_exhausted: true,
            seed: 0,
            max_iterations: None,
        }
    }
}

/// Visit count and running mean of the scaled reward vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stats {
    pub visits: u64,
    pub mean: [f64; 2],
}

impl Stats {
    fn update(&mut self, reward: [f64; 2]) {
        self.visits += 1;
        let n = self.visits as f64;
        for (m, r) in self.mean.iter_mut().zip(reward) {
            *m += (r - *m) / n;
        }
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub action: Action,
    pub child: usize,
    pub stats: Stats,
    /// Every complete tree below the child has been reached.
    pub exhausted: bool,
}

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub state: DecisionTree,
    pub visits: u64,
    /// Legal actions not yet expanded, ascending.
    pub unexplored: Vec<Action>,
    pub edges: Vec<Edge>,
    pub rave: BTreeMap<Action, Stats>,
}

impl SearchNode {
    fn new(state: DecisionTree, unexplored: Vec<Action>) -> Self {
        Self {
            state,
            visits: 0,
            unexplored,
            edges: Vec::new(),
            rave: BTreeMap::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.unexplored.is_empty() && self.edges.is_empty()
    }

    /// No unexplored action and every expanded child exhausted.
    pub fn is_exhausted(&self) -> bool {
        self.unexplored.is_empty() && self.edges.iter().all(|e| e.exhausted)
    }

    /// Progressive widening: may another child be expanded at this visit count?
    pub fn can_widen(&self, config: &MctsConfig) -> bool {
        let limit = (config.widening_k * (self.visits as f64).powf(config.widening_alpha)).ceil();
        !self.unexplored.is_empty() && (self.edges.is_empty() || (self.edges.len() as f64) < limit)
    }
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Perspective projection onto the unit circle; the origin maps to itself.
pub fn perspective(v: [f64; 2]) -> [f64; 2] {
    let n = norm(v);
    if n == 0.0 {
        v
    } else {
        [v[0] / n, v[1] / n]
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    norm([a[0] - b[0], a[1] - b[1]])
}

/// Optimistic reward vector of an edge.
pub fn ucb(stats: &Stats, parent_visits: u64, exploration: f64) -> [f64; 2] {
    let bonus = if stats.visits == 0 {
        f64::INFINITY
    } else {
        exploration * ((parent_visits.max(1) as f64).ln() / stats.visits as f64).sqrt()
    };
    [stats.mean[0] + bonus, stats.mean[1] + bonus]
}

/// Point where the ray from `origin` through `point` crosses the polyline
/// `(origin.x, y_1) -> p_1 -> ... -> p_n -> (x_n, origin.y)` over the front
/// sorted by increasing first coordinate.
pub fn envelope_projection(point: [f64; 2], front: &[[f64; 2]], origin: [f64; 2]) -> Option<[f64; 2]> {
    let dir = [point[0] - origin[0], point[1] - origin[1]];
    if front.is_empty() || (dir[0] == 0.0 && dir[1] == 0.0) {
        return None;
    }
    let mut sorted = front.to_vec();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(b[1].total_cmp(&a[1])));
    let mut polyline = Vec::with_capacity(sorted.len() + 2);
    polyline.push([origin[0], sorted[0][1]]);
    polyline.extend(&sorted);
    polyline.push([sorted[sorted.len() - 1][0], origin[1]]);
    for seg in polyline.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let e = [b[0] - a[0], b[1] - a[1]];
        let denom = dir[0] * e[1] - dir[1] * e[0];
        if denom.abs() < 1e-15 {
            continue;
        }
        let w = [a[0] - origin[0], a[1] - origin[1]];
        // origin + t * dir = a + s * e
        let t = (w[0] * e[1] - w[1] * e[0]) / denom;
        let s = (w[0] * dir[1] - w[1] * dir[0]) / denom;
        if t >= 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
            return Some([origin[0] + t * dir[0], origin[1] + t * dir[1]]);
        }
    }
    None
}

/// Selection score: hypervolume of the archive front extended by the UCB
/// point, minus the L2 penalty on its perspective projection (for points the
/// front covers, unless the scope says otherwise).
pub fn selection_score(point: [f64; 2], front: &[[f64; 2]], config: &MctsConfig) -> f64 {
    let mut points = front.to_vec();
    points.push(point);
    let hv = hypervolume(&points, config.reference).unwrap_or(0.0);
    let covered = front.iter().any(|f| point[0] <= f[0] && point[1] <= f[1]);
    if config.penalty_scope == PenaltyScope::DominatedOnly && !covered {
        return hv;
    }
    let projected = perspective(point);
    let penalty = match config.penalty {
        PenaltyMode::ProjectionNorm => norm(projected),
        PenaltyMode::FrontEnvelope => envelope_projection(point, front, config.reference)
            .map(|q| distance(point, q))
            .unwrap_or(0.0),
        PenaltyMode::NearestArchive => front
            .iter()
            .min_by(|a, b| distance(**a, point).total_cmp(&distance(**b, point)))
            .map(|nearest| distance(projected, perspective(*nearest)))
            .unwrap_or(0.0),
    };
    hv - penalty
}

/// Index of the expanded edge with the best selection score; ties go to the
/// smallest action. With pruning on, exhausted children are skipped unless
/// nothing else is left.
pub fn select_action(node: &SearchNode, front: &[[f64; 2]], config: &MctsConfig) -> usize {
    assert!(!node.edges.is_empty(), "selection needs an expanded child");
    let skip = config.prune_exhausted && node.edges.iter().any(|e| !e.exhausted);
    let mut best: Option<(usize, f64)> = None;
    for (i, edge) in node.edges.iter().enumerate() {
        if skip && edge.exhausted {
            continue;
        }
        let score = selection_score(ucb(&edge.stats, node.visits, config.exploration), front, config);
        let better = match best {
            None => true,
            Some((j, s)) => {
                score > s || (score == s && edge.action < node.edges[j].action)
            }
        };
        if better {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i).unwrap()
}

/// RAVE preference score of an unexplored action.
pub fn rave_score(stats: &Stats) -> f64 {
    distance(perspective(stats.mean), stats.mean)
}

/// Position in `node.unexplored` of the action to expand: actions without
/// RAVE data first, otherwise the largest RAVE score; ties to the smallest
/// action.
pub fn pick_unexplored(node: &SearchNode) -> usize {
    assert!(!node.unexplored.is_empty(), "no unexplored action");
    if let Some(i) = node
        .unexplored
        .iter()
        .position(|a| node.rave.get(a).is_none_or(|s| s.visits == 0))
    {
        return i;
    }
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, a) in node.unexplored.iter().enumerate() {
        let score = rave_score(&node.rave[a]);
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

/// Result of a random playout.
#[derive(Debug, Clone)]
pub struct Rollout {
    pub tree: DecisionTree,
    pub goodness: GoodnessTuple,
    pub actions: Vec<Action>,
}

/// Uniformly random legal actions until the state is terminal. `None` when
/// the walk hits a partial tree with no legal action.
pub fn rollout(mdp: &MoMdp, state: &DecisionTree, rng: &mut impl Rng) -> Option<Rollout> {
    let mut state = state.clone();
    let mut actions = Vec::new();
    loop {
        let legal = mdp.legal_actions(&state);
        if legal.is_empty() {
            if !state.is_complete() {
                return None;
            }
            let goodness = mdp.reward(&state);
            return Some(Rollout {
                tree: state,
                goodness,
                actions,
            });
        }
        let action = legal[rng.gen_range(0..legal.len())];
        state = state.apply_action(mdp.space(), action);
        actions.push(action);
    }
}

/// Summary of one search iteration.
#[derive(Debug, Clone)]
pub struct IterationReport {
    /// Tree-policy actions followed by rollout actions.
    pub path: Vec<Action>,
    /// How many leading entries of `path` were taken inside the search tree.
    pub tree_depth: usize,
    pub reward: [f64; 2],
    pub terminal: Option<(DecisionTree, GoodnessTuple)>,
}

pub struct Mcts<'m, 'a> {
    mdp: &'m MoMdp<'a>,
    config: MctsConfig,
    nodes: Vec<SearchNode>,
    archive: ParetoArchive,
    rng: ChaCha8Rng,
    iterations: u64,
    scale: [f64; 2],
    trace: Option<Box<dyn Write + 'm>>,
}

impl<'m, 'a> Mcts<'m, 'a> {
    pub fn new(mdp: &'m MoMdp<'a>, config: MctsConfig) -> Self {
        let root_state = mdp.initial_state();
        let root = SearchNode::new(root_state.clone(), mdp.legal_actions(&root_state));
        let scale = [
            1.0 / mdp.data().len() as f64,
            1.0 / mdp.space().max_explainability().max(1) as f64,
        ];
        Self {
            mdp,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            nodes: vec![root],
            archive: ParetoArchive::new(),
            iterations: 0,
            scale,
            trace: None,
        }
    }

    /// Writes one tab-separated line per iteration: iteration number, the
    /// tree-policy and rollout actions, and the terminal goodness.
    pub fn with_trace(mut self, out: impl Write + 'm) -> Self {
        self.trace = Some(Box::new(out));
        self
    }

    pub fn archive(&self) -> &ParetoArchive {
        &self.archive
    }

    pub fn into_archive(self) -> ParetoArchive {
        self.archive
    }

    pub fn nodes(&self) -> &[SearchNode] {
        &self.nodes
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn scaled(&self, g: &GoodnessTuple) -> [f64; 2] {
        [
            g.correct as f64 * self.scale[0],
            g.explainability as f64 * self.scale[1],
        ]
    }

    fn front(&self) -> Vec<[f64; 2]> {
        self.archive
            .entries()
            .iter()
            .map(|e| self.scaled(&e.goodness))
            .collect()
    }

    fn expand(&mut self, node: usize) -> (Action, usize) {
        let pick = pick_unexplored(&self.nodes[node]);
        let action = self.nodes[node].unexplored.remove(pick);
        let (next, _) = self.mdp.step(&self.nodes[node].state, action);
        let legal = self.mdp.legal_actions(&next);
        let child = self.nodes.len();
        self.nodes.push(SearchNode::new(next, legal));
        self.nodes[node].edges.push(Edge {
            action,
            child,
            stats: Stats::default(),
            exhausted: false,
        });
        (action, child)
    }

    /// Runs one select / expand / rollout / backup cycle.
    pub fn iterate(&mut self) -> IterationReport {
        let mut path = vec![0usize];
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut actions = Vec::new();
        let mut node = 0;
        loop {
            let current = &self.nodes[node];
            if current.is_leaf() {
                break;
            }
            let forced = self.config.prune_exhausted
                && !current.unexplored.is_empty()
                && current.edges.iter().all(|e| e.exhausted);
            if forced || current.can_widen(&self.config) {
                let (action, child) = self.expand(node);
                edges.push((node, self.nodes[node].edges.len() - 1));
                actions.push(action);
                path.push(child);
                node = child;
                break;
            }
            let front = self.front();
            let e = select_action(current, &front, &self.config);
            let edge = &current.edges[e];
            actions.push(edge.action);
            edges.push((node, e));
            node = edge.child;
            path.push(node);
        }

        let playout = rollout(self.mdp, &self.nodes[node].state, &mut self.rng);
        let reward = match &playout {
            Some(r) => {
                self.archive.insert(r.tree.clone(), r.goodness);
                self.scaled(&r.goodness)
            }
            None => [0.0, 0.0],
        };
        let tail: &[Action] = playout.as_ref().map_or(&[], |r| r.actions.as_slice());

        for &(n, e) in edges.iter().rev() {
            self.nodes[n].edges[e].stats.update(reward);
            let child = self.nodes[n].edges[e].child;
            if self.nodes[child].is_exhausted() {
                self.nodes[n].edges[e].exhausted = true;
            }
        }
        for (depth, &n) in path.iter().enumerate() {
            self.nodes[n].visits += 1;
            let mut below: Vec<Action> = actions[depth..].iter().chain(tail).copied().collect();
            below.sort();
            below.dedup();
            for a in below {
                self.nodes[n].rave.entry(a).or_default().update(reward);
            }
        }
        self.iterations += 1;

        let all_actions: Vec<Action> = actions.iter().chain(tail).copied().collect();
        let terminal = playout.map(|r| (r.tree, r.goodness));
        if let Some(out) = self.trace.as_mut() {
            let path_text = all_actions
                .iter()
                .map(Action::to_string)
                .collect::<Vec<_>>()
                .join(",");
            let goodness = terminal
                .as_ref()
                .map_or("-".to_string(), |(_, g)| format!("{},{}", g.correct, g.explainability));
            // trace output is best-effort debugging aid
            let _ = writeln!(out, "{}\t{}\t{}", self.iterations, path_text, goodness);
        }
        IterationReport {
            path: all_actions,
            tree_depth: actions.len(),
            reward,
            terminal,
        }
    }

    /// Whether every tree reachable from the root has been reached; the
    /// archive is then the exact front of the space.
    pub fn is_complete(&self) -> bool {
        self.nodes[0].is_exhausted()
    }

    fn exhausted(&self) -> bool {
        self.config
            .max_iterations
            .is_some_and(|max| self.iterations >= max)
            || (self.config.prune_exhausted && self.is_complete())
    }

    /// Iterates until `deadline` or the iteration budget, whichever is first.
    pub fn run_until(&mut self, deadline: Instant) {
        while !self.exhausted() && Instant::now() < deadline {
            self.iterate();
        }
    }
}

/// Runs the search for at most `budget` wall time and returns the archive.
pub fn run_momcts(mdp: &MoMdp, config: MctsConfig, budget: Duration) -> ParetoArchive {
    let deadline = Instant::now() + budget;
    let mut search = Mcts::new(mdp, config);
    search.run_until(deadline);
    search.into_archive()
}

#[cfg(test)]
mod tests;
