//! Improved discrete multi-robot RRT: corridor-sampled expansion towards the
//! cheapest predecessor, connector-based rewiring and goal connection.

use std::collections::{HashMap, VecDeque};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::carp::{connector_horizon, local_connect_with, BoundsCache, ConnectFailure, Timestep, CONNECTOR_ATTEMPTS};
use crate::composite::{delta_unchecked, oracle, CompositeConfig};
use crate::error::Error;
use crate::roadmap::{Assignment, RoadmapGraph};
use crate::sampling::{corridors, sample_target, CorridorSet};
use crate::scalar::{Point, Scalar};

pub type NodeId = usize;

/// Search tree over composite configurations. Every parent-to-child hop is a
/// single valid composite move; connector chains are stored as chained nodes.
#[derive(Clone, Debug)]
pub struct SearchTree<S> {
    configs: Vec<CompositeConfig>,
    coords: Vec<Vec<Point<S>>>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    cost: Vec<S>,
    index: HashMap<CompositeConfig, NodeId>,
}

impl<S: Scalar> SearchTree<S> {
    pub fn new(root: CompositeConfig, g: &RoadmapGraph<S>) -> Self {
        let mut index = HashMap::new();
        index.insert(root.clone(), 0);
        Self {
            coords: vec![root.positions(g)],
            configs: vec![root],
            parent: vec![None],
            children: vec![Vec::new()],
            cost: vec![S::zero()],
            index,
        }
    }

    pub const ROOT: NodeId = 0;

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn config(&self, n: NodeId) -> &CompositeConfig {
        &self.configs[n]
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.parent[n]
    }

    /// Cost-to-root `l_T`.
    pub fn cost(&self, n: NodeId) -> S {
        self.cost[n]
    }

    /// Cheapest node holding `c`, if any.
    pub fn find(&self, c: &CompositeConfig) -> Option<NodeId> {
        self.index.get(c).copied()
    }

    fn hop(&self, a: NodeId, b: NodeId) -> S {
        self.coords[a].iter().zip(&self.coords[b]).map(|(p, q)| p.distance(q)).sum()
    }

    /// Adds `c` under `parent` with `l_T = l_T(parent) + δ(parent, c)`.
    pub fn add_child(&mut self, parent: NodeId, c: CompositeConfig, g: &RoadmapGraph<S>) -> NodeId {
        let id = self.configs.len();
        self.coords.push(c.positions(g));
        self.configs.push(c.clone());
        self.parent.push(Some(parent));
        self.children.push(Vec::new());
        self.children[parent].push(id);
        let cost = self.cost[parent] + self.hop(parent, id);
        self.cost.push(cost);
        match self.index.get(&c) {
            Some(&old) if self.cost[old] <= cost => {}
            _ => {
                self.index.insert(c, id);
            }
        }
        id
    }

    pub fn is_ancestor(&self, ancestor: NodeId, mut n: NodeId) -> bool {
        loop {
            if n == ancestor {
                return true;
            }
            match self.parent[n] {
                Some(p) => n = p,
                None => return false,
            }
        }
    }

    /// Moves `n` under `new_parent` and recomputes costs of `n`'s subtree.
    /// Panics if that would create a cycle.
    pub fn reparent(&mut self, n: NodeId, new_parent: NodeId) {
        assert!(!self.is_ancestor(n, new_parent), "reparenting would create a cycle");
        let old = self.parent[n].expect("the root is never reparented");
        self.children[old].retain(|&c| c != n);
        self.children[new_parent].push(n);
        self.parent[n] = Some(new_parent);
        let mut queue = VecDeque::from([n]);
        while let Some(m) = queue.pop_front() {
            let p = self.parent[m].unwrap();
            self.cost[m] = self.cost[p] + self.hop(p, m);
            if self.cost[m] < self.cost[self.index[&self.configs[m]]] {
                self.index.insert(self.configs[m].clone(), m);
            }
            queue.extend(self.children[m].iter().copied());
        }
    }

    /// Configurations from the root to `n`.
    pub fn path_to(&self, mut n: NodeId) -> Vec<CompositeConfig> {
        let mut out = vec![self.configs[n].clone()];
        while let Some(p) = self.parent[n] {
            out.push(self.configs[p].clone());
            n = p;
        }
        out.reverse();
        out
    }

    /// The `count` nodes closest to the point tuple `u` under δ, nearest first.
    pub fn nearest_to_points(&self, u: &[Point<S>], count: usize) -> Vec<NodeId> {
        self.nearest_by(count, |n, bound| {
            let mut sum = S::zero();
            for (p, q) in self.coords[n].iter().zip(u) {
                sum = sum + p.distance(q);
                if sum > bound {
                    break;
                }
            }
            sum
        })
    }

    /// The `count` nodes closest to node `v` under δ, nearest first, skipping
    /// `v` and its ancestors.
    pub fn nearest_to_node(&self, v: NodeId, count: usize) -> Vec<NodeId> {
        let mut excluded = vec![false; self.len()];
        let mut a = Some(v);
        while let Some(n) = a {
            excluded[n] = true;
            a = self.parent[n];
        }
        let target = &self.coords[v];
        self.nearest_by(count, |n, bound| {
            if excluded[n] {
                return S::infinity();
            }
            let mut sum = S::zero();
            for (p, q) in self.coords[n].iter().zip(target) {
                sum = sum + p.distance(q);
                if sum > bound {
                    break;
                }
            }
            sum
        })
    }

    /// Exact linear scan; `dist(n, bound)` may stop early once above `bound`.
    fn nearest_by(&self, count: usize, dist: impl Fn(NodeId, S) -> S) -> Vec<NodeId> {
        if count == 0 {
            return Vec::new();
        }
        let mut best: Vec<(S, NodeId)> = Vec::with_capacity(count + 1);
        let mut bound = S::infinity();
        for n in 0..self.len() {
            let d = dist(n, bound);
            if !d.is_finite() || d > bound {
                continue;
            }
            let pos = best.partition_point(|&(bd, bn)| (bd, bn) <= (d, n) || bd < d);
            best.insert(pos, (d, n));
            if best.len() > count {
                best.pop();
            }
            if best.len() == count {
                bound = best[count - 1].0;
            }
        }
        best.into_iter().map(|(_, n)| n).collect()
    }

    /// Full structural check: acyclic parent links, exact costs, index
    /// consistency. Returns a description of the first problem.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.parent[Self::ROOT].is_some() || self.cost[Self::ROOT] != S::zero() {
            return Err("root must have no parent and zero cost".into());
        }
        for n in 1..self.len() {
            let mut seen = 0;
            let mut m = n;
            while let Some(p) = self.parent[m] {
                m = p;
                seen += 1;
                if seen > self.len() {
                    return Err(format!("cycle through node {n}"));
                }
            }
            if m != Self::ROOT {
                return Err(format!("node {n} is detached"));
            }
            let p = self.parent[n].unwrap();
            if !self.children[p].contains(&n) {
                return Err(format!("node {n} missing from its parent's children"));
            }
            let expect = self.cost[p] + self.hop(p, n);
            if self.cost[n] != expect {
                return Err(format!("node {n} cost {} != {}", self.cost[n], expect));
            }
        }
        for (c, &n) in &self.index {
            if &self.configs[n] != c {
                return Err(format!("index points {c:?} at node {n}"));
            }
        }
        Ok(())
    }
}

/// Why an expansion added nothing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpandFailure {
    OracleFailed,
    Duplicate,
}

/// Grows the tree towards a corridor sample from the cheapest of its nearest
/// nodes. Returns the node that was added or improved.
pub fn expand<S: Scalar, R: Rng + ?Sized>(
    tree: &mut SearchTree<S>,
    corridors: &[CorridorSet<S>],
    g: &RoadmapGraph<S>,
    nn_count: usize,
    rng: &mut R,
) -> Result<NodeId, ExpandFailure> {
    let u = sample_target(corridors, g, rng).expect("corridors are non-empty");
    expand_towards(tree, &u, g, nn_count, rng)
}

pub fn expand_towards<S: Scalar, R: Rng + ?Sized>(
    tree: &mut SearchTree<S>,
    u: &[Point<S>],
    g: &RoadmapGraph<S>,
    nn_count: usize,
    rng: &mut R,
) -> Result<NodeId, ExpandFailure> {
    let mut best: Option<(S, NodeId, CompositeConfig)> = None;
    let mut any_oracle = false;
    for c in tree.nearest_to_points(u, nn_count.max(1)) {
        let Ok(next) = oracle(tree.config(c), u, g, rng) else {
            continue;
        };
        any_oracle = true;
        let d = tree.cost(c) + delta_unchecked(tree.config(c), &next, g);
        // Candidates that would only re-add a configuration at no gain are
        // not eligible.
        if let Some(existing) = tree.find(&next) {
            if tree.cost(existing) <= d || tree.is_ancestor(existing, c) {
                continue;
            }
        }
        if best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((d, c, next));
        }
    }
    let Some((_, pred, next)) = best else {
        return Err(if any_oracle {
            ExpandFailure::Duplicate
        } else {
            ExpandFailure::OracleFailed
        });
    };
    match tree.find(&next) {
        Some(existing) => {
            tree.reparent(existing, pred);
            Ok(existing)
        }
        None => Ok(tree.add_child(pred, next, g)),
    }
}

/// Connector settings shared by rewiring and goal connection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConnectorParams {
    pub horizon: Timestep,
    pub attempts: usize,
}

impl ConnectorParams {
    pub fn for_graph<S: Scalar>(g: &RoadmapGraph<S>) -> Self {
        Self {
            horizon: connector_horizon(g),
            attempts: CONNECTOR_ATTEMPTS,
        }
    }
}

/// δ-length of `from`, `chain...` as a polyline.
fn chain_length<S: Scalar>(from: &CompositeConfig, chain: &[CompositeConfig], g: &RoadmapGraph<S>) -> S {
    let mut prev = from;
    let mut total = S::zero();
    for c in chain {
        total = total + delta_unchecked(prev, c, g);
        prev = c;
    }
    total
}

/// Tries to route `v`'s nearest neighbours through `v` via the connector.
/// Returns the number of reparented nodes.
pub fn rewire<S: Scalar, R: Rng + ?Sized>(
    tree: &mut SearchTree<S>,
    v: NodeId,
    g: &RoadmapGraph<S>,
    nn_count: usize,
    connector: ConnectorParams,
    cache: &BoundsCache<S>,
    rng: &mut R,
) -> usize {
    let mut rewired = 0;
    for c in tree.nearest_to_node(v, nn_count) {
        // δ obeys the triangle inequality, so no chain can beat the direct hop.
        let direct = delta_unchecked(tree.config(v), tree.config(c), g);
        if !(tree.cost(v) + direct < tree.cost(c)) {
            continue;
        }
        let seed = rng.gen::<u64>();
        let from = tree.config(v).clone();
        let to = tree.config(c).clone();
        let Ok(chain) = local_connect_with(&from, &to, g, connector.horizon, connector.attempts, seed, cache) else {
            continue;
        };
        let last = chain.last().unwrap_or(&from);
        let through = tree.cost(v) + chain_length(&from, &chain, g) + delta_unchecked(last, &to, g);
        if !(through < tree.cost(c)) {
            continue;
        }
        let mut attach = v;
        for p in chain {
            attach = tree.add_child(attach, p, g);
        }
        tree.reparent(c, attach);
        rewired += 1;
    }
    rewired
}

/// Root-to-`t` path through node `v` and a connector chain.
pub fn connect_to_target<S: Scalar>(
    tree: &SearchTree<S>,
    v: NodeId,
    t: &CompositeConfig,
    g: &RoadmapGraph<S>,
    connector: ConnectorParams,
    cache: &BoundsCache<S>,
    seed: u64,
) -> Result<Vec<CompositeConfig>, ConnectFailure> {
    let from = tree.config(v);
    let chain = local_connect_with(from, t, g, connector.horizon, connector.attempts, seed, cache)?;
    let mut path = tree.path_to(v);
    if from != t {
        path.extend(chain);
        path.push(t.clone());
    }
    Ok(path)
}

/// Tuning knobs of [`solve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveParams<S> {
    /// Corridor slack in length units.
    pub delta: S,
    /// Nearest neighbours considered by expansion and rewiring.
    pub nn_count: usize,
    pub max_iters: usize,
    pub time_limit: Option<Duration>,
    /// Connector horizon; `None` uses four times the hop diameter.
    pub horizon: Option<Timestep>,
    pub connector_attempts: usize,
    pub seed: u64,
}

impl<S: Scalar> Default for SolveParams<S> {
    fn default() -> Self {
        Self {
            delta: S::from_f64_lossy(4.0),
            nn_count: 5,
            max_iters: 10_000,
            time_limit: Some(Duration::from_secs(60)),
            horizon: None,
            connector_attempts: CONNECTOR_ATTEMPTS,
            seed: 0,
        }
    }
}

/// A solved instance with its search statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanResult {
    pub path: Vec<CompositeConfig>,
    pub iterations: usize,
    pub wall_time: f64,
    pub tree_size: usize,
}

impl PlanResult {
    /// Number of composite moves.
    pub fn makespan(&self) -> usize {
        self.path.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("budget exhausted after {iterations} iterations ({wall_time:.3} s, {tree_size} nodes)")]
    Exhausted {
        iterations: usize,
        wall_time: f64,
        tree_size: usize,
    },
}

/// Runs the planner until a root-to-goal path is found or the budget runs
/// out. Deterministic per `params.seed` unless the time limit is hit.
pub fn solve<S: Scalar>(g: &RoadmapGraph<S>, a: &Assignment, params: &SolveParams<S>) -> Result<PlanResult, SolveError> {
    let clock = Instant::now();
    a.validate(g)?;
    let start = CompositeConfig::new(a.starts())?;
    let goal = CompositeConfig::new(a.goals())?;
    if start == goal {
        return Ok(PlanResult {
            path: vec![start],
            iterations: 0,
            wall_time: clock.elapsed().as_secs_f64(),
            tree_size: 1,
        });
    }
    let corridors = corridors(g, a, params.delta)?;
    let connector = ConnectorParams {
        horizon: params.horizon.unwrap_or_else(|| connector_horizon(g)),
        attempts: params.connector_attempts.max(1),
    };
    let cache = BoundsCache::new();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut tree = SearchTree::new(start, g);

    let mut iterations = 0;
    while iterations < params.max_iters {
        if params.time_limit.is_some_and(|limit| clock.elapsed() >= limit) {
            break;
        }
        iterations += 1;
        let Ok(v) = expand(&mut tree, &corridors, g, params.nn_count, &mut rng) else {
            continue;
        };
        rewire(&mut tree, v, g, params.nn_count, connector, &cache, &mut rng);
        #[cfg(debug_assertions)]
        if tree.len() < 2_000 {
            if let Err(e) = tree.check_invariants() {
                panic!("search tree invariant broken: {e}");
            }
        }
        let seed = rng.gen::<u64>();
        if let Ok(path) = connect_to_target(&tree, v, &goal, g, connector, &cache, seed) {
            return Ok(PlanResult {
                path,
                iterations,
                wall_time: clock.elapsed().as_secs_f64(),
                tree_size: tree.len(),
            });
        }
    }
    Err(SolveError::Exhausted {
        iterations,
        wall_time: clock.elapsed().as_secs_f64(),
        tree_size: tree.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::is_valid_step;
    use crate::roadmap::{build_grid, generate_carp_hard};
    use crate::validate::validate_plan;

    fn cfg(v: &[u32]) -> CompositeConfig {
        CompositeConfig::new(v.to_vec()).unwrap()
    }

    #[test]
    fn expand_from_root_uses_root() {
        let g = build_grid(3, 3, 1.0).unwrap();
        let mut tree = SearchTree::new(cfg(&[0]), &g);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = expand_towards(&mut tree, &[g.position(2)], &g, 5, &mut rng).unwrap();
        assert_eq!(tree.parent(n), Some(SearchTree::<f64>::ROOT));
        assert_eq!(tree.config(n), &cfg(&[1]));
        assert_eq!(tree.cost(n), 1.0);
    }

    #[test]
    fn expand_prefers_cheaper_predecessor() {
        // Nodes 1 (l_T 1) and 5 (l_T 3) both step into vertex 4.
        let g = build_grid(3, 3, 1.0).unwrap();
        let mut tree = SearchTree::new(cfg(&[0]), &g);
        let n1 = tree.add_child(0, cfg(&[1]), &g);
        let n2 = tree.add_child(n1, cfg(&[2]), &g);
        let n5 = tree.add_child(n2, cfg(&[5]), &g);
        tree.add_child(0, cfg(&[3]), &g);
        assert_eq!(tree.cost(n5), 3.0);
        assert_eq!(tree.nearest_to_points(&[g.position(4)], 2), vec![n1, n5]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = expand_towards(&mut tree, &[g.position(4)], &g, 2, &mut rng).unwrap();
        assert_eq!(tree.config(n), &cfg(&[4]));
        assert_eq!(tree.parent(n), Some(n1));
        assert_eq!(tree.cost(n), 2.0);
        tree.check_invariants().unwrap();
    }

    #[test]
    fn expand_skips_non_improving_duplicate() {
        let g = build_grid(3, 1, 1.0).unwrap();
        let mut tree = SearchTree::new(cfg(&[0]), &g);
        tree.add_child(0, cfg(&[1]), &g);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // Nearest to vertex 1's position is node [1] itself, which waits.
        assert_eq!(
            expand_towards(&mut tree, &[g.position(1)], &g, 1, &mut rng),
            Err(ExpandFailure::Duplicate)
        );
        assert_eq!(tree.len(), 2);
    }

    #[test]
    fn nn_count_is_clamped() {
        let g = build_grid(3, 3, 1.0).unwrap();
        let tree = SearchTree::new(cfg(&[0]), &g);
        assert_eq!(tree.nearest_to_points(&[g.position(8)], 50), vec![0]);
    }

    #[test]
    fn nearest_excludes_ancestors() {
        let g = build_grid(4, 1, 1.0).unwrap();
        let mut tree = SearchTree::new(cfg(&[0]), &g);
        let a = tree.add_child(0, cfg(&[1]), &g);
        let b = tree.add_child(a, cfg(&[2]), &g);
        let c = tree.add_child(0, cfg(&[3]), &g);
        assert_eq!(tree.nearest_to_node(b, 5), vec![c]);
    }

    #[test]
    fn rewire_improves_through_new_node() {
        // Target reached the long way round: 0 -> 1 -> 2 -> 5 -> 4 (cost 4).
        // The new node 3 is one move from 4 and has cost 1.
        let g = build_grid(3, 2, 1.0).unwrap();
        let mut tree = SearchTree::new(cfg(&[0]), &g);
        let a = tree.add_child(0, cfg(&[1]), &g);
        let b = tree.add_child(a, cfg(&[2]), &g);
        let c = tree.add_child(b, cfg(&[5]), &g);
        let target = tree.add_child(c, cfg(&[4]), &g);
        let v = tree.add_child(0, cfg(&[3]), &g);
        assert_eq!(tree.cost(target), 4.0);
        let cache = BoundsCache::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = rewire(&mut tree, v, &g, 5, ConnectorParams::for_graph(&g), &cache, &mut rng);
        assert!(n >= 1);
        assert_eq!(tree.parent(target), Some(v));
        assert_eq!(tree.cost(target), 2.0);
        tree.check_invariants().unwrap();
    }

    #[test]
    fn rewire_skips_when_connector_fails() {
        // Two agents on the gadget: node v cannot be joined to the other
        // leaf configuration by sequential planning.
        let (g, _) = generate_carp_hard::<f64>(2, 0).unwrap();
        let mut tree = SearchTree::new(cfg(&[0, 2]), &g);
        let far = tree.add_child(0, cfg(&[1, 2]), &g);
        let far2 = tree.add_child(far, cfg(&[3, 2]), &g);
        let far3 = tree.add_child(far2, cfg(&[3, 1]), &g);
        let far4 = tree.add_child(far3, cfg(&[3, 0]), &g);
        // Pretend a costly detour reached (2, 0) ...
        let goalish = tree.add_child(far4, cfg(&[1, 0]), &g);
        let before: Vec<_> = (0..tree.len()).map(|n| (tree.parent(n), tree.cost(n))).collect();
        let cache = BoundsCache::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let _ = goalish;
        assert_eq!(rewire(&mut tree, 0, &g, 5, ConnectorParams::for_graph(&g), &cache, &mut rng), 0);
        let after: Vec<_> = (0..tree.len()).map(|n| (tree.parent(n), tree.cost(n))).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn connect_to_target_variants() {
        let g = build_grid(3, 3, 1.0).unwrap();
        let tree = SearchTree::new(cfg(&[0, 8]), &g);
        let cache = BoundsCache::new();
        let p = ConnectorParams::for_graph(&g);
        let same = connect_to_target(&tree, 0, &cfg(&[0, 8]), &g, p, &cache, 0).unwrap();
        assert_eq!(same, vec![cfg(&[0, 8])]);
        let hop = connect_to_target(&tree, 0, &cfg(&[1, 7]), &g, p, &cache, 0).unwrap();
        assert_eq!(hop, vec![cfg(&[0, 8]), cfg(&[1, 7])]);
        let far = connect_to_target(&tree, 0, &cfg(&[2, 6]), &g, p, &cache, 0).unwrap();
        assert_eq!(far.first(), Some(&cfg(&[0, 8])));
        assert_eq!(far.last(), Some(&cfg(&[2, 6])));
        assert!(far.windows(2).all(|w| is_valid_step(&w[0], &w[1], &g)));
    }

    #[test]
    fn solve_trivial_and_single_agent() {
        let g = build_grid(5, 5, 1.0).unwrap();
        let a = Assignment::from_pairs(&[(3, 3), (7, 7)]);
        let r = solve(&g, &a, &SolveParams::default()).unwrap();
        assert_eq!(r.makespan(), 0);
        let a = Assignment::from_pairs(&[(0, 24)]);
        let r = solve(&g, &a, &SolveParams::default()).unwrap();
        assert_eq!(r.makespan(), 8);
        validate_plan(&r.path, &g, &a).unwrap();
    }

    #[test]
    fn solve_gadget() {
        let (g, a) = generate_carp_hard::<f64>(2, 0).unwrap();
        for seed in 0..10 {
            let params = SolveParams {
                seed,
                ..SolveParams::default()
            };
            let r = solve(&g, &a, &params).unwrap();
            validate_plan(&r.path, &g, &a).unwrap();
            assert_eq!(r, solve(&g, &a, &params).unwrap_or_else(|_| unreachable!()).with_time(r.wall_time));
        }
    }

    impl PlanResult {
        fn with_time(mut self, t: f64) -> Self {
            self.wall_time = t;
            self
        }
    }

    #[test]
    fn solve_rejects_invalid_assignment() {
        let g = build_grid(3, 3, 1.0).unwrap();
        let a = Assignment::from_pairs(&[(0, 1), (0, 2)]);
        assert!(matches!(solve(&g, &a, &SolveParams::default()), Err(SolveError::Invalid(_))));
    }
}
