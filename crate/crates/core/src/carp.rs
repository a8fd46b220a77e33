//! Sequential prioritized planning over a time-indexed reservation table.
//!
//! Agents are planned one at a time; each plans an earliest-arrival path that
//! avoids everything already reserved, then commits its path and parks on its
//! goal forever. Agents that have not been planned yet hold their start vertex
//! as a permanent obstacle. The same planner, with a small number of shuffled
//! orders, serves as the local connector between composite configurations.

use std::cell::RefCell;
use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::composite::{is_valid_step, CompositeConfig};
use crate::roadmap::{Assignment, RoadmapGraph, Task, VertexId};
use crate::sampling::shortest_distances;
use crate::scalar::{Ordered, Scalar};

/// Discrete time step.
pub type Timestep = u32;

/// Attempt budget of the local connector.
pub const CONNECTOR_ATTEMPTS: usize = 3;

/// Default planning horizon `4 (|V| + k)`.
pub fn default_horizon<S: Scalar>(g: &RoadmapGraph<S>, agents: usize) -> Timestep {
    (4 * (g.num_vertices() + agents)) as Timestep
}

/// Default connector horizon `4 · hop diameter` (at least 4).
pub fn connector_horizon<S: Scalar>(g: &RoadmapGraph<S>) -> Timestep {
    4 * g.hop_diameter().max(1)
}

/// Vertex sequence of one agent from timestep 0 to its arrival.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedPath {
    vertices: Vec<VertexId>,
}

impl TimedPath {
    /// Checks that consecutive entries wait or follow an edge.
    pub fn new<S: Scalar>(vertices: Vec<VertexId>, g: &RoadmapGraph<S>) -> Option<Self> {
        if vertices.is_empty() {
            return None;
        }
        let ok = vertices.windows(2).all(|w| w[0] == w[1] || g.has_edge(w[0], w[1]));
        ok.then_some(Self { vertices })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn start(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn goal(&self) -> VertexId {
        *self.vertices.last().unwrap()
    }

    pub fn arrival(&self) -> Timestep {
        (self.vertices.len() - 1) as Timestep
    }

    /// Position at `t`; the agent stays on its goal after arrival.
    pub fn at(&self, t: Timestep) -> VertexId {
        self.vertices[(t as usize).min(self.vertices.len() - 1)]
    }

    /// Number of timesteps spent not moving before arrival.
    pub fn waits(&self) -> usize {
        self.vertices.windows(2).filter(|w| w[0] == w[1]).count()
    }

    pub fn length<S: Scalar>(&self, g: &RoadmapGraph<S>) -> S {
        self.vertices.windows(2).map(|w| g.distance(w[0], w[1])).sum()
    }
}

/// A reservation that would overlap one already held by another agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReservationConflict {
    pub vertex: VertexId,
    pub timestep: Timestep,
    pub holder: usize,
}

/// Occupied (vertex, timestep) and (directed edge, departure timestep) slots,
/// plus vertices held from some timestep onwards forever.
#[derive(Clone, Debug, Default)]
pub struct ReservationTable {
    vertices: HashMap<(VertexId, Timestep), usize>,
    edges: HashMap<(VertexId, VertexId, Timestep), usize>,
    permanent: HashMap<VertexId, (Timestep, usize)>,
    last_use: HashMap<VertexId, Timestep>,
    latest: Option<Timestep>,
}

impl ReservationTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Agent holding `v` at `t`, if any.
    pub fn holder(&self, v: VertexId, t: Timestep) -> Option<usize> {
        if let Some(&(from, agent)) = self.permanent.get(&v) {
            if from <= t {
                return Some(agent);
            }
        }
        self.vertices.get(&(v, t)).copied()
    }

    pub fn is_free(&self, v: VertexId, t: Timestep) -> bool {
        self.holder(v, t).is_none()
    }

    /// Agent traversing `a -> b` between `t` and `t + 1`, if any.
    pub fn edge_holder(&self, a: VertexId, b: VertexId, t: Timestep) -> Option<usize> {
        self.edges.get(&(a, b, t)).copied()
    }

    pub fn permanent_holder(&self, v: VertexId) -> Option<(Timestep, usize)> {
        self.permanent.get(&v).copied()
    }

    /// True when nothing is reserved on `v` at `t` or any later timestep.
    pub fn free_from(&self, v: VertexId, t: Timestep) -> bool {
        self.permanent.get(&v).is_none() && self.last_use.get(&v).is_none_or(|&last| last < t)
    }

    /// First timestep from which the table no longer changes.
    pub fn settle_time(&self) -> Timestep {
        self.latest.map_or(0, |t| t + 1)
    }

    pub fn block_permanently(&mut self, v: VertexId, from: Timestep, agent: usize) -> Result<(), ReservationConflict> {
        if let Some(&(_, holder)) = self.permanent.get(&v) {
            if holder != agent {
                return Err(ReservationConflict {
                    vertex: v,
                    timestep: from,
                    holder,
                });
            }
        }
        if let Some(&last) = self.last_use.get(&v) {
            if last > from {
                if let Some((&(_, t), &holder)) = self
                    .vertices
                    .iter()
                    .find(|(&(w, t), &h)| w == v && t > from && h != agent)
                {
                    return Err(ReservationConflict {
                        vertex: v,
                        timestep: t,
                        holder,
                    });
                }
            }
        }
        self.permanent.insert(v, (from, agent));
        Ok(())
    }

    /// Commits every step of `path` and parks the agent on its goal.
    pub fn commit(&mut self, agent: usize, path: &TimedPath) -> Result<(), ReservationConflict> {
        for (t, &v) in path.vertices.iter().enumerate() {
            let t = t as Timestep;
            if let Some(holder) = self.holder(v, t).filter(|&h| h != agent) {
                return Err(ReservationConflict {
                    vertex: v,
                    timestep: t,
                    holder,
                });
            }
        }
        for (t, &v) in path.vertices.iter().enumerate() {
            let t = t as Timestep;
            self.vertices.insert((v, t), agent);
            let last = self.last_use.entry(v).or_insert(t);
            *last = (*last).max(t);
            self.latest = Some(self.latest.map_or(t, |l| l.max(t)));
        }
        for (t, w) in path.vertices.windows(2).enumerate() {
            if w[0] != w[1] {
                self.edges.insert((w[0], w[1], t as Timestep), agent);
            }
        }
        self.block_permanently(path.goal(), path.arrival(), agent)
    }
}

/// Hop and geodesic lower bounds towards one goal vertex.
#[derive(Clone, Debug)]
pub struct GoalBounds<S> {
    hops: Vec<u32>,
    geo: Vec<S>,
}

impl<S: Scalar> GoalBounds<S> {
    pub fn new(g: &RoadmapGraph<S>, goal: VertexId) -> Self {
        let hops = g
            .hop_distances(goal)
            .into_iter()
            .map(|h| h.unwrap_or(u32::MAX))
            .collect();
        let geo = shortest_distances(g, goal).as_slice().to_vec();
        Self { hops, geo }
    }
}

/// Lazily filled per-goal bounds, shared by all searches of one planning run.
#[derive(Debug, Default)]
pub struct BoundsCache<S> {
    map: RefCell<HashMap<VertexId, Arc<GoalBounds<S>>>>,
}

impl<S: Scalar> BoundsCache<S> {
    pub fn new() -> Self {
        Self {
            map: RefCell::new(HashMap::new()),
        }
    }

    pub fn get(&self, g: &RoadmapGraph<S>, goal: VertexId) -> Arc<GoalBounds<S>> {
        self.map
            .borrow_mut()
            .entry(goal)
            .or_insert_with(|| Arc::new(GoalBounds::new(g, goal)))
            .clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureReason {
    /// Another agent holds the goal forever.
    GoalBlocked,
    /// No admissible path reaches the goal within the horizon.
    HorizonExhausted,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureReason::GoalBlocked => "goal blocked",
            FailureReason::HorizonExhausted => "horizon exhausted",
        })
    }
}

/// Earliest-arrival path for one agent, ties broken by distance travelled.
pub fn plan_single<S: Scalar>(
    g: &RoadmapGraph<S>,
    start: VertexId,
    goal: VertexId,
    table: &ReservationTable,
    horizon: Timestep,
) -> Result<TimedPath, FailureReason> {
    plan_single_with(g, start, goal, table, horizon, &GoalBounds::new(g, goal))
}

struct SearchNode {
    vertex: VertexId,
    time: Timestep,
    parent: u32,
}

/// A* over (vertex, timestep) keyed by `(arrival time, distance)`. Past the
/// table's settle time the environment is static, so states there are merged
/// per vertex.
pub fn plan_single_with<S: Scalar>(
    g: &RoadmapGraph<S>,
    start: VertexId,
    goal: VertexId,
    table: &ReservationTable,
    horizon: Timestep,
    bounds: &GoalBounds<S>,
) -> Result<TimedPath, FailureReason> {
    if table.permanent_holder(goal).is_some() {
        return Err(FailureReason::GoalBlocked);
    }
    if bounds.hops[start as usize] == u32::MAX || bounds.hops[start as usize] > horizon {
        return Err(FailureReason::HorizonExhausted);
    }
    let settle = table.settle_time();
    let key = |v: VertexId, t: Timestep| (v, t.min(settle));

    let mut nodes = vec![SearchNode {
        vertex: start,
        time: 0,
        parent: u32::MAX,
    }];
    let mut best: HashMap<(VertexId, Timestep), (Timestep, Ordered<S>)> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(key(start, 0), (0, Ordered(S::zero())));
    heap.push(Reverse((
        bounds.hops[start as usize],
        Ordered(bounds.geo[start as usize]),
        0u32,
        Ordered(S::zero()),
    )));

    while let Some(Reverse((_, _, idx, Ordered(dist)))) = heap.pop() {
        let (v, t) = (nodes[idx as usize].vertex, nodes[idx as usize].time);
        if best.get(&key(v, t)).is_some_and(|&(bt, bd)| (bt, bd) < (t, Ordered(dist))) {
            continue;
        }
        if v == goal && table.free_from(goal, t) {
            let mut vertices = Vec::with_capacity(t as usize + 1);
            let mut i = idx;
            while i != u32::MAX {
                vertices.push(nodes[i as usize].vertex);
                i = nodes[i as usize].parent;
            }
            vertices.reverse();
            return Ok(TimedPath { vertices });
        }
        if t >= horizon {
            continue;
        }
        let nt = t + 1;
        let here = std::iter::once(v);
        for w in here.chain(g.neighbors(v).iter().copied()) {
            let hops = bounds.hops[w as usize];
            if hops == u32::MAX || nt + hops > horizon {
                continue;
            }
            if !table.is_free(w, nt) {
                continue;
            }
            if w != v && table.edge_holder(w, v, t).is_some() {
                continue;
            }
            let nd = dist + g.distance(v, w);
            let k = key(w, nt);
            let cost = (nt, Ordered(nd));
            match best.entry(k) {
                Entry::Occupied(mut e) => {
                    if *e.get() <= cost {
                        continue;
                    }
                    e.insert(cost);
                }
                Entry::Vacant(e) => {
                    e.insert(cost);
                }
            }
            nodes.push(SearchNode {
                vertex: w,
                time: nt,
                parent: idx,
            });
            heap.push(Reverse((
                nt + hops,
                Ordered(nd + bounds.geo[w as usize]),
                (nodes.len() - 1) as u32,
                Ordered(nd),
            )));
        }
    }
    Err(FailureReason::HorizonExhausted)
}

/// First agent (in planning order) that could not be planned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CarpFailure {
    pub agent: usize,
    pub reason: FailureReason,
}

impl fmt::Display for CarpFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent {}: {}", self.agent, self.reason)
    }
}

/// Plans agents in `order`. Panics if `order` is not a permutation of the
/// agent indices.
pub fn plan_all<S: Scalar>(
    g: &RoadmapGraph<S>,
    a: &Assignment,
    order: &[usize],
    horizon: Timestep,
) -> Result<Vec<TimedPath>, CarpFailure> {
    plan_all_with(g, &a.tasks, order, horizon, &BoundsCache::new())
}

pub(crate) fn plan_all_with<S: Scalar>(
    g: &RoadmapGraph<S>,
    tasks: &[Task],
    order: &[usize],
    horizon: Timestep,
    cache: &BoundsCache<S>,
) -> Result<Vec<TimedPath>, CarpFailure> {
    let k = tasks.len();
    let mut seen = vec![false; k];
    assert!(
        order.len() == k && order.iter().all(|&i| i < k && !std::mem::replace(&mut seen[i], true)),
        "planning order must be a permutation of 0..{k}"
    );
    // Later agents are invisible to earlier ones, including their starts.
    let mut table = ReservationTable::new();
    let mut paths: Vec<Option<TimedPath>> = vec![None; k];
    for &agent in order {
        let task = tasks[agent];
        let bounds = cache.get(g, task.goal);
        let path = plan_single_with(g, task.start, task.goal, &table, horizon, &bounds)
            .map_err(|reason| CarpFailure { agent, reason })?;
        table
            .commit(agent, &path)
            .expect("planned paths respect the reservation table");
        paths[agent] = Some(path);
    }
    Ok(paths.into_iter().map(|p| p.expect("every agent planned")).collect())
}

/// Successful shuffled planning, with the 0-based attempt that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CarpPlan {
    pub paths: Vec<TimedPath>,
    pub attempt: usize,
}

impl CarpPlan {
    /// Latest arrival over all agents.
    pub fn makespan(&self) -> Timestep {
        self.paths.iter().map(TimedPath::arrival).max().unwrap_or(0)
    }

    /// Joint configurations for timesteps `0..=makespan`.
    pub fn configs(&self) -> Vec<CompositeConfig> {
        synchronize(&self.paths)
    }
}

/// Every attempt failed; one entry per attempt in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RetryFailure {
    pub attempts: Vec<CarpFailure>,
}

impl fmt::Display for RetryFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "all {} attempts failed", self.attempts.len())?;
        if let Some(last) = self.attempts.last() {
            write!(f, " (last: {last})")?;
        }
        Ok(())
    }
}

/// Runs [`plan_all`] with a fresh random order per attempt and returns the
/// first success.
pub fn plan_with_retries<S: Scalar>(
    g: &RoadmapGraph<S>,
    a: &Assignment,
    attempts: usize,
    horizon: Timestep,
    seed: u64,
) -> Result<CarpPlan, RetryFailure> {
    plan_with_retries_cached(g, &a.tasks, attempts, horizon, seed, &BoundsCache::new())
}

pub fn plan_with_retries_cached<S: Scalar>(
    g: &RoadmapGraph<S>,
    tasks: &[Task],
    attempts: usize,
    horizon: Timestep,
    seed: u64,
    cache: &BoundsCache<S>,
) -> Result<CarpPlan, RetryFailure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for attempt in 0..attempts.max(1) {
        let mut order: Vec<usize> = (0..tasks.len()).collect();
        order.shuffle(&mut rng);
        match plan_all_with(g, tasks, &order, horizon, cache) {
            Ok(paths) => return Ok(CarpPlan { paths, attempt }),
            Err(e) => failures.push(e),
        }
    }
    Err(RetryFailure { attempts: failures })
}

/// Joint configuration per timestep; agents that arrived hold their goal.
pub fn synchronize(paths: &[TimedPath]) -> Vec<CompositeConfig> {
    let makespan = paths.iter().map(TimedPath::arrival).max().unwrap_or(0);
    (0..=makespan)
        .map(|t| CompositeConfig::from_vec_unchecked(paths.iter().map(|p| p.at(t)).collect()))
        .collect()
}

/// The connector could not join two configurations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectFailure(pub RetryFailure);

/// Intermediate configurations strictly between `from` and `to` such that the
/// whole chain consists of valid composite moves. Empty when the two are
/// equal or directly adjacent in the composite graph.
pub fn local_connect<S: Scalar>(
    from: &CompositeConfig,
    to: &CompositeConfig,
    g: &RoadmapGraph<S>,
    horizon: Timestep,
    seed: u64,
) -> Result<Vec<CompositeConfig>, ConnectFailure> {
    local_connect_with(from, to, g, horizon, CONNECTOR_ATTEMPTS, seed, &BoundsCache::new())
}

pub fn local_connect_with<S: Scalar>(
    from: &CompositeConfig,
    to: &CompositeConfig,
    g: &RoadmapGraph<S>,
    horizon: Timestep,
    attempts: usize,
    seed: u64,
    cache: &BoundsCache<S>,
) -> Result<Vec<CompositeConfig>, ConnectFailure> {
    assert_eq!(from.num_agents(), to.num_agents(), "connector endpoints differ in agent count");
    if from == to || is_valid_step(from, to, g) {
        return Ok(Vec::new());
    }
    let tasks: Vec<Task> = from
        .vertices()
        .iter()
        .zip(to.vertices())
        .map(|(&start, &goal)| Task { start, goal })
        .collect();
    let plan = plan_with_retries_cached(g, &tasks, attempts, horizon, seed, cache).map_err(ConnectFailure)?;
    let mut chain = plan.configs();
    debug_assert_eq!(chain.first(), Some(from));
    debug_assert_eq!(chain.last(), Some(to));
    chain.pop();
    chain.remove(0);
    Ok(chain)
}
