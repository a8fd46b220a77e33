//! Planar-embedded roadmap graphs, agent assignments and the benchmark map
//! generators.

mod generate;
mod io;

pub use generate::{
    build_grid, densify_series, generate_carp_hard, random_assignment, random_spanning_tree,
    MapSetDescriptor,
};
pub use io::{read_assignment, read_map, write_assignment, write_map};

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::scalar::{Point, Scalar};

/// Dense vertex index.
pub type VertexId = u32;

/// Undirected graph with a 2-D embedding of its vertices.
///
/// Edges are stored once with `u < v`, sorted. Adjacency lists are sorted by
/// vertex id.
#[derive(Clone, Debug, PartialEq)]
pub struct RoadmapGraph<S> {
    positions: Vec<Point<S>>,
    edges: Vec<(VertexId, VertexId)>,
    adjacency: Vec<Vec<VertexId>>,
}

impl<S: Scalar> RoadmapGraph<S> {
    /// Builds a graph, checking every structural invariant. Edges may be given
    /// in either orientation but must not repeat.
    pub fn new(positions: Vec<Point<S>>, edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self> {
        let n = positions.len();
        if n > VertexId::MAX as usize {
            return Err(Error::InvalidGraph("too many vertices".into()));
        }
        for (i, p) in positions.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidGraph(format!("vertex {i} has a non-finite position")));
            }
        }
        let mut seen_pos = HashSet::with_capacity(n);
        for (i, p) in positions.iter().enumerate() {
            let key = (p.x.to_f64_lossy().to_bits(), p.y.to_f64_lossy().to_bits());
            if !seen_pos.insert(key) {
                return Err(Error::InvalidGraph(format!("vertex {i} duplicates another position")));
            }
        }
        let mut list = Vec::new();
        let mut seen = HashSet::new();
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) references a missing vertex")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            list.push(e);
        }
        Ok(Self::from_canonical(positions, list))
    }

    fn from_canonical(positions: Vec<Point<S>>, mut edges: Vec<(VertexId, VertexId)>) -> Self {
        edges.sort_unstable();
        let mut adjacency = vec![Vec::new(); positions.len()];
        for &(u, v) in &edges {
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Self {
            positions,
            edges,
            adjacency,
        }
    }

    /// Same vertex set, different edge set. Edges must be canonical and valid.
    pub(crate) fn with_edges(&self, edges: Vec<(VertexId, VertexId)>) -> Self {
        Self::from_canonical(self.positions.clone(), edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Canonical `(min, max)` edge list, sorted.
    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn position(&self, v: VertexId) -> Point<S> {
        self.positions[v as usize]
    }

    pub fn positions(&self) -> &[Point<S>] {
        &self.positions
    }

    pub fn contains(&self, v: VertexId) -> bool {
        (v as usize) < self.positions.len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.contains(u) && self.adjacency[u as usize].binary_search(&v).is_ok()
    }

    /// Euclidean distance between two vertex positions.
    pub fn distance(&self, u: VertexId, v: VertexId) -> S {
        self.positions[u as usize].distance(&self.positions[v as usize])
    }

    pub fn max_edge_length(&self) -> S {
        self.edges
            .iter()
            .map(|&(u, v)| self.distance(u, v))
            .fold(S::zero(), S::max)
    }

    /// Hop counts from `source`; `None` for unreachable vertices.
    pub fn hop_distances(&self, source: VertexId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.num_vertices()];
        let mut queue = VecDeque::new();
        dist[source as usize] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize].unwrap_or(0);
            for &w in self.neighbors(u) {
                if dist[w as usize].is_none() {
                    dist[w as usize] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.num_vertices() == 0 || self.hop_distances(0).iter().all(Option::is_some)
    }

    /// Largest finite hop distance between any two vertices.
    pub fn hop_diameter(&self) -> u32 {
        (0..self.num_vertices() as VertexId)
            .map(|s| self.hop_distances(s).into_iter().flatten().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}

/// One agent's start and goal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Task {
    pub start: VertexId,
    pub goal: VertexId,
}

/// Start/goal pairs, one per agent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub tasks: Vec<Task>,
}

impl Assignment {
    pub fn new(tasks: Vec<Task>) -> Self {
        Self { tasks }
    }

    pub fn from_pairs(pairs: &[(VertexId, VertexId)]) -> Self {
        Self::new(pairs.iter().map(|&(start, goal)| Task { start, goal }).collect())
    }

    pub fn num_agents(&self) -> usize {
        self.tasks.len()
    }

    pub fn starts(&self) -> Vec<VertexId> {
        self.tasks.iter().map(|t| t.start).collect()
    }

    pub fn goals(&self) -> Vec<VertexId> {
        self.tasks.iter().map(|t| t.goal).collect()
    }

    /// Checks distinct starts, distinct goals and vertex validity against `g`.
    pub fn validate<S: Scalar>(&self, g: &RoadmapGraph<S>) -> Result<()> {
        let mut starts = HashSet::new();
        let mut goals = HashSet::new();
        for (i, t) in self.tasks.iter().enumerate() {
            if !g.contains(t.start) || !g.contains(t.goal) {
                return Err(Error::InvalidAssignment(format!("agent {i} references a missing vertex")));
            }
            if !starts.insert(t.start) {
                return Err(Error::InvalidAssignment(format!("agent {i} shares start {}", t.start)));
            }
            if !goals.insert(t.goal) {
                return Err(Error::InvalidAssignment(format!("agent {i} shares goal {}", t.goal)));
            }
        }
        Ok(())
    }
}
