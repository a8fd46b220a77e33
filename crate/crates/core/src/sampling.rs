//! Single-agent geodesic distances and the corridor-restricted sampler.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::roadmap::{Assignment, RoadmapGraph, VertexId};
use crate::scalar::{Point, Scalar};

/// Geodesic distances (sum of Euclidean edge lengths) from one source vertex.
/// Unreachable vertices hold `+inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField<S> {
    source: VertexId,
    dist: Vec<S>,
}

impl<S: Scalar> DistanceField<S> {
    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn get(&self, v: VertexId) -> S {
        self.dist[v as usize]
    }

    pub fn is_reachable(&self, v: VertexId) -> bool {
        self.dist[v as usize].is_finite()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.dist
    }
}

struct HeapEntry<S>(S, VertexId);

impl<S: Scalar> PartialEq for HeapEntry<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S: Scalar> Eq for HeapEntry<S> {}

impl<S: Scalar> PartialOrd for HeapEntry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Scalar> Ord for HeapEntry<S> {
    // Reversed for a min-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Dijkstra from `source` under Euclidean edge lengths.
pub fn shortest_distances<S: Scalar>(g: &RoadmapGraph<S>, source: VertexId) -> DistanceField<S> {
    let mut dist = vec![S::infinity(); g.num_vertices()];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = S::zero();
    heap.push(HeapEntry(S::zero(), source));
    while let Some(HeapEntry(d, u)) = heap.pop() {
        if d > dist[u as usize] {
            continue;
        }
        for &w in g.neighbors(u) {
            let nd = d + g.distance(u, w);
            if nd < dist[w as usize] {
                dist[w as usize] = nd;
                heap.push(HeapEntry(nd, w));
            }
        }
    }
    DistanceField { source, dist }
}

/// Vertices whose start/goal detour stays within `delta` of the shortest path.
#[derive(Clone, Debug, PartialEq)]
pub struct CorridorSet<S> {
    pub agent: usize,
    pub delta: S,
    vertices: Vec<VertexId>,
}

impl<S: Scalar> CorridorSet<S> {
    /// Members `q` satisfy `dist(s, q) + dist(q, t) <= dist(s, t) + delta`.
    /// A relative tolerance absorbs summation-order rounding so that every
    /// shortest-path vertex qualifies on non-integer embeddings.
    pub fn new(g: &RoadmapGraph<S>, agent: usize, s: VertexId, t: VertexId, delta: S) -> Result<Self> {
        if !(delta >= S::zero()) {
            return Err(Error::InvalidArgument("corridor slack must be non-negative".into()));
        }
        let from_s = shortest_distances(g, s);
        if !from_s.is_reachable(t) {
            return Err(Error::Unreachable { agent, start: s, goal: t });
        }
        let from_t = shortest_distances(g, t);
        let best = from_s.get(t);
        let bound = best + delta + S::coincidence_eps() * best.max(S::one());
        let vertices = (0..g.num_vertices() as VertexId)
            .filter(|&q| from_s.get(q) + from_t.get(q) <= bound)
            .collect();
        Ok(Self { agent, delta, vertices })
    }

    /// Member vertices in increasing id order.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

pub fn corridor<S: Scalar>(g: &RoadmapGraph<S>, s: VertexId, t: VertexId, delta: S) -> Result<CorridorSet<S>> {
    CorridorSet::new(g, 0, s, t, delta)
}

/// One corridor per agent of `a`.
pub fn corridors<S: Scalar>(g: &RoadmapGraph<S>, a: &Assignment, delta: S) -> Result<Vec<CorridorSet<S>>> {
    a.tasks
        .iter()
        .enumerate()
        .map(|(i, t)| CorridorSet::new(g, i, t.start, t.goal, delta))
        .collect()
}

/// Independent uniform draw of one corridor vertex per agent, returned as
/// positions.
pub fn sample_target<S: Scalar, R: Rng + ?Sized>(
    corridors: &[CorridorSet<S>],
    g: &RoadmapGraph<S>,
    rng: &mut R,
) -> Result<Vec<Point<S>>> {
    corridors
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.is_empty() {
                return Err(Error::EmptyCorridor(i));
            }
            let v = c.vertices[rng.gen_range(0..c.vertices.len())];
            Ok(g.position(v))
        })
        .collect()
}
