#![allow(dead_code)]

use drrt_core::roadmap::RoadmapGraph;
use drrt_core::{Point, VertexId};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;

/// Connected graph on `n` distinct integer lattice points: a random tree plus
/// `extra` random chords.
pub fn random_graph<R: Rng>(n: usize, extra: usize, rng: &mut R) -> RoadmapGraph<f64> {
    let mut cells: Vec<(i32, i32)> = (0..5).flat_map(|x| (0..5).map(move |y| (x, y))).collect();
    cells.shuffle(rng);
    let positions = cells[..n]
        .iter()
        .map(|&(x, y)| Point::new(x as f64, y as f64))
        .collect();
    let mut edges = BTreeSet::new();
    for v in 1..n as VertexId {
        let u = rng.gen_range(0..v);
        edges.insert((u, v));
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..n as VertexId);
        let v = rng.gen_range(0..n as VertexId);
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    RoadmapGraph::new(positions, edges).unwrap()
}

/// `k` distinct vertices of `g`.
pub fn distinct_vertices<R: Rng>(g: &RoadmapGraph<f64>, k: usize, rng: &mut R) -> Vec<VertexId> {
    let mut all: Vec<VertexId> = (0..g.num_vertices() as VertexId).collect();
    all.shuffle(rng);
    all.truncate(k);
    all
}
