use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Assignment, RoadmapGraph, Task, VertexId};
use crate::error::{Error, Result};
use crate::scalar::{Point, Scalar};

/// 4-connected `width × height` lattice. Vertex `(x, y)` has id `y * width + x`.
pub fn build_grid<S: Scalar>(width: usize, height: usize, spacing: S) -> Result<RoadmapGraph<S>> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument("grid dimensions must be at least 1".into()));
    }
    if !(spacing > S::zero()) || !spacing.is_finite() {
        return Err(Error::InvalidArgument("grid spacing must be positive".into()));
    }
    let id = |x: usize, y: usize| (y * width + x) as VertexId;
    let mut positions = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            positions.push(Point::new(
                S::from_usize(x).unwrap() * spacing,
                S::from_usize(y).unwrap() * spacing,
            ));
        }
    }
    let mut edges = Vec::new();
    for y in 0..height {
        for x in 0..width {
            if x + 1 < width {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < height {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    Ok(RoadmapGraph::from_canonical(positions, edges))
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Randomized Kruskal: edges of `g` in a seeded random order, kept when they
/// join two components.
pub fn random_spanning_tree<S: Scalar>(g: &RoadmapGraph<S>, seed: u64) -> Result<RoadmapGraph<S>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = g.edges().to_vec();
    order.shuffle(&mut rng);
    let mut sets = DisjointSets::new(g.num_vertices());
    let tree: Vec<_> = order
        .into_iter()
        .filter(|&(u, v)| sets.union(u as usize, v as usize))
        .collect();
    Ok(g.with_edges(tree))
}

/// Nested series from `tree` to `g`, adding `ceil(missing / steps)` random
/// missing edges per step. Returns `steps + 1` graphs.
pub fn densify_series<S: Scalar>(
    g: &RoadmapGraph<S>,
    tree: &RoadmapGraph<S>,
    steps: usize,
    seed: u64,
) -> Result<Vec<RoadmapGraph<S>>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("densify steps must be at least 1".into()));
    }
    if g.num_vertices() != tree.num_vertices() {
        return Err(Error::InvalidArgument("tree and graph vertex counts differ".into()));
    }
    for &(u, v) in tree.edges() {
        if !g.has_edge(u, v) {
            return Err(Error::NotASubgraph(u, v));
        }
    }
    let present: HashSet<_> = tree.edges().iter().copied().collect();
    let mut missing: Vec<_> = g.edges().iter().copied().filter(|e| !present.contains(e)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    missing.shuffle(&mut rng);
    let batch = missing.len().div_ceil(steps);

    let mut series = Vec::with_capacity(steps + 1);
    series.push(tree.clone());
    let mut edges = tree.edges().to_vec();
    for step in 0..steps {
        let lo = (step * batch).min(missing.len());
        let hi = ((step + 1) * batch).min(missing.len());
        edges.extend_from_slice(&missing[lo..hi]);
        series.push(tree.with_edges(edges.clone()));
    }
    Ok(series)
}

/// Independent uniform `k`-subsets for starts and goals.
pub fn random_assignment<S: Scalar>(g: &RoadmapGraph<S>, k: usize, seed: u64) -> Result<Assignment> {
    let n = g.num_vertices();
    if k > n {
        return Err(Error::InvalidArgument(format!("{k} agents exceed {n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = rand::seq::index::sample(&mut rng, n, k);
    let goals = rand::seq::index::sample(&mut rng, n, k);
    Ok(Assignment::new(
        starts
            .iter()
            .zip(goals.iter())
            .map(|(s, t)| Task {
                start: s as VertexId,
                goal: t as VertexId,
            })
            .collect(),
    ))
}

/// Parameters of the densified spanning-tree map set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MapSetDescriptor {
    pub width: usize,
    pub height: usize,
    pub density_steps: usize,
    pub seed: u64,
}

impl MapSetDescriptor {
    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(Error::InvalidArgument("map set grid must be at least 2x2".into()));
        }
        if self.density_steps == 0 {
            return Err(Error::InvalidArgument("density steps must be at least 1".into()));
        }
        Ok(())
    }

    /// Spanning tree of the unit grid followed by the densified series; the
    /// last map is the full grid.
    pub fn build<S: Scalar>(&self) -> Result<Vec<RoadmapGraph<S>>> {
        self.validate()?;
        let grid = build_grid(self.width, self.height, S::one())?;
        let tree = random_spanning_tree(&grid, self.seed)?;
        densify_series(&grid, &tree, self.density_steps, self.seed.wrapping_add(1))
    }
}

/// Incremental builder for the sequential-planner-hard family. Vertices live on
/// an integer lattice so the embedding stays injective.
struct HardMapBuilder {
    cells: Vec<(i64, i64)>,
    occupied: HashSet<(i64, i64)>,
    edges: Vec<(VertexId, VertexId)>,
    degree: Vec<usize>,
    tasks: Vec<Task>,
}

impl HardMapBuilder {
    fn new() -> Self {
        Self {
            cells: Vec::new(),
            occupied: HashSet::new(),
            edges: Vec::new(),
            degree: Vec::new(),
            tasks: Vec::new(),
        }
    }

    fn add_vertex(&mut self, cell: (i64, i64)) -> VertexId {
        debug_assert!(!self.occupied.contains(&cell));
        self.occupied.insert(cell);
        self.cells.push(cell);
        self.degree.push(0);
        (self.cells.len() - 1) as VertexId
    }

    fn add_edge(&mut self, u: VertexId, v: VertexId) {
        self.edges.push((u.min(v), u.max(v)));
        self.degree[u as usize] += 1;
        self.degree[v as usize] += 1;
    }

    fn swap_task(&mut self, a: VertexId, b: VertexId) {
        self.tasks.push(Task { start: a, goal: b });
        self.tasks.push(Task { start: b, goal: a });
    }

    /// Nearest free lattice cell to `near`, scanning square rings outward and
    /// preferring cells that continue the direction `away` points to.
    fn free_cell(&self, near: (i64, i64), away: (i64, i64)) -> (i64, i64) {
        for r in 1i64.. {
            let mut ring = Vec::new();
            for dx in -r..=r {
                for dy in -r..=r {
                    if dx.abs().max(dy.abs()) == r {
                        ring.push((dx, dy));
                    }
                }
            }
            let score = |&(dx, dy): &(i64, i64)| {
                let len2 = dx * dx + dy * dy;
                (len2, -(dx * away.0 + dy * away.1), dx, dy)
            };
            ring.sort_by_key(score);
            if let Some(&(dx, dy)) = ring.iter().find(|&&(dx, dy)| !self.occupied.contains(&(near.0 + dx, near.1 + dy))) {
                return (near.0 + dx, near.1 + dy);
            }
        }
        unreachable!()
    }

    /// Direction from the mean of `v`'s neighbors towards `v`.
    fn outward(&self, v: VertexId) -> (i64, i64) {
        let c = self.cells[v as usize];
        let mut d = (0, 0);
        for &(a, b) in &self.edges {
            let other = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            let o = self.cells[other as usize];
            d.0 += c.0 - o.0;
            d.1 += c.1 - o.1;
        }
        d
    }

    /// Path `p1 - p2 - p3` with branch `b` on `p2`, placed around `anchor`
    /// heading in direction `dir`. Returns `(p1, p2, p3, b)`.
    fn gadget_at(&mut self, b_cell: (i64, i64), dir: (i64, i64)) -> (VertexId, VertexId, VertexId, VertexId) {
        let b = self.add_vertex(b_cell);
        let p2_cell = self.free_cell(b_cell, dir);
        let p2 = self.add_vertex(p2_cell);
        let step = (p2_cell.0 - b_cell.0, p2_cell.1 - b_cell.1);
        // p1 and p3 sit perpendicular to the b -> p2 direction when free.
        let perp = (-step.1, step.0);
        let p1_cell = self.free_cell(p2_cell, perp);
        let p1 = self.add_vertex(p1_cell);
        let p3_cell = self.free_cell(p2_cell, (-perp.0, -perp.1));
        let p3 = self.add_vertex(p3_cell);
        self.add_edge(p1, p2);
        self.add_edge(p2, p3);
        self.add_edge(p2, b);
        (p1, p2, p3, b)
    }
}

/// Map and assignment that sequential prioritized planning cannot solve: a
/// two-agent swap gadget grown by random leaf expansions until it carries
/// `target_agents` agents, all in swap pairs.
pub fn generate_carp_hard<S: Scalar>(target_agents: usize, seed: u64) -> Result<(RoadmapGraph<S>, Assignment)> {
    if target_agents < 2 || target_agents % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "agent count must be even and at least 2, got {target_agents}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = HardMapBuilder::new();

    // Base gadget: p1 (0,0) - p2 (1,0) - p3 (2,0), branch (1,1) on p2.
    let p1 = b.add_vertex((0, 0));
    let p2 = b.add_vertex((1, 0));
    let p3 = b.add_vertex((2, 0));
    let br = b.add_vertex((1, 1));
    b.add_edge(p1, p2);
    b.add_edge(p2, p3);
    b.add_edge(p2, br);
    b.swap_task(p1, p3);

    while b.tasks.len() < target_agents {
        let leaves: Vec<VertexId> = (0..b.cells.len() as VertexId).filter(|&v| b.degree[v as usize] == 1).collect();
        let anchor = *leaves.choose(&mut rng).expect("a tree always has leaves");
        let anchor_cell = b.cells[anchor as usize];
        let dir = b.outward(anchor);
        // Splitting the anchor into a crossing is only possible when no agent
        // starts or ends on it.
        let anchor_free = b.tasks.iter().all(|t| t.start != anchor && t.goal != anchor);
        if anchor_free && rng.gen_bool(0.5) {
            // Two leaves on the anchor; the anchor becomes the crossing vertex.
            let perp = (-dir.1, dir.0);
            let a_cell = b.free_cell(anchor_cell, perp);
            let a = b.add_vertex(a_cell);
            let c_cell = b.free_cell(anchor_cell, (-perp.0, -perp.1));
            let c = b.add_vertex(c_cell);
            b.add_edge(anchor, a);
            b.add_edge(anchor, c);
            b.swap_task(a, c);
        } else {
            // A fresh gadget hung off the anchor by its branch vertex.
            let b_cell = b.free_cell(anchor_cell, dir);
            let (q1, _, q3, qb) = b.gadget_at(b_cell, dir);
            b.add_edge(anchor, qb);
            b.swap_task(q1, q3);
        }
    }

    let positions = b
        .cells
        .iter()
        .map(|&(x, y)| Point::new(S::from_i64(x).unwrap(), S::from_i64(y).unwrap()))
        .collect();
    let g = RoadmapGraph::new(positions, b.edges)?;
    Ok((g, Assignment::new(b.tasks)))
}
