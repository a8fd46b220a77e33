//! Composite configuration space (Tensor product of the roadmap with itself,
//! one factor per agent), its metric, move validity and the direction oracle.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::roadmap::{RoadmapGraph, VertexId};
use crate::scalar::{Point, Scalar};

/// One vertex per agent, pairwise distinct.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompositeConfig(Box<[VertexId]>);

impl CompositeConfig {
    /// Fails when two agents share a vertex.
    pub fn new(vertices: Vec<VertexId>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            if !seen.insert(v) {
                return Err(Error::InvalidArgument(format!("agent {i} shares vertex {v}")));
            }
        }
        Ok(Self(vertices.into_boxed_slice()))
    }

    pub(crate) fn from_vec_unchecked(vertices: Vec<VertexId>) -> Self {
        debug_assert!(Self::new(vertices.clone()).is_ok());
        Self(vertices.into_boxed_slice())
    }

    pub fn num_agents(&self) -> usize {
        self.0.len()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn get(&self, agent: usize) -> VertexId {
        self.0[agent]
    }

    pub fn positions<S: Scalar>(&self, g: &RoadmapGraph<S>) -> Vec<Point<S>> {
        self.0.iter().map(|&v| g.position(v)).collect()
    }
}

impl fmt::Debug for CompositeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// A simultaneous step of all agents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositeMove {
    pub from: CompositeConfig,
    pub to: CompositeConfig,
}

/// Sum of per-agent Euclidean displacements.
pub fn delta<S: Scalar>(c1: &CompositeConfig, c2: &CompositeConfig, g: &RoadmapGraph<S>) -> Result<S> {
    if c1.num_agents() != c2.num_agents() {
        return Err(Error::LengthMismatch(c1.num_agents(), c2.num_agents()));
    }
    Ok(delta_unchecked(c1, c2, g))
}

pub(crate) fn delta_unchecked<S: Scalar>(c1: &CompositeConfig, c2: &CompositeConfig, g: &RoadmapGraph<S>) -> S {
    c1.0.iter().zip(c2.0.iter()).map(|(&a, &b)| g.distance(a, b)).sum()
}

/// δ between a configuration and a tuple of points (a sample).
pub fn delta_to_points<S: Scalar>(c: &CompositeConfig, u: &[Point<S>], g: &RoadmapGraph<S>) -> S {
    c.0.iter().zip(u).map(|(&v, p)| g.position(v).distance(p)).sum()
}

pub fn is_valid_move<S: Scalar>(m: &CompositeMove, g: &RoadmapGraph<S>) -> bool {
    is_valid_step(&m.from, &m.to, g)
}

/// Every agent waits or traverses an edge, targets are distinct and no two
/// agents exchange vertices. Following is allowed.
pub fn is_valid_step<S: Scalar>(from: &CompositeConfig, to: &CompositeConfig, g: &RoadmapGraph<S>) -> bool {
    if from.num_agents() != to.num_agents() {
        return false;
    }
    let mut targets = HashSet::with_capacity(to.num_agents());
    let mut origin = HashMap::with_capacity(from.num_agents());
    for (i, (&a, &b)) in from.0.iter().zip(to.0.iter()).enumerate() {
        if a != b && !g.has_edge(a, b) {
            return false;
        }
        if !targets.insert(b) {
            return false;
        }
        origin.insert(a, i);
    }
    for (i, (&a, &b)) in from.0.iter().zip(to.0.iter()).enumerate() {
        if a == b {
            continue;
        }
        if let Some(&j) = origin.get(&b) {
            if j != i && to.0[j] == a {
                return false;
            }
        }
    }
    true
}

/// The oracle could not place every agent under any of the tried orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleFailure {
    pub attempts: usize,
}

/// Extra agent orders tried when some agent is left without a feasible action.
pub const ORACLE_RETRIES: usize = 3;

/// Angle at `from` between the ray to `target` and the ray to `to`. The wait
/// candidate (`to == from`) scores 0 when the target coincides with `from`
/// and π otherwise; a move towards a coincident target scores π.
pub fn angle_score<S: Scalar>(g: &RoadmapGraph<S>, from: VertexId, to: VertexId, target: &Point<S>) -> S {
    let origin = g.position(from);
    let (dx, dy) = target.sub(&origin);
    let dlen = dx.hypot(dy);
    let coincident = dlen <= S::coincidence_eps();
    if to == from {
        return if coincident { S::zero() } else { S::PI() };
    }
    if coincident {
        return S::PI();
    }
    let (ex, ey) = g.position(to).sub(&origin);
    // atan2 of cross and dot stays accurate near 0 and π, unlike acos.
    let cross = dx * ey - dy * ex;
    let dot = dx * ex + dy * ey;
    cross.abs().atan2(dot)
}

/// Sequential greedy rule for a fixed agent order. Each agent takes the
/// lowest-scoring wait-or-move candidate that does not clash with the
/// collision list: targets and traversals already committed in this call, and
/// the current vertices of agents not yet processed. Equal scores (within
/// tolerance) go to the lowest vertex id. `None` when some agent has no
/// admissible action.
pub fn oracle_in_order<S: Scalar>(
    v: &CompositeConfig,
    u: &[Point<S>],
    g: &RoadmapGraph<S>,
    order: &[usize],
) -> Option<CompositeConfig> {
    let k = v.num_agents();
    debug_assert_eq!(u.len(), k);
    let eps = S::coincidence_eps();
    // Collision list: committed targets and committed directed traversals.
    let mut taken: HashSet<VertexId> = HashSet::with_capacity(k);
    let mut traversed: HashSet<(VertexId, VertexId)> = HashSet::with_capacity(k);
    let mut pending: HashSet<VertexId> = v.0.iter().copied().collect();
    let mut next = v.0.to_vec();
    let mut candidates: Vec<(S, VertexId)> = Vec::new();
    for &i in order {
        let here = v.0[i];
        pending.remove(&here);
        candidates.clear();
        candidates.push((angle_score(g, here, here, &u[i]), here));
        for &w in g.neighbors(here) {
            candidates.push((angle_score(g, here, w, &u[i]), w));
        }
        candidates.retain(|&(_, w)| !taken.contains(&w) && !pending.contains(&w) && !traversed.contains(&(w, here)));
        let best = candidates.iter().map(|c| c.0).fold(S::infinity(), S::min);
        let choice = candidates
            .iter()
            .filter(|c| c.0 <= best + eps)
            .map(|c| c.1)
            .min()?;
        taken.insert(choice);
        if choice != here {
            traversed.insert((here, choice));
        }
        next[i] = choice;
    }
    Some(CompositeConfig(next.into_boxed_slice()))
}

/// Direction oracle: steps every agent of `v` towards its point in `u` under a
/// random agent order, reshuffling up to `retries` times on infeasibility.
pub fn oracle_with_retries<S: Scalar, R: Rng + ?Sized>(
    v: &CompositeConfig,
    u: &[Point<S>],
    g: &RoadmapGraph<S>,
    rng: &mut R,
    retries: usize,
) -> Result<CompositeConfig, OracleFailure> {
    let mut order: Vec<usize> = (0..v.num_agents()).collect();
    for _ in 0..=retries {
        order.shuffle(rng);
        if let Some(c) = oracle_in_order(v, u, g, &order) {
            return Ok(c);
        }
    }
    Err(OracleFailure { attempts: retries + 1 })
}

pub fn oracle<S: Scalar, R: Rng + ?Sized>(
    v: &CompositeConfig,
    u: &[Point<S>],
    g: &RoadmapGraph<S>,
    rng: &mut R,
) -> Result<CompositeConfig, OracleFailure> {
    oracle_with_retries(v, u, g, rng, ORACLE_RETRIES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roadmap::build_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(v: &[VertexId]) -> CompositeConfig {
        CompositeConfig::new(v.to_vec()).unwrap()
    }

    fn path(n: usize) -> RoadmapGraph<f64> {
        build_grid(n, 1, 1.0).unwrap()
    }

    #[test]
    fn rejects_colliding_config() {
        assert!(CompositeConfig::new(vec![1, 2, 1]).is_err());
    }

    #[test]
    fn delta_examples() {
        let g = build_grid(3, 3, 1.0).unwrap();
        let c = cfg(&[0, 4, 8]);
        assert_eq!(delta(&c, &c, &g).unwrap(), 0.0);
        assert_eq!(delta(&c, &cfg(&[1, 4, 8]), &g).unwrap(), 1.0);
        assert_eq!(delta(&c, &cfg(&[1, 5, 8]), &g).unwrap(), 2.0);
        assert_eq!(delta(&c, &cfg(&[0, 4]), &g), Err(Error::LengthMismatch(3, 2)));
    }

    #[test]
    fn swap_forbidden_follow_allowed() {
        let g = path(3);
        let swap = CompositeMove {
            from: cfg(&[0, 1]),
            to: cfg(&[1, 0]),
        };
        assert!(!is_valid_move(&swap, &g));
        // a1 moves v2 -> v3 while a2 moves v1 -> v2.
        let follow = CompositeMove {
            from: cfg(&[1, 0]),
            to: cfg(&[2, 1]),
        };
        assert!(is_valid_move(&follow, &g));
        let wait = CompositeMove {
            from: cfg(&[0, 2]),
            to: cfg(&[0, 2]),
        };
        assert!(is_valid_move(&wait, &g));
        // Non-adjacent jump.
        assert!(!is_valid_step(&cfg(&[0]), &cfg(&[2]), &g));
    }

    #[test]
    fn rotation_on_a_cycle_is_valid() {
        let g = build_grid(2, 2, 1.0).unwrap();
        // 0 -> 1 -> 3 -> 2 -> 0 all at once.
        assert!(is_valid_step(&cfg(&[0, 1, 3, 2]), &cfg(&[1, 3, 2, 0]), &g));
    }

    #[test]
    fn oracle_single_agent_picks_smallest_angle() {
        let g = build_grid(3, 3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = oracle(&cfg(&[0]), &[Point::new(2.0, 0.1)], &g, &mut rng).unwrap();
        assert_eq!(out, cfg(&[1]));
        let out = oracle(&cfg(&[4]), &[g.position(4)], &g, &mut rng).unwrap();
        assert_eq!(out, cfg(&[4]));
    }

    #[test]
    fn oracle_equal_angles_take_lowest_id() {
        let g = build_grid(3, 3, 1.0).unwrap();
        let out = oracle_in_order(&cfg(&[0]), &[Point::new(1.0, 1.0)], &g, &[0]).unwrap();
        assert_eq!(out, cfg(&[1]));
    }

    #[test]
    fn facing_agents_on_two_path_both_wait() {
        let g = path(2);
        let v = cfg(&[0, 1]);
        let u = [g.position(1), g.position(0)];
        for order in [[0, 1], [1, 0]] {
            assert_eq!(oracle_in_order(&v, &u, &g, &order), Some(v.clone()));
        }
    }

    #[test]
    fn followers_move_only_behind_processed_leaders() {
        let g = path(3);
        let v = cfg(&[1, 0]);
        let u = [g.position(2), g.position(2)];
        // Leader first: it vacates 1 and the follower takes it.
        assert_eq!(oracle_in_order(&v, &u, &g, &[0, 1]), Some(cfg(&[2, 1])));
        // Follower first: vertex 1 is still occupied, so it waits.
        assert_eq!(oracle_in_order(&v, &u, &g, &[1, 0]), Some(cfg(&[2, 0])));
    }

    #[test]
    fn oracle_output_is_always_a_valid_step() {
        let g = build_grid(3, 3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = cfg(&[0, 1, 4, 5, 8]);
        for _ in 0..200 {
            let u: Vec<_> = (0..5).map(|_| g.position(rng.gen_range(0..9))).collect();
            let out = oracle(&v, &u, &g, &mut rng).unwrap();
            assert!(is_valid_step(&v, &out, &g));
        }
    }
}
