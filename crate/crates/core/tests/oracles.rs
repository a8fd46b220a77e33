mod common;

use common::{distinct_vertices, random_graph};
use drrt_core::carp::{plan_single, FailureReason, ReservationTable, TimedPath};
use drrt_core::composite::{is_valid_step, oracle_in_order};
use drrt_core::roadmap::RoadmapGraph;
use drrt_core::sampling::shortest_distances;
use drrt_core::{CompositeConfig, Point, VertexId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

/// Sequential angle-min rule written from scratch with `atan2`.
fn reference_oracle(v: &[VertexId], u: &[Point<f64>], g: &RoadmapGraph<f64>, order: &[usize]) -> Option<Vec<VertexId>> {
    let mut next = v.to_vec();
    let mut done = vec![false; v.len()];
    for &i in order {
        let here = v[i];
        let p = g.position(here);
        let (tx, ty) = (u[i].x - p.x, u[i].y - p.y);
        let at_target = tx.hypot(ty) <= 1e-9;
        let mut options = vec![here];
        options.extend_from_slice(g.neighbors(here));
        let blocked = |w: VertexId| {
            (0..v.len()).any(|j| {
                j != i
                    && ((done[j] && next[j] == w)
                        || (!done[j] && v[j] == w)
                        || (done[j] && w != here && next[j] == here && v[j] == w))
            })
        };
        let score = |w: VertexId| -> f64 {
            if w == here {
                return if at_target { 0.0 } else { std::f64::consts::PI };
            }
            if at_target {
                return std::f64::consts::PI;
            }
            let q = g.position(w);
            let mut d = (ty.atan2(tx) - (q.y - p.y).atan2(q.x - p.x)).abs();
            if d > std::f64::consts::PI {
                d = 2.0 * std::f64::consts::PI - d;
            }
            d
        };
        let admissible: Vec<(f64, VertexId)> = options.into_iter().filter(|&w| !blocked(w)).map(|w| (score(w), w)).collect();
        let best = admissible.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
        let choice = admissible.iter().filter(|a| a.0 <= best + 1e-9).map(|a| a.1).min()?;
        next[i] = choice;
        done[i] = true;
    }
    Some(next)
}

#[test]
fn oracle_matches_exhaustive_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    for call in 0..500 {
        let n = rng.gen_range(3..=6);
        let g = random_graph(n, rng.gen_range(0..4), &mut rng);
        let k = rng.gen_range(2..=3).min(n);
        let v = distinct_vertices(&g, k, &mut rng);
        // Targets: vertex positions (often coincident or axis-aligned) or free points.
        let u: Vec<Point<f64>> = (0..k)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    g.position(rng.gen_range(0..n as VertexId))
                } else {
                    Point::new(rng.gen_range(-1.0..5.0), rng.gen_range(-1.0..5.0))
                }
            })
            .collect();
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(&mut rng);
        let config = CompositeConfig::new(v.clone()).unwrap();
        let got = oracle_in_order(&config, &u, &g, &order);
        let want = reference_oracle(&v, &u, &g, &order);
        assert_eq!(got.as_ref().map(|c| c.vertices().to_vec()), want, "call {call}: v={v:?} u={u:?} order={order:?}");
        if let Some(next) = got {
            assert!(is_valid_step(&config, &next, &g), "call {call}");
            checked += 1;
        }
    }
    assert!(checked > 0);
}

/// Another agent's timed walk; it stays on its last vertex forever.
struct Walk(Vec<VertexId>);

impl Walk {
    fn at(&self, t: usize) -> VertexId {
        self.0[t.min(self.0.len() - 1)]
    }
}

fn random_walks(g: &RoadmapGraph<f64>, start: VertexId, goal: VertexId, rng: &mut ChaCha8Rng) -> (ReservationTable, Vec<Walk>) {
    let mut table = ReservationTable::new();
    let mut walks: Vec<Walk> = Vec::new();
    for agent in 1..=rng.gen_range(0..=3) {
        let free: Vec<VertexId> = (0..g.num_vertices() as VertexId)
            .filter(|&v| v != start && walks.iter().all(|w| w.at(0) != v))
            .collect();
        let Some(&first) = free.choose(rng) else {
            break;
        };
        let mut v = first;
        let mut path = vec![v];
        for _ in 0..rng.gen_range(0..8) {
            if rng.gen_bool(0.7) {
                v = *g.neighbors(v).choose(rng).unwrap_or(&v);
            }
            path.push(v);
        }
        // Avoid parking on our goal most of the time so that plans exist.
        if path.last() == Some(&goal) && rng.gen_bool(0.7) {
            continue;
        }
        let tp = TimedPath::new(path.clone(), g).unwrap();
        let mut trial = table.clone();
        if trial.commit(agent, &tp).is_ok() && swap_free(&walks, &path) {
            table = trial;
            walks.push(Walk(path));
        }
    }
    (table, walks)
}

fn swap_free(walks: &[Walk], path: &[VertexId]) -> bool {
    let me = Walk(path.to_vec());
    let end = walks.iter().map(|w| w.0.len()).chain([path.len()]).max().unwrap();
    walks.iter().all(|w| (0..end).all(|t| !(w.at(t) == me.at(t + 1) && w.at(t + 1) == me.at(t) && me.at(t) != me.at(t + 1))))
}

/// Exhaustive time-expanded search: least distance to each (vertex, t).
fn brute_force(g: &RoadmapGraph<f64>, start: VertexId, goal: VertexId, walks: &[Walk], horizon: usize) -> Option<(usize, f64)> {
    let n = g.num_vertices();
    let occupied = |v: VertexId, t: usize| walks.iter().any(|w| w.at(t) == v);
    let swap = |a: VertexId, b: VertexId, t: usize| walks.iter().any(|w| w.at(t) == b && w.at(t + 1) == a);
    let end = walks.iter().map(|w| w.0.len()).max().unwrap_or(0);
    let goal_free_from = |t: usize| (t..=end.max(t)).all(|s| !occupied(goal, s));
    let mut reach = vec![f64::INFINITY; n];
    reach[start as usize] = 0.0;
    for t in 0..=horizon {
        if reach[goal as usize].is_finite() && goal_free_from(t) {
            return Some((t, reach[goal as usize]));
        }
        let mut next = vec![f64::INFINITY; n];
        for v in 0..n as VertexId {
            let d = reach[v as usize];
            if !d.is_finite() {
                continue;
            }
            let mut options = vec![v];
            options.extend_from_slice(g.neighbors(v));
            for w in options {
                if occupied(w, t + 1) || (w != v && swap(v, w, t)) {
                    continue;
                }
                let nd = d + g.distance(v, w);
                if nd < next[w as usize] {
                    next[w as usize] = nd;
                }
            }
        }
        reach = next;
    }
    None
}

#[test]
fn single_agent_search_matches_time_expanded_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut solved, mut failed) = (0, 0);
    for case in 0..400 {
        let n = rng.gen_range(2..=8);
        let g = random_graph(n, rng.gen_range(0..5), &mut rng);
        let ends = distinct_vertices(&g, 2, &mut rng);
        let (start, goal) = if rng.gen_bool(0.1) { (ends[0], ends[0]) } else { (ends[0], ends[1]) };
        let (table, walks) = random_walks(&g, start, goal, &mut rng);
        let horizon = rng.gen_range(1..=12);
        let got = plan_single(&g, start, goal, &table, horizon as u32);
        let want = brute_force(&g, start, goal, &walks, horizon);
        match (got, want) {
            (Ok(p), Some((t, d))) => {
                assert_eq!(p.arrival() as usize, t, "case {case}");
                assert!((p.length(&g) - d).abs() < 1e-9, "case {case}: {} vs {d}", p.length(&g));
                for s in 0..p.vertices().len() {
                    let v = p.at(s as u32);
                    assert!(walks.iter().all(|w| w.at(s) != v), "case {case}: conflict at {s}");
                    if s + 1 < p.vertices().len() {
                        let w = p.at(s as u32 + 1);
                        assert!(v == w || g.has_edge(v, w));
                        assert!(walks.iter().all(|x| !(x.at(s) == w && x.at(s + 1) == v && v != w)), "case {case}: swap at {s}");
                    }
                }
                solved += 1;
            }
            (Err(reason), None) => {
                if reason == FailureReason::GoalBlocked {
                    assert!(walks.iter().any(|w| *w.0.last().unwrap() == goal));
                }
                failed += 1;
            }
            (got, want) => panic!("case {case}: search {got:?}, enumeration {want:?}"),
        }
    }
    assert!(solved > 100 && failed > 10, "{solved} solved, {failed} failed");
}

#[test]
fn dijkstra_matches_floyd_warshall() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..60 {
        let n = rng.gen_range(1..=30);
        // Random positions in the plane, random edges, possibly disconnected.
        let positions: Vec<Point<f64>> = (0..n).map(|i| Point::new(i as f64 * 0.37 + rng.gen_range(0.0..0.3), rng.gen_range(0.0..10.0))).collect();
        let mut edges = Vec::new();
        for u in 0..n as VertexId {
            for v in u + 1..n as VertexId {
                if rng.gen_bool(0.12) {
                    edges.push((u, v));
                }
            }
        }
        let g = RoadmapGraph::new(positions, edges).unwrap();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for u in 0..n {
            d[u][u] = 0.0;
            for &v in g.neighbors(u as VertexId) {
                d[u][v as usize] = g.distance(u as VertexId, v);
            }
        }
        for m in 0..n {
            for u in 0..n {
                for v in 0..n {
                    if d[u][m] + d[m][v] < d[u][v] {
                        d[u][v] = d[u][m] + d[m][v];
                    }
                }
            }
        }
        for s in 0..n {
            let field = shortest_distances(&g, s as VertexId);
            for t in 0..n {
                let (a, b) = (field.get(t as VertexId), d[s][t]);
                assert!(a == b || (a - b).abs() <= 1e-9, "{s}->{t}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn wait_is_always_admissible_for_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..300 {
        let g = random_graph(6, 3, &mut rng);
        let v = distinct_vertices(&g, 4, &mut rng);
        let u: Vec<Point<f64>> = (0..4).map(|_| g.position(rng.gen_range(0..6))).collect();
        let mut order: Vec<usize> = (0..4).collect();
        order.shuffle(&mut rng);
        let config = CompositeConfig::new(v).unwrap();
        let next = oracle_in_order(&config, &u, &g, &order).expect("waiting never collides");
        let moved: HashSet<_> = next.vertices().iter().collect();
        assert_eq!(moved.len(), 4);
    }
}
