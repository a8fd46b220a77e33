use crate::config::{Algorithm, ExperimentSpec, Suite};
use crate::error::{BenchError, Result};
use crate::record::RunRecord;
use crate::seed::{cell_seed, mix};
use drrt_core::carp::{default_horizon, plan_with_retries};
use drrt_core::planner::{solve, SolveError, SolveParams};
use drrt_core::roadmap::{generate_carp_hard, random_assignment, MapSetDescriptor};
use drrt_core::validate::validate_plan;
use drrt_core::{Assignment, CompositeConfig, Roadmap};
use rayon::prelude::*;
use std::sync::Arc;
use std::time::Instant;

const TAG_MAPS: u64 = 1;
const TAG_TASKS: u64 = 2;
const TAG_HARD: u64 = 3;

/// One generated map/assignment pair.
#[derive(Clone, Debug)]
pub struct Instance {
    pub instance: usize,
    pub map: usize,
    pub graph: Arc<Roadmap>,
    pub assignment: Arc<Assignment>,
}

/// Result of running one algorithm on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub plan: Option<Vec<CompositeConfig>>,
    pub iterations: usize,
    pub time_s: f64,
    pub reason: Option<String>,
}

/// Runs `algorithm` with the planner settings of `spec`. Successful plans are
/// replayed through the validity checker; a violation turns the run into a
/// failure.
pub fn run_algorithm(algorithm: Algorithm, g: &Roadmap, a: &Assignment, spec: &ExperimentSpec, seed: u64) -> Outcome {
    let clock = Instant::now();
    let (plan, iterations, reason) = match algorithm {
        Algorithm::Drrt => {
            let params = SolveParams {
                delta: spec.delta,
                nn_count: spec.nn_count,
                max_iters: spec.max_iters,
                time_limit: if spec.deterministic { None } else { spec.time_limit },
                horizon: spec.horizon,
                connector_attempts: spec.connector_attempts,
                seed,
            };
            match solve(g, a, &params) {
                Ok(r) => (Some(r.path), r.iterations, None),
                Err(e @ SolveError::Exhausted { iterations, .. }) => (None, iterations, Some(e.to_string())),
                Err(e) => (None, 0, Some(e.to_string())),
            }
        }
        Algorithm::Carp { attempts } => {
            let horizon = spec.horizon.unwrap_or_else(|| default_horizon(g, a.num_agents()));
            match plan_with_retries(g, a, attempts, horizon, seed) {
                Ok(p) => (Some(p.configs()), p.attempt + 1, None),
                Err(e) => (None, e.attempts.len(), Some(e.to_string())),
            }
        }
    };
    let (plan, reason) = match plan {
        Some(p) => match validate_plan(&p, g, a) {
            Ok(()) => (Some(p), None),
            Err(v) => (None, Some(format!("invalid plan: {v}"))),
        },
        None => (None, reason),
    };
    let time_s = if spec.deterministic { 0.0 } else { clock.elapsed().as_secs_f64() };
    Outcome {
        plan,
        iterations,
        time_s,
        reason,
    }
}

/// Maps and assignments of the suite, in canonical order.
pub fn instances(spec: &ExperimentSpec) -> Result<Vec<Instance>> {
    spec.validate()?;
    let mut out = Vec::new();
    match spec.suite {
        Suite::DensifiedGrid => {
            let maps = MapSetDescriptor {
                width: spec.width,
                height: spec.height,
                density_steps: spec.density_steps,
                seed: mix(&[spec.seed, TAG_MAPS]),
            }
            .build::<f64>()?;
            let maps: Vec<Arc<Roadmap>> = maps.into_iter().map(Arc::new).collect();
            let k = spec.agents[0];
            for instance in 0..spec.instances {
                // One assignment per instance, shared by every map.
                let a = Arc::new(random_assignment(&maps[0], k, mix(&[spec.seed, TAG_TASKS, instance as u64]))?);
                for map in spec.map_indices() {
                    out.push(Instance {
                        instance,
                        map,
                        graph: Arc::clone(&maps[map]),
                        assignment: Arc::clone(&a),
                    });
                }
            }
        }
        Suite::CarpHard => {
            for &k in &spec.agents {
                for instance in 0..spec.instances {
                    let (g, a) = generate_carp_hard(k, mix(&[spec.seed, TAG_HARD, k as u64, instance as u64]))?;
                    out.push(Instance {
                        instance,
                        map: k,
                        graph: Arc::new(g),
                        assignment: Arc::new(a),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Runs every (instance, algorithm) cell on the current rayon pool. Output
/// order is canonical regardless of scheduling.
pub fn run_suite(spec: &ExperimentSpec) -> Result<Vec<RunRecord>> {
    let cells: Vec<(Instance, Algorithm)> = instances(spec)?
        .into_iter()
        .flat_map(|inst| spec.algorithms.iter().map(move |&alg| (inst.clone(), alg)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|(inst, alg)| {
            let seed = cell_seed(spec.seed, inst.map, inst.instance, &alg.to_string());
            let o = run_algorithm(*alg, &inst.graph, &inst.assignment, spec, seed);
            RunRecord {
                instance: inst.instance,
                map: inst.map,
                algorithm: *alg,
                success: o.plan.is_some(),
                steps: o.plan.as_ref().map(|p| p.len() - 1),
                iterations: o.iterations,
                time_s: o.time_s,
                seed,
                reason: o.reason,
            }
        })
        .collect())
}

/// [`run_suite`] on a dedicated pool of `threads` workers.
pub fn run_suite_with_threads(spec: &ExperimentSpec, threads: usize) -> Result<Vec<RunRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::InvalidSpec(format!("thread pool: {e}")))?;
    pool.install(|| run_suite(spec))
}
