//! Executable form of the movement rules, independent of the planners.

use std::collections::HashMap;
use std::fmt;

use crate::carp::TimedPath;
use crate::composite::CompositeConfig;
use crate::roadmap::{Assignment, RoadmapGraph, VertexId};
use crate::scalar::Scalar;

/// First rule broken by a joint plan. `step` is the timestep at which the
/// offending configuration is reached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyPlan,
    AgentCount { step: usize, expected: usize, found: usize },
    UnknownVertex { step: usize, agent: usize, vertex: VertexId },
    WrongStart { agent: usize, expected: VertexId, found: VertexId },
    WrongGoal { agent: usize, expected: VertexId, found: VertexId },
    VertexConflict { step: usize, agents: (usize, usize), vertex: VertexId },
    NotAdjacent { step: usize, agent: usize, from: VertexId, to: VertexId },
    Swap { step: usize, agents: (usize, usize), vertices: (VertexId, VertexId) },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyPlan => write!(f, "empty plan"),
            Violation::AgentCount { step, expected, found } => {
                write!(f, "step {step}: {found} agents, expected {expected}")
            }
            Violation::UnknownVertex { step, agent, vertex } => {
                write!(f, "step {step}: agent {agent} on unknown vertex {vertex}")
            }
            Violation::WrongStart { agent, expected, found } => {
                write!(f, "agent {agent} starts at {found}, expected {expected}")
            }
            Violation::WrongGoal { agent, expected, found } => {
                write!(f, "agent {agent} ends at {found}, expected {expected}")
            }
            Violation::VertexConflict { step, agents, vertex } => {
                write!(f, "step {step}: agents {} and {} share vertex {vertex}", agents.0, agents.1)
            }
            Violation::NotAdjacent { step, agent, from, to } => {
                write!(f, "step {step}: agent {agent} jumps {from} -> {to}")
            }
            Violation::Swap { step, agents, vertices } => write!(
                f,
                "step {step}: agents {} and {} swap {} <-> {}",
                agents.0, agents.1, vertices.0, vertices.1
            ),
        }
    }
}

impl std::error::Error for Violation {}

impl AsRef<[VertexId]> for CompositeConfig {
    fn as_ref(&self) -> &[VertexId] {
        self.vertices()
    }
}

/// Checks endpoints, per-step moves and pairwise distinctness of a joint
/// plan given as one vertex row per timestep.
pub fn validate_plan<S: Scalar, P: AsRef<[VertexId]>>(
    plan: &[P],
    g: &RoadmapGraph<S>,
    a: &Assignment,
) -> Result<(), Violation> {
    let k = a.num_agents();
    let (Some(first), Some(last)) = (plan.first(), plan.last()) else {
        return Err(Violation::EmptyPlan);
    };
    for (step, row) in plan.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != k {
            return Err(Violation::AgentCount {
                step,
                expected: k,
                found: row.len(),
            });
        }
        if let Some((agent, &vertex)) = row.iter().enumerate().find(|(_, &v)| !g.contains(v)) {
            return Err(Violation::UnknownVertex { step, agent, vertex });
        }
    }
    for (agent, (task, &found)) in a.tasks.iter().zip(first.as_ref()).enumerate() {
        if task.start != found {
            return Err(Violation::WrongStart {
                agent,
                expected: task.start,
                found,
            });
        }
    }
    for (agent, (task, &found)) in a.tasks.iter().zip(last.as_ref()).enumerate() {
        if task.goal != found {
            return Err(Violation::WrongGoal {
                agent,
                expected: task.goal,
                found,
            });
        }
    }
    let mut occupant: HashMap<VertexId, usize> = HashMap::with_capacity(k);
    let mut previous: HashMap<VertexId, usize> = HashMap::with_capacity(k);
    for (step, row) in plan.iter().enumerate() {
        let row = row.as_ref();
        occupant.clear();
        for (agent, &v) in row.iter().enumerate() {
            if let Some(other) = occupant.insert(v, agent) {
                return Err(Violation::VertexConflict {
                    step,
                    agents: (other, agent),
                    vertex: v,
                });
            }
        }
        if step > 0 {
            let prev = plan[step - 1].as_ref();
            for (agent, (&from, &to)) in prev.iter().zip(row).enumerate() {
                if from != to && !g.has_edge(from, to) {
                    return Err(Violation::NotAdjacent { step, agent, from, to });
                }
            }
            for (agent, (&from, &to)) in prev.iter().zip(row).enumerate() {
                if from == to {
                    continue;
                }
                if let Some(&other) = previous.get(&to) {
                    if other > agent && row[other] == from {
                        return Err(Violation::Swap {
                            step,
                            agents: (agent, other),
                            vertices: (from, to),
                        });
                    }
                }
            }
        }
        std::mem::swap(&mut occupant, &mut previous);
    }
    Ok(())
}

/// Validates per-agent timed paths after aligning them on a common clock
/// (agents hold their last vertex).
pub fn validate_paths<S: Scalar>(paths: &[TimedPath], g: &RoadmapGraph<S>, a: &Assignment) -> Result<(), Violation> {
    if paths.len() != a.num_agents() {
        return Err(Violation::AgentCount {
            step: 0,
            expected: a.num_agents(),
            found: paths.len(),
        });
    }
    let makespan = paths.iter().map(TimedPath::arrival).max().unwrap_or(0);
    let rows: Vec<Vec<VertexId>> = (0..=makespan).map(|t| paths.iter().map(|p| p.at(t)).collect()).collect();
    validate_plan(&rows, g, a)
}
