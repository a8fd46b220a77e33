//! Multi-agent path finding on planar roadmaps.
//!
//! The crate provides a discrete multi-robot RRT planner ([`planner::solve`])
//! that grows a tree in the composite configuration space, a sequential
//! prioritized planner over a reservation table ([`carp`]) used both as a
//! baseline and as the planner's local connector, and generators for the two
//! benchmark map families.
//!
//! Geometry is generic over the [`Scalar`] type; the aliases below fix it to
//! `f64`, which the command-line tools use.

pub mod carp;
pub mod composite;
mod error;
pub mod planner;
pub mod roadmap;
pub mod sampling;
mod scalar;
pub mod validate;

pub use composite::{CompositeConfig, CompositeMove};
pub use error::{Error, Result};
pub use roadmap::{Assignment, Task, VertexId};
pub use scalar::{Point, Scalar};

pub type Roadmap = roadmap::RoadmapGraph<f64>;
pub type Roadmap32 = roadmap::RoadmapGraph<f32>;
pub type DistanceField = sampling::DistanceField<f64>;
pub type CorridorSet = sampling::CorridorSet<f64>;
pub type SearchTree = planner::SearchTree<f64>;
pub type SolveParams = planner::SolveParams<f64>;
