//! Scalar abstraction for positions and lengths.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type used for vertex coordinates, edge lengths and costs.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance used when deciding whether two points coincide.
    fn coincidence_eps() -> Self;

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn coincidence_eps() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn coincidence_eps() -> Self {
        1e-5
    }
}

/// A point in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> S {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub(crate) fn sub(&self, other: &Self) -> (S, S) {
        (self.x - other.x, self.y - other.y)
    }
}

/// Total order over scalars for heap keys. NaN never occurs for finite inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Ordered<S>(pub S);

impl<S: Scalar> Eq for Ordered<S> {}

impl<S: Scalar> PartialOrd for Ordered<S> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Scalar> Ord for Ordered<S> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.partial_cmp(&other.0).unwrap_or(std::cmp::Ordering::Equal)
    }
}
