//! Bounded convex domains in R^n.
//!
//! A [`ConvexBody`] is either an H-polytope (`Ax < b`, rows stored with unit
//! norm so slacks are Euclidean distances to facet hyperplanes) or a quadric
//! (ellipsoid or ball). Every body is validated at construction: the interior
//! must be nonempty and bounded.

mod body;
mod faces;
mod lp;

pub use body::{
    BodyDescriptor, Chord, ChordFactors, ConvexBody, Diameter, Location, Shape,
    DEFAULT_BOUNDARY_TOL, DEFAULT_FACE_TOL,
};
pub use faces::{FaceSet, DEFAULT_CH_SAMPLES};

use nalgebra::DVector;
use thiserror::Error;

/// A point of R^n.
pub type Vector = DVector<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("body has empty interior")]
    EmptyInterior,
    #[error("body is unbounded")]
    Unbounded,
    #[error("points coincide (|x - y| <= {0:e})")]
    CoincidentPoints(f64),
    #[error("point is not interior")]
    NotInterior,
    #[error("point is not on the boundary")]
    NotOnBoundary,
    #[error("operation requires a polytope")]
    NotPolytope,
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

/// Builds a vector from a slice.
pub fn vector(coords: &[f64]) -> Vector {
    DVector::from_column_slice(coords)
}

pub(crate) fn check_finite(x: &Vector) -> Result<(), GeometryError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(GeometryError::NonFinite)
    }
}
