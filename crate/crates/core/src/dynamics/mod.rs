//! Nonexpansive maps and semigroups, their orbits, omega-limit sets,
//! attractors and Denjoy–Wolff points.
//!
//! Maps act in the coordinates of the metric they are paired with. Maps on
//! the simplex use cone coordinates, so they pair with
//! [`MetricInstance::hilbert_cone`](crate::metrics::MetricInstance::hilbert_cone).

mod attractor;
mod expm;
mod maps;
mod orbit;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::metrics::MetricError;

pub use attractor::{
    attractor, denjoy_wolff, denjoy_wolff_semigroup, fixed_point_search, hausdorff_distance, semigroup_attractor,
    sample_seeds, verify_nonexpansive, AttractorEstimate, DenjoyWolff, FixedPoint, NonexpansiveReport, SemigroupAttractor,
};
pub use expm::{expm, expm_projective, DEFAULT_EXPM_TOL};
pub use maps::{MapDescriptor, MapKind, MapSpec, SelfMap, SemigroupSpec};
pub use orbit::{
    classify_boundedness, cluster_points, iterate, merge_clusters, omega_from_trace, omega_limit, probe_trace,
    semigroup_orbit, Boundedness, Cluster, OrbitTrace,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("orbit left the closed domain at step {step}")]
    DomainEscape { step: usize },
    #[error("starting point is not interior")]
    NotInterior,
    #[error("trace of length {len} is shorter than the window {window}")]
    TraceTooShort { len: usize, window: usize },
    #[error("omega estimate has {0} clusters; no single Denjoy–Wolff point at this resolution")]
    MultipleClusters(usize),
    #[error("orbits are bounded")]
    BoundedRegime,
    #[error("boundedness is undecided")]
    UndecidedRegime,
    #[error("no seeds given")]
    NoOrbits,
}

/// Iteration and classification parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsParams {
    pub n_steps: usize,
    pub window: usize,
    pub r_bound: f64,
    pub r_esc: f64,
    /// Length of the dyadic probe trace used for boundedness.
    pub probe_len: usize,
    pub cluster_radius: f64,
    pub tail_fraction: f64,
    pub tol_dw: f64,
    pub monotone_tol: f64,
    pub fixed_point_tol: f64,
    pub nonexpansive_tol: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        Self {
            n_steps: 10_000,
            window: 64,
            r_bound: 10.0,
            r_esc: 25.0,
            probe_len: 192,
            cluster_radius: 1e-3,
            tail_fraction: 0.25,
            tol_dw: 1e-3,
            monotone_tol: 1e-6,
            fixed_point_tol: 1e-10,
            nonexpansive_tol: 1e-9,
        }
    }
}
