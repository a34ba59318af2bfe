//! Hilbert, Poincaré-disc and polydisc distances behind one interface.
//!
//! The Hilbert metric has two independent implementations: the chord
//! cross-ratio on any [`ConvexBody`] and `log(M/m)` on the positive cone.
//! On the simplex they must agree through [`lift_simplex`].

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ConvexBody, GeometryError, Location, Vector};

/// Coordinates closer than this are treated as the same point.
pub const IDENTICAL_TOL: f64 = 1e-14;
/// Relative chord position below which a distance carries a precision
/// warning.
pub const PRECISION_WARN: f64 = 1e-13;
/// Normalised cone entries at or below this are on the boundary ray.
pub const CONE_BOUNDARY_TOL: f64 = f64::MIN_POSITIVE;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("point is not in the open domain")]
    NotInterior,
    #[error("cone vector has a nonpositive entry")]
    NonPositive,
    #[error("disc coordinate has modulus >= 1")]
    OutsideDisc,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("|x - y| = {gap} is not below the diameter {diam}")]
    InconsistentDiameter { gap: f64, diam: f64 },
    #[error("metric kind {0:?} needs a different domain")]
    WrongDomain(MetricKind),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    HilbertCrossRatio,
    HilbertCone,
    PoincareDisc,
    Polydisc,
}

/// A distance value together with the near-boundary flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceReading {
    pub value: f64,
    pub precision_warning: bool,
}

/// A metric space the samplers and dynamics can work with.
///
/// Points are stored in the metric's own coordinates; `chart` maps them to
/// the Euclidean coordinates used for norm-topology questions.
pub trait MetricSpace: Sync {
    fn point_dim(&self) -> usize;
    fn distance(&self, x: &Vector, y: &Vector) -> Result<f64, MetricError>;
    fn locate(&self, x: &Vector) -> Result<Location, MetricError>;
    fn sample_point(&self, rng: &mut dyn RngCore) -> Vector;

    fn chart(&self, x: &Vector) -> Vector {
        x.clone()
    }

    /// Inverse of `chart`.
    fn from_chart(&self, p: &Vector) -> Vector {
        p.clone()
    }

    fn norm_distance(&self, x: &Vector, y: &Vector) -> f64 {
        (self.chart(x) - self.chart(y)).norm()
    }

    /// The point `s x + (1 - s) y` of the underlying convex set.
    fn combine(&self, x: &Vector, y: &Vector, s: f64) -> Vector {
        x * s + y * (1.0 - s)
    }
}

/// A domain paired with a metric. `kappa` is the quasi-geodesic slack; it is
/// reported but never enters a computation.
#[derive(Clone, Debug)]
pub struct MetricInstance {
    kind: MetricKind,
    body: Option<ConvexBody>,
    polydisc_dim: usize,
    pub kappa: f64,
}

impl MetricInstance {
    pub fn hilbert(body: ConvexBody) -> Self {
        Self { kind: MetricKind::HilbertCrossRatio, body: Some(body), polydisc_dim: 0, kappa: 0.0 }
    }

    /// Hilbert metric on the open simplex of dimension `n`, with points given
    /// as positive `(n + 1)`-vectors (the cone over the simplex).
    pub fn hilbert_cone(n: usize) -> Result<Self, MetricError> {
        Ok(Self {
            kind: MetricKind::HilbertCone,
            body: Some(ConvexBody::simplex(n)?),
            polydisc_dim: 0,
            kappa: 0.0,
        })
    }

    pub fn poincare_disc() -> Self {
        Self { kind: MetricKind::PoincareDisc, body: None, polydisc_dim: 1, kappa: 0.0 }
    }

    pub fn polydisc(k: usize) -> Self {
        Self { kind: MetricKind::Polydisc, body: None, polydisc_dim: k.max(1), kappa: 0.0 }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    /// The convex body in chart coordinates (the simplex for cone instances).
    pub fn body(&self) -> Option<&ConvexBody> {
        self.body.as_ref()
    }

    fn body_or_err(&self) -> Result<&ConvexBody, MetricError> {
        self.body.as_ref().ok_or(MetricError::WrongDomain(self.kind))
    }

    /// Norm diameter of the domain in chart coordinates.
    pub fn diameter(&self) -> f64 {
        match self.kind {
            MetricKind::PoincareDisc => 2.0,
            MetricKind::Polydisc => 2.0 * (self.polydisc_dim as f64).sqrt(),
            _ => self.body.as_ref().expect("body-backed metric").diameter().value,
        }
    }

    /// Distance with the near-boundary flag.
    pub fn distance_checked(&self, x: &Vector, y: &Vector) -> Result<DistanceReading, MetricError> {
        match self.kind {
            MetricKind::HilbertCrossRatio => hilbert_cross_ratio_checked(self.body_or_err()?, x, y),
            MetricKind::HilbertCone => {
                self.check_len(x)?;
                self.check_len(y)?;
                let value = hilbert_cone(x, y)?;
                let warn = [x, y].iter().any(|v| v.min() / v.sum() < PRECISION_WARN);
                Ok(DistanceReading { value, precision_warning: warn })
            }
            MetricKind::PoincareDisc | MetricKind::Polydisc => {
                let value = polydisc_distance(&to_complex(x, self.polydisc_dim)?, &to_complex(y, self.polydisc_dim)?)?;
                Ok(DistanceReading { value, precision_warning: false })
            }
        }
    }

    fn check_len(&self, x: &Vector) -> Result<(), MetricError> {
        let expected = self.point_dim();
        if x.len() != expected {
            return Err(MetricError::DimensionMismatch { expected, got: x.len() });
        }
        Ok(())
    }

    /// Nearest boundary point in chart coordinates, snapping to faces within
    /// `snap_tol`, returned in metric coordinates.
    pub fn boundary_projection(&self, x: &Vector, snap_tol: f64) -> Result<Vector, MetricError> {
        let body = self.body_or_err()?;
        let p = body.nearest_boundary_point(&self.chart(x), snap_tol)?;
        let y = self.from_chart(&p);
        Ok(match self.kind {
            // The lifted last coordinate `1 - sum` can come out as -1e-17.
            MetricKind::HilbertCone => y.map(|v| v.max(0.0)),
            _ => y,
        })
    }
}

impl MetricSpace for MetricInstance {
    fn point_dim(&self) -> usize {
        match self.kind {
            MetricKind::HilbertCrossRatio => self.body.as_ref().map_or(0, ConvexBody::dim),
            MetricKind::HilbertCone => self.body.as_ref().map_or(0, |b| b.dim() + 1),
            MetricKind::PoincareDisc | MetricKind::Polydisc => 2 * self.polydisc_dim,
        }
    }

    fn distance(&self, x: &Vector, y: &Vector) -> Result<f64, MetricError> {
        self.distance_checked(x, y).map(|r| r.value)
    }

    fn locate(&self, x: &Vector) -> Result<Location, MetricError> {
        match self.kind {
            MetricKind::HilbertCrossRatio => Ok(self.body_or_err()?.classify(x)?),
            MetricKind::HilbertCone => {
                self.check_len(x)?;
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(GeometryError::NonFinite.into());
                }
                let sum = x.sum();
                if sum <= 0.0 {
                    return Ok(Location::Exterior);
                }
                let min = x.min() / sum;
                Ok(if min < 0.0 {
                    Location::Exterior
                } else if min <= CONE_BOUNDARY_TOL {
                    Location::Boundary
                } else {
                    Location::Interior
                })
            }
            MetricKind::PoincareDisc | MetricKind::Polydisc => {
                self.check_len(x)?;
                let max = (0..self.polydisc_dim)
                    .map(|j| Complex64::new(x[2 * j], x[2 * j + 1]).norm())
                    .fold(0.0, f64::max);
                Ok(if max < 1.0 {
                    Location::Interior
                } else if max == 1.0 {
                    Location::Boundary
                } else {
                    Location::Exterior
                })
            }
        }
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Vector {
        match self.kind {
            MetricKind::HilbertCrossRatio => self.body.as_ref().expect("body").sample_interior_with(rng),
            MetricKind::HilbertCone => lift_simplex(&self.body.as_ref().expect("body").sample_interior_with(rng)),
            MetricKind::PoincareDisc | MetricKind::Polydisc => {
                let mut out = DVector::zeros(2 * self.polydisc_dim);
                for j in 0..self.polydisc_dim {
                    let z = sample_disc(rng, 1.0);
                    out[2 * j] = z.re;
                    out[2 * j + 1] = z.im;
                }
                out
            }
        }
    }

    fn chart(&self, x: &Vector) -> Vector {
        match self.kind {
            MetricKind::HilbertCone => {
                let s = x.sum();
                x.rows(0, x.len() - 1) / s
            }
            _ => x.clone(),
        }
    }

    fn from_chart(&self, p: &Vector) -> Vector {
        match self.kind {
            MetricKind::HilbertCone => lift_simplex(p),
            _ => p.clone(),
        }
    }

    fn combine(&self, x: &Vector, y: &Vector, s: f64) -> Vector {
        match self.kind {
            MetricKind::HilbertCone => x / x.sum() * s + y / y.sum() * (1.0 - s),
            _ => x * s + y * (1.0 - s),
        }
    }
}

/// Uniform point of the open disc of radius `r` by rejection.
pub fn sample_disc(rng: &mut dyn RngCore, r: f64) -> Complex64 {
    loop {
        let re = rng.random::<f64>() * 2.0 - 1.0;
        let im = rng.random::<f64>() * 2.0 - 1.0;
        let z = Complex64::new(re, im);
        if z.norm() < 1.0 {
            return z * r;
        }
    }
}

fn to_complex(x: &Vector, k: usize) -> Result<Vec<Complex64>, MetricError> {
    if x.len() != 2 * k {
        return Err(MetricError::DimensionMismatch { expected: 2 * k, got: x.len() });
    }
    Ok((0..k).map(|j| Complex64::new(x[2 * j], x[2 * j + 1])).collect())
}

/// Maps a simplex point `(x_1..x_n)` to the positive vector
/// `(x_1..x_n, 1 - sum x_i)`.
pub fn lift_simplex(x: &Vector) -> Vector {
    let n = x.len();
    DVector::from_fn(n + 1, |i, _| if i < n { x[i] } else { 1.0 - x.sum() })
}

/// Hilbert distance from the boundary chord through `x` and `y`:
/// `log(|y - a| |x - b| / (|x - a| |y - b|))`.
pub fn hilbert_cross_ratio(body: &ConvexBody, x: &Vector, y: &Vector) -> Result<f64, MetricError> {
    hilbert_cross_ratio_checked(body, x, y).map(|r| r.value)
}

pub fn hilbert_cross_ratio_checked(body: &ConvexBody, x: &Vector, y: &Vector) -> Result<DistanceReading, MetricError> {
    if !body.contains_open(x)? || !body.contains_open(y)? {
        return Err(MetricError::NotInterior);
    }
    if (x - y).norm() <= IDENTICAL_TOL {
        return Ok(DistanceReading { value: 0.0, precision_warning: false });
    }
    let f = body.chord_factors(x, y)?;
    // With p = |x - a| / |x - y| and q = |y - b| / |x - y| the cross-ratio is
    // (1 + 1/p)(1 + 1/q). Summing in sorted order keeps d(x, y) == d(y, x).
    let (p, q) = if f.alpha <= f.beta { (f.alpha, f.beta) } else { (f.beta, f.alpha) };
    let excess = 1.0 / p + 1.0 / q + 1.0 / (p * q);
    let mut value = if excess < 1.0 {
        excess.ln_1p()
    } else {
        ((1.0 + 1.0 / p) * (1.0 + 1.0 / q)).ln()
    };
    if !value.is_finite() {
        value = (1.0 / p).ln_1p() + (1.0 / q).ln_1p();
    }
    let span = f.alpha + 1.0 + f.beta;
    let precision_warning = p / span < PRECISION_WARN;
    if precision_warning {
        log::debug!("Hilbert distance evaluated {:e} of a chord away from the boundary", p / span);
    }
    Ok(DistanceReading { value, precision_warning })
}

/// `log(M(x/y) / m(x/y))` on the open positive cone.
pub fn hilbert_cone(x: &Vector, y: &Vector) -> Result<f64, MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.iter().chain(y.iter()).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(MetricError::NonPositive);
    }
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for (a, b) in x.iter().zip(y.iter()) {
        let r = a / b;
        max = max.max(r);
        min = min.min(r);
    }
    let ratio = max / min;
    Ok(if ratio.is_finite() { ratio.ln() } else { max.ln() - min.ln() })
}

/// Poincaré distance on the unit disc, `artanh(|z - w| / |1 - conj(z) w|)`.
pub fn poincare_disc(z: Complex64, w: Complex64) -> Result<f64, MetricError> {
    if z.norm() >= 1.0 || w.norm() >= 1.0 {
        return Err(MetricError::OutsideDisc);
    }
    if z == w {
        return Ok(0.0);
    }
    let ratio = (z - w).norm() / (Complex64::new(1.0, 0.0) - z.conj() * w).norm();
    Ok(ratio.min(1.0).atanh())
}

/// Kobayashi distance on the polydisc: the largest coordinate Poincaré
/// distance.
pub fn polydisc_distance(z: &[Complex64], w: &[Complex64]) -> Result<f64, MetricError> {
    if z.len() != w.len() {
        return Err(MetricError::DimensionMismatch { expected: z.len(), got: w.len() });
    }
    z.iter().zip(w).try_fold(0.0f64, |acc, (a, b)| Ok(acc.max(poincare_disc(*a, *b)?)))
}

/// `artanh(|x - y| / diam)`, a lower bound for the Kobayashi distance of a
/// bounded convex domain with norm diameter `diam`.
pub fn kobayashi_lower_bound(diam: f64, x: &Vector, y: &Vector) -> Result<f64, MetricError> {
    let gap = (x - y).norm();
    if gap >= diam {
        return Err(MetricError::InconsistentDiameter { gap, diam });
    }
    Ok((gap / diam).atanh())
}

/// `2 log(1 + |x - y| / diam)`, a lower bound for the Hilbert distance when
/// `diam` is the true norm diameter.
pub fn hilbert_norm_lower_bound(diam: f64, x: &Vector, y: &Vector) -> f64 {
    2.0 * ((x - y).norm() / diam).ln_1p()
}
