//! Deliberately broken metrics and maps used as negative controls.

use rand::RngCore;

use crate::dynamics::{DynamicsError, MapSpec, SelfMap};
use crate::geometry::{ConvexBody, GeometryError, Location, Vector};
use crate::metrics::{MetricError, MetricInstance, MetricSpace};

/// Euclidean distance after the bend `(x1, x2, ...) -> (x1, x2 + k x1^2, ...)`.
/// Its balls are not convex, so condition (C) fails.
#[derive(Clone, Debug)]
pub struct WarpedEuclidean {
    pub body: ConvexBody,
    pub bend: f64,
}

impl WarpedEuclidean {
    fn warp(&self, x: &Vector) -> Vector {
        let mut y = x.clone();
        if y.len() > 1 {
            y[1] += self.bend * x[0] * x[0];
        }
        y
    }
}

impl MetricSpace for WarpedEuclidean {
    fn point_dim(&self) -> usize {
        self.body.dim()
    }

    fn distance(&self, x: &Vector, y: &Vector) -> Result<f64, MetricError> {
        Ok((self.warp(x) - self.warp(y)).norm())
    }

    fn locate(&self, x: &Vector) -> Result<Location, MetricError> {
        Ok(self.body.classify(x)?)
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Vector {
        self.body.sample_interior_with(rng)
    }
}

/// Another metric multiplied by a constant factor (zero gives the trivial
/// pseudo-metric).
#[derive(Clone, Debug)]
pub struct ScaledMetric {
    pub inner: MetricInstance,
    pub factor: f64,
}

impl MetricSpace for ScaledMetric {
    fn point_dim(&self) -> usize {
        self.inner.point_dim()
    }

    fn distance(&self, x: &Vector, y: &Vector) -> Result<f64, MetricError> {
        Ok(self.factor * self.inner.distance(x, y)?)
    }

    fn locate(&self, x: &Vector) -> Result<Location, MetricError> {
        self.inner.locate(x)
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Vector {
        self.inner.sample_point(rng)
    }

    fn chart(&self, x: &Vector) -> Vector {
        self.inner.chart(x)
    }

    fn from_chart(&self, p: &Vector) -> Vector {
        self.inner.from_chart(p)
    }

    fn combine(&self, x: &Vector, y: &Vector, s: f64) -> Vector {
        self.inner.combine(x, y, s)
    }
}

/// `|ln delta(x) - ln delta(y)|` with `delta` the smallest facet slack: a
/// pseudo-metric that only sees depth. Points approaching different facets at
/// the same rate stay at distance zero.
#[derive(Clone, Debug)]
pub struct DepthPseudoMetric {
    pub body: ConvexBody,
}

impl DepthPseudoMetric {
    fn log_depth(&self, x: &Vector) -> Result<f64, MetricError> {
        let slacks = self.body.slacks(x).ok_or(GeometryError::NotPolytope)?;
        let depth = slacks.min();
        if depth <= 0.0 {
            return Err(MetricError::NotInterior);
        }
        Ok(depth.ln())
    }
}

impl MetricSpace for DepthPseudoMetric {
    fn point_dim(&self) -> usize {
        self.body.dim()
    }

    fn distance(&self, x: &Vector, y: &Vector) -> Result<f64, MetricError> {
        Ok((self.log_depth(x)? - self.log_depth(y)?).abs())
    }

    fn locate(&self, x: &Vector) -> Result<Location, MetricError> {
        Ok(self.body.classify(x)?)
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Vector {
        self.body.sample_interior_with(rng)
    }
}

/// Applies `upper` where the chosen coordinate of the normalised point is at
/// least `threshold`, and `lower` elsewhere. Not nonexpansive: nearby points
/// on either side of the threshold separate.
#[derive(Clone, Debug)]
pub struct SplitMap {
    pub axis: usize,
    pub threshold: f64,
    /// Divide by the coordinate sum before comparing (cone coordinates).
    pub normalize: bool,
    pub upper: MapSpec,
    pub lower: MapSpec,
}

impl SelfMap for SplitMap {
    fn apply(&self, x: &Vector) -> Result<Vector, DynamicsError> {
        let v = if self.normalize { x[self.axis] / x.sum() } else { x[self.axis] };
        if v >= self.threshold {
            self.upper.apply(x)
        } else {
            self.lower.apply(x)
        }
    }
}

/// `x -> (x_i^p) / sum` on cone coordinates; expands the cone metric by the
/// factor `p`.
#[derive(Clone, Debug)]
pub struct PowerMap {
    pub exponent: f64,
}

impl SelfMap for PowerMap {
    fn apply(&self, x: &Vector) -> Result<Vector, DynamicsError> {
        let y = x.map(|v| v.powf(self.exponent));
        Ok(&y / y.sum())
    }
}

/// `x -> sign(x) sqrt(|x|)` coordinatewise on the cube. Pushes points toward
/// the boundary faster than any nonexpansive map can.
#[derive(Clone, Debug, Default)]
pub struct SqrtStretch;

impl SelfMap for SqrtStretch {
    fn apply(&self, x: &Vector) -> Result<Vector, DynamicsError> {
        Ok(x.map(|v| v.signum() * v.abs().sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vector;

    #[test]
    fn warped_metric_breaks_condition_c() {
        let m = WarpedEuclidean { body: ConvexBody::cube(2).unwrap(), bend: 2.0 };
        let z = vector(&[0.0, 0.9]);
        let x = vector(&[-0.5, -0.9]);
        let y = vector(&[0.5, -0.9]);
        let u = m.combine(&x, &y, 0.5);
        let bound = m.distance(&x, &z).unwrap().max(m.distance(&y, &z).unwrap());
        assert!(m.distance(&u, &z).unwrap() > bound + 0.3);
    }

    #[test]
    fn power_map_doubles_cone_distance() {
        let m = MetricInstance::hilbert_cone(1).unwrap();
        let f = PowerMap { exponent: 2.0 };
        let x = vector(&[0.2, 0.8]);
        let y = vector(&[0.6, 0.4]);
        let ratio = m.distance(&f.apply(&x).unwrap(), &f.apply(&y).unwrap()).unwrap() / m.distance(&x, &y).unwrap();
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn depth_metric_ignores_direction() {
        let m = DepthPseudoMetric { body: ConvexBody::cube(2).unwrap() };
        assert_eq!(m.distance(&vector(&[0.75, 0.0]), &vector(&[0.0, 0.75])).unwrap(), 0.0);
        let e = m.distance(&vector(&[0.0, 0.0]), &vector(&[0.5, 0.0])).unwrap();
        assert!((e - 2f64.ln()).abs() < 1e-15);
    }
}
