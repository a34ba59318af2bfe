use serde::{Deserialize, Serialize};

use super::maps::{SelfMap, SemigroupSpec};
use super::{DynamicsError, DynamicsParams};
use crate::geometry::{Location, Vector};
use crate::metrics::MetricSpace;

/// An orbit with its distance diagnostics.
///
/// `d_to_start[n] = d(x_n, x_0)` and `step_d[n] = d(x_n, x_{n+1})`. When the
/// orbit reaches the boundary the boundary point is kept in `boundary_hit`
/// and the trace stops there.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitTrace {
    pub points: Vec<Vector>,
    /// Step index for map orbits, time for semigroup orbits.
    pub times: Vec<f64>,
    pub d_to_start: Vec<f64>,
    pub step_d: Vec<f64>,
    pub boundary_hit: Option<Vector>,
}

impl OrbitTrace {
    pub fn truncated(&self) -> bool {
        self.boundary_hit.is_some()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest increase between consecutive `step_d` entries; at most zero
    /// for a nonincreasing sequence.
    pub fn max_step_increase(&self) -> f64 {
        self.step_d.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }
}

struct TraceBuilder<'a> {
    metric: &'a dyn MetricSpace,
    trace: OrbitTrace,
}

impl<'a> TraceBuilder<'a> {
    fn start(metric: &'a dyn MetricSpace, x0: &Vector, t0: f64) -> Result<Self, DynamicsError> {
        if metric.locate(x0)? != Location::Interior {
            return Err(DynamicsError::NotInterior);
        }
        Ok(Self {
            metric,
            trace: OrbitTrace {
                points: vec![x0.clone()],
                times: vec![t0],
                d_to_start: vec![0.0],
                step_d: Vec::new(),
                boundary_hit: None,
            },
        })
    }

    /// Appends a point; returns false once the orbit has reached the boundary.
    fn push(&mut self, x: Vector, t: f64, step: usize) -> Result<bool, DynamicsError> {
        match self.metric.locate(&x)? {
            Location::Exterior => Err(DynamicsError::DomainEscape { step }),
            Location::Boundary => {
                self.trace.boundary_hit = Some(x);
                Ok(false)
            }
            Location::Interior => {
                let last = self.trace.points.last().expect("nonempty");
                let step_d = self.metric.distance(last, &x)?;
                let d0 = self.metric.distance(&self.trace.points[0], &x)?;
                self.trace.step_d.push(step_d);
                self.trace.d_to_start.push(d0);
                self.trace.points.push(x);
                self.trace.times.push(t);
                Ok(true)
            }
        }
    }
}

/// `x0, f(x0), ..., f^n(x0)`, stopping early at the boundary.
pub fn iterate(
    metric: &dyn MetricSpace,
    map: &dyn SelfMap,
    x0: &Vector,
    n_steps: usize,
) -> Result<OrbitTrace, DynamicsError> {
    let mut b = TraceBuilder::start(metric, x0, 0.0)?;
    let mut x = x0.clone();
    for step in 1..=n_steps {
        x = map.apply(&x)?;
        if !b.push(x.clone(), step as f64, step)? {
            break;
        }
    }
    Ok(b.trace)
}

/// `f_t(x0)` for each `t` in `t_grid`, each computed directly from `x0`.
pub fn semigroup_orbit(
    metric: &dyn MetricSpace,
    sg: &SemigroupSpec,
    x0: &Vector,
    t_grid: &[f64],
) -> Result<OrbitTrace, DynamicsError> {
    let (first, rest) = t_grid.split_first().ok_or(DynamicsError::NoOrbits)?;
    let start = sg.apply_at(*first, x0)?;
    let mut b = TraceBuilder::start(metric, &start, *first)?;
    for (i, &t) in rest.iter().enumerate() {
        let x = sg.apply_at(t, x0)?;
        if !b.push(x, t, i + 1)? {
            break;
        }
    }
    Ok(b.trace)
}

/// Trace through precomputed images `(t, x)`, the first being the start.
pub(crate) fn trace_from_images(
    metric: &dyn MetricSpace,
    images: impl IntoIterator<Item = (f64, Vector)>,
) -> Result<OrbitTrace, DynamicsError> {
    let mut it = images.into_iter();
    let (t0, x0) = it.next().ok_or(DynamicsError::NoOrbits)?;
    let mut b = TraceBuilder::start(metric, &x0, t0)?;
    for (i, (t, x)) in it.enumerate() {
        if !b.push(x, t, i + 1)? {
            break;
        }
    }
    Ok(b.trace)
}

/// Trace used to decide boundedness: the dyadic subsequence
/// `x0, f(x0), f^2(x0), f^4(x0), ...` when the map supports fast powers,
/// the plain orbit otherwise. Both have `len` entries unless the boundary is
/// reached first.
pub fn probe_trace(
    metric: &dyn MetricSpace,
    map: &dyn SelfMap,
    x0: &Vector,
    len: usize,
) -> Result<OrbitTrace, DynamicsError> {
    let count = len.saturating_sub(1);
    match map.dyadic_images(x0, count) {
        Some(images) => {
            let mut b = TraceBuilder::start(metric, x0, 0.0)?;
            for (k, x) in images?.into_iter().enumerate() {
                if !b.push(x, 2f64.powi(k as i32), k + 1)? {
                    break;
                }
            }
            Ok(b.trace)
        }
        None => iterate(metric, map, x0, count),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundedness {
    Bounded,
    Unbounded,
    Undecided,
}

/// Orbit boundedness from the `d_to_start` sequence, by windows of
/// `params.window` counted from the end.
///
/// Bounded when the last window dips below `r_bound`: a bounded subsequence
/// bounds the whole orbit of a nonexpansive map. Unbounded when the last
/// window stays above `r_esc` and its minimum exceeds every earlier window's
/// minimum, or when the trace reached the boundary after leaving the
/// `r_bound` ball. Undecided otherwise.
pub fn classify_boundedness(trace: &OrbitTrace, params: &DynamicsParams) -> Result<Boundedness, DynamicsError> {
    let d = &trace.d_to_start;
    let w = params.window.max(1);
    if trace.truncated() {
        let last = d.last().copied().unwrap_or(0.0);
        return Ok(if last > params.r_bound { Boundedness::Unbounded } else { Boundedness::Undecided });
    }
    if d.len() < w {
        return Err(DynamicsError::TraceTooShort { len: d.len(), window: w });
    }
    let mut mins = Vec::new();
    let mut end = d.len();
    while end >= w {
        mins.push(d[end - w..end].iter().copied().fold(f64::INFINITY, f64::min));
        end -= w;
    }
    let last = mins[0];
    if last < params.r_bound {
        return Ok(Boundedness::Bounded);
    }
    let earlier = &mins[1..];
    if last > params.r_esc && !earlier.is_empty() && earlier.iter().all(|m| last > *m) {
        return Ok(Boundedness::Unbounded);
    }
    Ok(Boundedness::Undecided)
}

/// A norm-ball cluster of orbit points.
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    /// First member; membership is decided against it.
    pub anchor: Vector,
    /// Estimate of the accumulation point (latest member for a single orbit,
    /// weighted mean after merging).
    pub representative: Vector,
    pub multiplicity: usize,
    /// Indices of the seeds whose orbits contributed.
    pub sources: Vec<usize>,
}

/// Greedy clustering in chart norm: each point joins the first cluster whose
/// anchor is within `radius`, or starts a new one.
pub fn cluster_points(metric: &dyn MetricSpace, points: &[Vector], radius: f64, source: usize) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = Vec::new();
    for p in points {
        match clusters.iter_mut().find(|c| metric.norm_distance(&c.anchor, p) <= radius) {
            Some(c) => {
                c.representative = p.clone();
                c.multiplicity += 1;
            }
            None => clusters.push(Cluster {
                anchor: p.clone(),
                representative: p.clone(),
                multiplicity: 1,
                sources: vec![source],
            }),
        }
    }
    clusters
}

/// Clusters of the last `tail_fraction` of a trace (the boundary point, if
/// the trace reached one, counts as the final member).
pub fn omega_from_trace(
    metric: &dyn MetricSpace,
    trace: &OrbitTrace,
    tail_fraction: f64,
    radius: f64,
    source: usize,
) -> Vec<Cluster> {
    let mut pts: Vec<Vector> = trace.points.clone();
    if let Some(b) = &trace.boundary_hit {
        pts.push(b.clone());
    }
    let keep = ((pts.len() as f64 * tail_fraction).ceil() as usize).clamp(1, pts.len());
    cluster_points(metric, &pts[pts.len() - keep..], radius, source)
}

/// Omega-limit estimate of `x0`: clusters of the orbit tail.
pub fn omega_limit(
    metric: &dyn MetricSpace,
    map: &dyn SelfMap,
    x0: &Vector,
    params: &DynamicsParams,
) -> Result<Vec<Cluster>, DynamicsError> {
    let trace = iterate(metric, map, x0, params.n_steps)?;
    Ok(omega_from_trace(metric, &trace, params.tail_fraction, params.cluster_radius, 0))
}

fn lex_cmp(a: &Vector, b: &Vector) -> std::cmp::Ordering {
    a.iter().zip(b.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

/// Merges clusters from several orbits. Clusters are sorted by their chart
/// representative before the greedy pass, so the result does not depend on
/// input order.
pub fn merge_clusters(metric: &dyn MetricSpace, clusters: Vec<Cluster>, radius: f64) -> Vec<Cluster> {
    let mut items: Vec<(Vector, Cluster)> = clusters.into_iter().map(|c| (metric.chart(&c.representative), c)).collect();
    items.sort_by(|a, b| lex_cmp(&a.0, &b.0).then(a.1.sources.cmp(&b.1.sources)));
    struct Acc {
        anchor: Vector,
        weighted: Vector,
        weight: usize,
        sources: Vec<usize>,
    }
    let mut accs: Vec<Acc> = Vec::new();
    for (chart, c) in items {
        match accs.iter_mut().find(|a| (&a.anchor - &chart).norm() <= radius) {
            Some(a) => {
                a.weighted += &chart * c.multiplicity as f64;
                a.weight += c.multiplicity;
                a.sources.extend(c.sources);
            }
            None => accs.push(Acc {
                weighted: &chart * c.multiplicity as f64,
                anchor: chart,
                weight: c.multiplicity,
                sources: c.sources,
            }),
        }
    }
    accs.into_iter()
        .map(|mut a| {
            a.sources.sort_unstable();
            a.sources.dedup();
            let mean = a.weighted / a.weight as f64;
            Cluster {
                anchor: metric.from_chart(&a.anchor),
                representative: metric.from_chart(&mean),
                multiplicity: a.weight,
                sources: a.sources,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MapSpec;
    use crate::geometry::vector;
    use crate::metrics::MetricInstance;
    use nalgebra::DMatrix;

    fn cone1() -> MetricInstance {
        MetricInstance::hilbert_cone(1).unwrap()
    }

    fn jordan() -> MapSpec {
        MapSpec::projective_linear(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap()
    }

    fn perron() -> MapSpec {
        MapSpec::projective_linear(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap()
    }

    #[test]
    fn identity_trace_is_constant() {
        let m = cone1();
        let x = vector(&[0.3, 0.7]);
        let t = iterate(&m, &MapSpec::identity(), &x, 10).unwrap();
        assert_eq!(t.len(), 11);
        assert!(t.points.iter().all(|p| *p == x));
        assert!(t.d_to_start.iter().all(|d| *d == 0.0));
        assert_eq!(classify_boundedness(&probe_trace(&m, &MapSpec::identity(), &x, 192).unwrap(), &DynamicsParams::default()).unwrap(), Boundedness::Bounded);
    }

    #[test]
    fn jordan_orbit_goes_to_vertex() {
        let m = cone1();
        let t = iterate(&m, &jordan(), &vector(&[0.5, 0.5]), 1000).unwrap();
        // A^n (1/2, 1/2) is proportional to (n + 1, 1).
        let last = t.points.last().unwrap();
        assert!((last[1] - 1.0 / 1002.0).abs() < 1e-15);
        assert!(t.d_to_start.windows(2).all(|w| w[1] > w[0]));
        assert!((t.d_to_start[1000] - 1001f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn boundedness_examples() {
        let m = cone1();
        let p = DynamicsParams::default();
        let x = vector(&[0.3, 0.7]);
        let jt = probe_trace(&m, &jordan(), &x, p.probe_len).unwrap();
        assert_eq!(classify_boundedness(&jt, &p).unwrap(), Boundedness::Unbounded);
        let pt = probe_trace(&m, &perron(), &x, p.probe_len).unwrap();
        assert_eq!(classify_boundedness(&pt, &p).unwrap(), Boundedness::Bounded);
        // A plain 1000-step orbit only reaches d = ln 1000 and looks bounded.
        let plain = iterate(&m, &jordan(), &x, 1000).unwrap();
        assert_eq!(classify_boundedness(&plain, &p).unwrap(), Boundedness::Bounded);
        let short = iterate(&m, &jordan(), &x, 10).unwrap();
        assert!(matches!(classify_boundedness(&short, &p), Err(DynamicsError::TraceTooShort { .. })));
    }

    #[test]
    fn omega_examples() {
        let m = cone1();
        let p = DynamicsParams::default();
        let x = vector(&[0.5, 0.5]);
        let id = omega_limit(&m, &MapSpec::identity(), &x, &p).unwrap();
        assert_eq!(id.len(), 1);
        assert_eq!(id[0].representative, x);
        let j = omega_limit(&m, &jordan(), &x, &p).unwrap();
        assert_eq!(j.len(), 1);
        assert!(m.norm_distance(&j[0].representative, &vector(&[1.0, 0.0])) < 1e-3);
        let pr = omega_limit(&m, &perron(), &vector(&[0.1, 0.9]), &p).unwrap();
        assert_eq!(pr.len(), 1);
        assert!((pr[0].representative.clone() - vector(&[0.5, 0.5])).amax() < 1e-12);
    }

    #[test]
    fn merge_is_order_independent() {
        let m = cone1();
        let a = cluster_points(&m, &[vector(&[0.2, 0.8])], 1e-3, 0);
        let b = cluster_points(&m, &[vector(&[0.2004, 0.7996])], 1e-3, 1);
        let c = cluster_points(&m, &[vector(&[0.9, 0.1])], 1e-3, 2);
        let ab: Vec<Cluster> = a.iter().chain(&b).chain(&c).cloned().collect();
        let ba: Vec<Cluster> = c.iter().chain(&b).chain(&a).cloned().collect();
        let m1 = merge_clusters(&m, ab, 1e-3);
        let m2 = merge_clusters(&m, ba, 1e-3);
        assert_eq!(m1, m2);
        assert_eq!(m1.len(), 2);
        assert_eq!(m1[0].sources, vec![0, 1]);
    }

    #[test]
    fn escaping_map_is_reported() {
        let m = MetricInstance::hilbert(crate::geometry::ConvexBody::cube(1).unwrap());
        let push = MapSpec::affine(DMatrix::identity(1, 1) * 3.0, vector(&[0.0])).unwrap();
        let err = iterate(&m, &push, &vector(&[0.5]), 3).unwrap_err();
        assert_eq!(err, DynamicsError::DomainEscape { step: 1 });
    }
}
