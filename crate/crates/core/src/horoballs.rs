//! Small and big horoballs, estimated along a radial approach to the center.
//!
//! For a pole `z0`, a boundary center `xi` and a point `y`, the horofunction
//! terms are `g_k = d(y, w_k) - d(w_k, z0)` with `w_k = xi + lambda^k (z0 - xi)`.
//! The big horoball uses the liminf of `g_k`, the small one the limsup; both
//! are bracketed by the min and max over the last `tail` terms.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::geometry::{Location, Vector};
use crate::metrics::{MetricError, MetricInstance, MetricSpace};

/// Fraction of the norm diameter by which boundary points are moved toward
/// the pole before their horofunction is evaluated.
pub const DEFAULT_PULL_FACTOR: f64 = 1e-7;
/// Membership slack for the star-shape probes.
pub const DEFAULT_TOL_STAR: f64 = 1e-6;
/// Spread of the tail window above which an estimate is reported unstable.
pub const STABILITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HoroballError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("point is not interior")]
    NotInterior,
    #[error("pole must be interior and center on the boundary")]
    InvalidSpec,
    #[error("approach point {0} left the domain")]
    ApproachLeftDomain(usize),
    #[error("radius list must be strictly decreasing")]
    RadiiNotDecreasing,
    #[error("star-shape check applies to big horoballs only")]
    WrongKind,
    #[error("invalid approach policy: {0}")]
    InvalidPolicy(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoroballKind {
    Small,
    Big,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoroballSpec {
    pub pole: Vector,
    pub center: Vector,
    pub radius: f64,
    pub kind: HoroballKind,
}

impl HoroballSpec {
    pub fn new(
        metric: &dyn MetricSpace,
        pole: Vector,
        center: Vector,
        radius: f64,
        kind: HoroballKind,
    ) -> Result<Self, HoroballError> {
        if metric.locate(&pole)? != Location::Interior || metric.locate(&center)? != Location::Boundary {
            return Err(HoroballError::InvalidSpec);
        }
        Ok(Self { pole, center, radius, kind })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproachPolicy {
    pub lambda: f64,
    pub steps: usize,
    pub tail: usize,
}

impl Default for ApproachPolicy {
    fn default() -> Self {
        Self { lambda: 0.5, steps: 40, tail: 8 }
    }
}

impl ApproachPolicy {
    fn validate(&self) -> Result<(), HoroballError> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(HoroballError::InvalidPolicy(format!("lambda {} not in (0, 1)", self.lambda)));
        }
        if self.tail == 0 || self.tail > self.steps {
            return Err(HoroballError::InvalidPolicy("tail must be in 1..=steps".into()));
        }
        Ok(())
    }

    /// Approach point `w_k` for `k = 1..=steps`.
    pub fn approach_point(&self, metric: &dyn MetricSpace, pole: &Vector, center: &Vector, k: usize) -> Vector {
        metric.combine(pole, center, self.lambda.powi(k as i32))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorofunctionEstimate {
    pub lo: f64,
    pub hi: f64,
    /// Tail window spread exceeded [`STABILITY_TOL`].
    pub unstable: bool,
}

impl HorofunctionEstimate {
    pub fn is_member(&self, kind: HoroballKind, radius: f64) -> bool {
        match kind {
            HoroballKind::Big => self.lo <= radius,
            HoroballKind::Small => self.hi <= radius,
        }
    }
}

/// Tail-window bracket of `d(y, w_k) - d(w_k, z0)` along the radial approach.
pub fn horofunction_estimate(
    metric: &dyn MetricSpace,
    spec: &HoroballSpec,
    y: &Vector,
    policy: &ApproachPolicy,
) -> Result<HorofunctionEstimate, HoroballError> {
    if metric.locate(y)? != Location::Interior {
        return Err(HoroballError::NotInterior);
    }
    horofunction_unchecked(metric, &spec.pole, &spec.center, y, policy)
}

/// Same as [`horofunction_estimate`] for points of the open domain that may
/// sit closer to the boundary than the classification tolerance.
fn horofunction_unchecked(
    metric: &dyn MetricSpace,
    pole: &Vector,
    center: &Vector,
    y: &Vector,
    policy: &ApproachPolicy,
) -> Result<HorofunctionEstimate, HoroballError> {
    policy.validate()?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in (policy.steps + 1 - policy.tail)..=policy.steps {
        let w = policy.approach_point(metric, pole, center, k);
        let g = match (metric.distance(y, &w), metric.distance(&w, pole)) {
            (Ok(a), Ok(b)) => a - b,
            (Err(MetricError::NotInterior), _) | (_, Err(MetricError::NotInterior)) => {
                return Err(HoroballError::ApproachLeftDomain(k))
            }
            (Err(e), _) | (_, Err(e)) => return Err(e.into()),
        };
        lo = lo.min(g);
        hi = hi.max(g);
    }
    Ok(HorofunctionEstimate { lo, hi, unstable: hi - lo > STABILITY_TOL })
}

/// Moves `p` toward the pole by `dist` in chart norm.
fn pull_toward(metric: &dyn MetricSpace, pole: &Vector, p: &Vector, dist: f64) -> Vector {
    let gap = metric.norm_distance(pole, p);
    if gap <= dist {
        return pole.clone();
    }
    metric.combine(pole, p, dist / gap)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarViolation {
    pub eta: Vec<f64>,
    pub s: f64,
    /// `lo - r`; positive means the probe fell outside the horoball.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarShapeReport {
    pub n_eta: usize,
    pub n_probes: usize,
    pub violations: Vec<StarViolation>,
    /// Largest `lo - r` over all probes.
    pub worst_margin: f64,
    /// No sampled point was a member at this radius.
    pub no_members: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarShapeParams {
    pub pull_factor: f64,
    pub tol_star: f64,
    pub max_tries_per_member: usize,
}

impl Default for StarShapeParams {
    fn default() -> Self {
        Self { pull_factor: DEFAULT_PULL_FACTOR, tol_star: DEFAULT_TOL_STAR, max_tries_per_member: 200 }
    }
}

/// Samples members `eta` of the big horoball and checks that the points
/// `s eta + (1 - s) xi`, `s = j / (n_s + 1)`, pulled slightly toward the pole,
/// are members up to `tol_star`.
pub fn star_shape_check(
    metric: &MetricInstance,
    spec: &HoroballSpec,
    n_eta: usize,
    n_s: usize,
    seed: u64,
    policy: &ApproachPolicy,
    params: &StarShapeParams,
) -> Result<StarShapeReport, HoroballError> {
    if spec.kind != HoroballKind::Big {
        return Err(HoroballError::WrongKind);
    }
    policy.validate()?;
    let pull = params.pull_factor * metric.diameter();
    let per_task = exec::map_tasks(n_eta, |task| -> Result<Option<Vec<(f64, Vec<f64>, f64)>>, HoroballError> {
        let mut rng = exec::task_rng(seed, task as u64);
        let Some(eta) = sample_member(metric, spec, policy, &mut rng, params.max_tries_per_member)? else {
            return Ok(None);
        };
        let eta_chart: Vec<f64> = metric.chart(&eta).iter().copied().collect();
        let mut out = Vec::with_capacity(n_s);
        for j in 1..=n_s {
            let s = j as f64 / (n_s + 1) as f64;
            let p = metric.combine(&eta, &spec.center, s);
            let p = pull_toward(metric, &spec.pole, &p, pull);
            let est = horofunction_unchecked(metric, &spec.pole, &spec.center, &p, policy)?;
            out.push((s, eta_chart.clone(), est.lo - spec.radius));
        }
        Ok(Some(out))
    });
    let mut n_found = 0;
    let mut violations = Vec::new();
    let mut worst_margin = f64::NEG_INFINITY;
    let mut n_probes = 0;
    for task in per_task {
        let Some(probes) = task? else { continue };
        n_found += 1;
        for (s, eta, margin) in probes {
            n_probes += 1;
            worst_margin = worst_margin.max(margin);
            if margin > params.tol_star {
                violations.push(StarViolation { eta, s, margin });
            }
        }
    }
    violations.sort_by(|a, b| b.margin.total_cmp(&a.margin).then(a.s.total_cmp(&b.s)));
    Ok(StarShapeReport { n_eta: n_found, n_probes, violations, worst_margin, no_members: n_found == 0 })
}

fn sample_member(
    metric: &MetricInstance,
    spec: &HoroballSpec,
    policy: &ApproachPolicy,
    rng: &mut dyn RngCore,
    tries: usize,
) -> Result<Option<Vector>, HoroballError> {
    for _ in 0..tries {
        let y = metric.sample_point(rng);
        let est = horofunction_unchecked(metric, &spec.pole, &spec.center, &y, policy)?;
        if est.lo <= spec.radius {
            return Ok(Some(y));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkReport {
    pub radii: Vec<f64>,
    /// Norm diameter of the member set (with the center) for each radius.
    pub diameters: Vec<f64>,
    pub member_counts: Vec<usize>,
    /// Grid spacing in chart coordinates.
    pub resolution: f64,
    pub n_points: usize,
    /// Grid points (chart coordinates, before pulling) that are members for
    /// the last radius.
    pub final_members: Vec<Vector>,
}

impl ShrinkReport {
    /// Diameters are nonincreasing up to `slack` and the last one is below
    /// `final_max`.
    pub fn shrinks(&self, slack: f64, final_max: f64) -> bool {
        self.diameters.windows(2).all(|w| w[1] <= w[0] + slack)
            && self.diameters.last().is_some_and(|d| *d < final_max)
    }
}

/// Estimates the norm diameter of the big-horoball trace for each radius in
/// `radii` (strictly decreasing).
///
/// In dimension one the trace is taken over an interior grid with `grid`
/// cells. Otherwise it is the boundary grid of the chart body, each point
/// pulled toward the pole by `pull_factor * diam`.
pub fn intersection_shrink_check(
    metric: &MetricInstance,
    pole: &Vector,
    center: &Vector,
    radii: &[f64],
    grid: usize,
    policy: &ApproachPolicy,
    pull_factor: f64,
) -> Result<ShrinkReport, HoroballError> {
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(HoroballError::RadiiNotDecreasing);
    }
    HoroballSpec::new(metric, pole.clone(), center.clone(), 0.0, HoroballKind::Big)?;
    let body = metric.body().ok_or(MetricError::WrongDomain(metric.kind()))?;
    let (lo_box, hi_box) = body.bounding_box();
    let resolution = (hi_box - lo_box).amax() / grid.max(1) as f64;
    let pull = pull_factor * metric.diameter();
    let grid_points = if body.dim() == 1 { body.interior_grid(grid) } else { body.boundary_grid(grid + 1) };
    let points: Vec<Vector> = if body.dim() == 1 {
        grid_points.iter().map(|p| metric.from_chart(p)).collect()
    } else {
        grid_points.iter().map(|p| pull_toward(metric, pole, &metric.from_chart(p), pull)).collect()
    };
    let values = exec::map_slice(&points, |p| horofunction_unchecked(metric, pole, center, p, policy).map(|e| e.lo));
    let values: Vec<f64> = values.into_iter().collect::<Result<_, _>>()?;
    let center_chart = metric.chart(center);
    let charts: Vec<Vector> = points.iter().map(|p| metric.chart(p)).collect();
    let mut diameters = Vec::with_capacity(radii.len());
    let mut member_counts = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut members: Vec<&Vector> = charts.iter().zip(&values).filter(|(_, v)| **v <= r).map(|(p, _)| p).collect();
        member_counts.push(members.len());
        members.push(&center_chart);
        let mut diam = 0.0f64;
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                diam = diam.max((members[i] - members[j]).norm());
            }
        }
        diameters.push(diam);
    }
    let last = radii.last().copied().unwrap_or(f64::INFINITY);
    let final_members = grid_points.into_iter().zip(&values).filter(|(_, v)| **v <= last).map(|(p, _)| p).collect();
    Ok(ShrinkReport {
        radii: radii.to_vec(),
        diameters,
        member_counts,
        resolution,
        n_points: points.len(),
        final_members,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub point: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
    pub member: bool,
}

/// Horofunction brackets and membership over an interior grid of the chart
/// body, for plotting.
pub fn horoball_grid(
    metric: &MetricInstance,
    spec: &HoroballSpec,
    per_axis: usize,
    policy: &ApproachPolicy,
) -> Result<Vec<GridRow>, HoroballError> {
    let body = metric.body().ok_or(MetricError::WrongDomain(metric.kind()))?;
    let points = body.interior_grid(per_axis);
    let rows = exec::map_slice(&points, |p| {
        let y = metric.from_chart(p);
        horofunction_estimate(metric, spec, &y, policy).map(|e| GridRow {
            point: p.iter().copied().collect(),
            lo: e.lo,
            hi: e.hi,
            member: e.is_member(spec.kind, spec.radius),
        })
    });
    rows.into_iter().collect()
}
