use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::maps::{projective_apply, SelfMap, SemigroupSpec};
use super::orbit::{
    classify_boundedness, iterate, merge_clusters, omega_from_trace, probe_trace, trace_from_images, Boundedness,
    Cluster, OrbitTrace,
};
use super::{DynamicsError, DynamicsParams};
use crate::exec::{map_chunks, map_slice, map_tasks, task_rng};
use crate::geometry::{Location, Vector};
use crate::metrics::{MetricInstance, MetricSpace};

/// Omega-limit clusters over a set of seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct AttractorEstimate {
    /// Merged clusters. In the unbounded regime each representative has been
    /// moved to the nearest boundary point.
    pub omega_points: Vec<Cluster>,
    /// The single boundary cluster, when there is exactly one.
    pub dw_point: Option<Vector>,
    pub boundedness: Boundedness,
    pub per_seed: Vec<Boundedness>,
    /// Set when every seed was undecided.
    pub low_confidence: bool,
}

impl AttractorEstimate {
    pub fn representatives(&self) -> Vec<Vector> {
        self.omega_points.iter().map(|c| c.representative.clone()).collect()
    }
}

fn overall(per_seed: &[Boundedness]) -> Boundedness {
    match per_seed.first() {
        Some(&b) if per_seed.iter().all(|&x| x == b) => b,
        _ => Boundedness::Undecided,
    }
}

fn finish(
    metric: &MetricInstance,
    traces: Vec<(Boundedness, OrbitTrace)>,
    params: &DynamicsParams,
) -> Result<AttractorEstimate, DynamicsError> {
    if traces.is_empty() {
        return Err(DynamicsError::NoOrbits);
    }
    let per_seed: Vec<Boundedness> = traces.iter().map(|(b, _)| *b).collect();
    let clusters: Vec<Cluster> = traces
        .iter()
        .enumerate()
        .flat_map(|(i, (_, t))| omega_from_trace(metric, t, params.tail_fraction, params.cluster_radius, i))
        .collect();
    let mut omega_points = merge_clusters(metric, clusters, params.cluster_radius);
    let boundedness = overall(&per_seed);
    let mut dw_point = None;
    if boundedness == Boundedness::Unbounded {
        for c in &mut omega_points {
            c.representative = metric.boundary_projection(&c.representative, params.cluster_radius)?;
        }
        // Clusters that meet after projection are one point.
        omega_points = merge_clusters(metric, omega_points, params.cluster_radius);
        for c in &mut omega_points {
            c.representative = metric.boundary_projection(&c.representative, params.cluster_radius)?;
        }
        if let [single] = omega_points.as_slice() {
            dw_point = Some(single.representative.clone());
        }
    }
    let low_confidence = per_seed.iter().all(|&b| b == Boundedness::Undecided);
    Ok(AttractorEstimate { omega_points, dw_point, boundedness, per_seed, low_confidence })
}

/// Attractor estimate of a map from the given seeds.
pub fn attractor(
    metric: &MetricInstance,
    map: &dyn SelfMap,
    seeds: &[Vector],
    params: &DynamicsParams,
) -> Result<AttractorEstimate, DynamicsError> {
    let traces = map_slice(seeds, |x0| -> Result<_, DynamicsError> {
        let probe = probe_trace(metric, map, x0, params.probe_len)?;
        let b = classify_boundedness(&probe, params)?;
        Ok((b, iterate(metric, map, x0, params.n_steps)?))
    });
    finish(metric, traces.into_iter().collect::<Result<_, _>>()?, params)
}

/// Precomputed `exp(t A)` for every grid time, up to scale.
fn time_matrices(sg: &SemigroupSpec, times: &[f64]) -> Vec<DMatrix<f64>> {
    map_slice(times, |&t| sg.time_matrix(t))
}

fn flow_traces(
    metric: &MetricInstance,
    sg: &SemigroupSpec,
    seeds: &[Vector],
    times: &[f64],
    probe_step: f64,
    params: &DynamicsParams,
) -> Result<Vec<(Boundedness, OrbitTrace)>, DynamicsError> {
    let mats = time_matrices(sg, times);
    let probe_map = sg.time_map(probe_step)?;
    let out = map_slice(seeds, |x0| -> Result<_, DynamicsError> {
        let probe = probe_trace(metric, &probe_map, x0, params.probe_len)?;
        let b = classify_boundedness(&probe, params)?;
        let images = times.iter().zip(&mats).map(|(&t, m)| {
            let x = if t == 0.0 { Ok(x0.clone()) } else { projective_apply(m, x0) };
            x.map(|x| (t, x))
        });
        let images: Vec<(f64, Vector)> = images.collect::<Result<_, _>>()?;
        Ok((b, trace_from_images(metric, images)?))
    });
    out.into_iter().collect()
}

/// Both attractor estimates of a semigroup and their Hausdorff distance.
#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupAttractor {
    /// From iterating `f_{t0}`.
    pub skeleton: AttractorEstimate,
    /// From times `k * t0 * (sqrt(5) - 1) / 2` over the same horizon.
    pub dense: AttractorEstimate,
    pub hausdorff: f64,
}

/// Attractor of the semigroup through the `t0` skeleton and through a
/// dense-time path that never lands on multiples of `t0`.
pub fn semigroup_attractor(
    metric: &MetricInstance,
    sg: &SemigroupSpec,
    t0: f64,
    seeds: &[Vector],
    params: &DynamicsParams,
) -> Result<SemigroupAttractor, DynamicsError> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(DynamicsError::InvalidMap(format!("t0 = {t0} must be positive")));
    }
    let skeleton = attractor(metric, &sg.time_map(t0)?, seeds, params)?;
    let h = t0 * (5f64.sqrt() - 1.0) / 2.0;
    let horizon = t0 * params.n_steps as f64;
    let n_dense = (horizon / h).floor() as usize;
    let times: Vec<f64> = (0..=n_dense).map(|k| k as f64 * h).collect();
    let dense = finish(metric, flow_traces(metric, sg, seeds, &times, t0, params)?, params)?;
    let hausdorff = hausdorff_distance(metric, &skeleton.representatives(), &dense.representatives());
    Ok(SemigroupAttractor { skeleton, dense, hausdorff })
}

/// Hausdorff distance between two finite point sets in chart norm; infinite
/// when exactly one is empty.
pub fn hausdorff_distance(metric: &dyn MetricSpace, a: &[Vector], b: &[Vector]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_way = |p: &[Vector], q: &[Vector]| {
        p.iter()
            .map(|x| q.iter().map(|y| metric.norm_distance(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// A Denjoy–Wolff estimate and the uniform convergence curve towards it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenjoyWolff {
    pub xi: Vector,
    /// Time of each sup-curve entry (the step index for maps).
    pub times: Vec<f64>,
    /// `max` over the test set of the chart distance from `f^n(x)` to `xi`.
    pub sup_dist_curve: Vec<f64>,
}

impl DenjoyWolff {
    pub fn final_sup(&self) -> f64 {
        self.sup_dist_curve.last().copied().unwrap_or(f64::INFINITY)
    }

    /// Largest increase over the last `fraction` of the curve.
    pub fn tail_increase(&self, fraction: f64) -> f64 {
        let n = self.sup_dist_curve.len();
        let keep = ((n as f64 * fraction).ceil() as usize).clamp(1, n.max(1));
        self.sup_dist_curve[n - keep..]
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

fn single_boundary_cluster(est: &AttractorEstimate) -> Result<Vector, DynamicsError> {
    match est.boundedness {
        Boundedness::Bounded => return Err(DynamicsError::BoundedRegime),
        Boundedness::Undecided => return Err(DynamicsError::UndecidedRegime),
        Boundedness::Unbounded => {}
    }
    est.dw_point.clone().ok_or(DynamicsError::MultipleClusters(est.omega_points.len()))
}

fn sup_curve(columns: Vec<Vec<f64>>) -> Vec<f64> {
    let len = columns.iter().map(Vec::len).min().unwrap_or(0);
    (0..len).map(|n| columns.iter().map(|c| c[n]).fold(0.0, f64::max)).collect()
}

/// Denjoy–Wolff point of a map with unbounded orbits, and the sup-distance
/// curve over `test_set` for `n_steps` iterations.
pub fn denjoy_wolff(
    metric: &MetricInstance,
    map: &dyn SelfMap,
    seeds: &[Vector],
    test_set: &[Vector],
    params: &DynamicsParams,
) -> Result<DenjoyWolff, DynamicsError> {
    let est = attractor(metric, map, seeds, params)?;
    let xi = single_boundary_cluster(&est)?;
    let columns = map_slice(test_set, |x0| -> Result<Vec<f64>, DynamicsError> {
        let mut x = x0.clone();
        let mut out = Vec::with_capacity(params.n_steps + 1);
        out.push(metric.norm_distance(&x, &xi));
        for _ in 0..params.n_steps {
            x = map.apply(&x)?;
            out.push(metric.norm_distance(&x, &xi));
        }
        Ok(out)
    });
    let columns: Vec<Vec<f64>> = columns.into_iter().collect::<Result<_, _>>()?;
    let sup_dist_curve = sup_curve(columns);
    let times = (0..sup_dist_curve.len()).map(|n| n as f64).collect();
    Ok(DenjoyWolff { xi, times, sup_dist_curve })
}

/// Semigroup version of [`denjoy_wolff`]: the omega estimate and the sup
/// curve both use the time grid `t_grid` (increasing, starting at 0).
pub fn denjoy_wolff_semigroup(
    metric: &MetricInstance,
    sg: &SemigroupSpec,
    seeds: &[Vector],
    test_set: &[Vector],
    t_grid: &[f64],
    params: &DynamicsParams,
) -> Result<DenjoyWolff, DynamicsError> {
    let probe_step = t_grid.iter().copied().find(|&t| t > 0.0).ok_or(DynamicsError::NoOrbits)?;
    let est = finish(metric, flow_traces(metric, sg, seeds, t_grid, probe_step, params)?, params)?;
    let xi = single_boundary_cluster(&est)?;
    let mats = time_matrices(sg, t_grid);
    let columns = map_slice(test_set, |x0| -> Result<Vec<f64>, DynamicsError> {
        t_grid
            .iter()
            .zip(&mats)
            .map(|(&t, m)| {
                let x = if t == 0.0 { x0.clone() } else { projective_apply(m, x0)? };
                Ok(metric.norm_distance(&x, &xi))
            })
            .collect()
    });
    let columns: Vec<Vec<f64>> = columns.into_iter().collect::<Result<_, _>>()?;
    Ok(DenjoyWolff { xi, times: t_grid.to_vec(), sup_dist_curve: sup_curve(columns) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub point: Vector,
    /// Chart distance between the point and its image.
    pub residual: f64,
    pub seed_index: usize,
}

/// Iterates from each seed in turn and returns the first interior point whose
/// image is within `params.fixed_point_tol`. Seeds whose probe orbit is
/// unbounded are skipped. `None` means nothing was found, not that no fixed
/// point exists.
pub fn fixed_point_search(
    metric: &MetricInstance,
    map: &dyn SelfMap,
    seeds: &[Vector],
    params: &DynamicsParams,
) -> Result<Option<FixedPoint>, DynamicsError> {
    for (seed_index, x0) in seeds.iter().enumerate() {
        let probe = probe_trace(metric, map, x0, params.probe_len)?;
        if classify_boundedness(&probe, params)? == Boundedness::Unbounded {
            continue;
        }
        let mut x = x0.clone();
        let mut found: Option<(Vector, f64)> = None;
        for _ in 0..=params.n_steps {
            let fx = map.apply(&x)?;
            let residual = metric.norm_distance(&fx, &x);
            // Once below tolerance, keep refining while the residual drops.
            if found.as_ref().is_some_and(|(_, best)| residual >= *best) {
                break;
            }
            if residual < params.fixed_point_tol {
                found = Some((x.clone(), residual));
            }
            if residual == 0.0 {
                break;
            }
            x = fx;
        }
        if let Some((point, residual)) = found {
            if metric.locate(&point)? == Location::Interior {
                return Ok(Some(FixedPoint { point, residual, seed_index }));
            }
        }
    }
    Ok(None)
}

/// Sampled Lipschitz check of a map in a metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonexpansiveReport {
    pub n_pairs: usize,
    /// Pairs with `d(x, y) > 1e-8` whose images stayed interior.
    pub n_compared: usize,
    pub max_ratio: f64,
    /// `(x, y, ratio)` for every ratio above `1 + tol`.
    pub violations: Vec<(Vector, Vector, f64)>,
}

/// Minimum pair distance for a ratio to be recorded.
const MIN_PAIR_DISTANCE: f64 = 1e-8;

/// Samples `n_pairs` interior pairs and reports the largest
/// `d(f(x), f(y)) / d(x, y)`.
pub fn verify_nonexpansive(
    metric: &dyn MetricSpace,
    map: &dyn SelfMap,
    n_pairs: usize,
    seed: u64,
    tol: f64,
) -> NonexpansiveReport {
    let chunks = map_chunks(n_pairs, |task, _start, len| {
        let mut rng = task_rng(seed, task as u64);
        let mut compared = 0usize;
        let mut max_ratio = 0.0f64;
        let mut violations = Vec::new();
        for _ in 0..len {
            let x = metric.sample_point(&mut rng);
            let y = metric.sample_point(&mut rng);
            let Ok(d) = metric.distance(&x, &y) else { continue };
            if d <= MIN_PAIR_DISTANCE {
                continue;
            }
            let (Ok(fx), Ok(fy)) = (map.apply(&x), map.apply(&y)) else { continue };
            let Ok(fd) = metric.distance(&fx, &fy) else { continue };
            compared += 1;
            let ratio = fd / d;
            max_ratio = max_ratio.max(ratio);
            if ratio > 1.0 + tol {
                violations.push((x, y, ratio));
            }
        }
        (compared, max_ratio, violations)
    });
    let mut report = NonexpansiveReport { n_pairs, n_compared: 0, max_ratio: 0.0, violations: Vec::new() };
    for (c, m, v) in chunks {
        report.n_compared += c;
        report.max_ratio = report.max_ratio.max(m);
        report.violations.extend(v);
    }
    report
}

/// Seeds drawn from the metric's sampler, one task stream per seed.
pub fn sample_seeds(metric: &dyn MetricSpace, count: usize, master_seed: u64) -> Vec<Vector> {
    map_tasks(count, |i| metric.sample_point(&mut task_rng(master_seed, i as u64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MapSpec;
    use crate::geometry::vector;
    use nalgebra::DMatrix;

    fn cone(n: usize) -> MetricInstance {
        MetricInstance::hilbert_cone(n).unwrap()
    }

    fn pl(n: usize, rows: &[f64]) -> MapSpec {
        MapSpec::projective_linear(DMatrix::from_row_slice(n, n, rows)).unwrap()
    }

    /// Points of the open 1-simplex with both coordinates at least 0.1.
    fn test_set(k: usize) -> Vec<Vector> {
        (0..k).map(|i| {
            let a = 0.1 + 0.8 * i as f64 / (k - 1) as f64;
            vector(&[a, 1.0 - a])
        }).collect()
    }

    /// Birkhoff contraction ratio `tanh(D / 4)`, `D` the largest cone distance
    /// between columns.
    fn birkhoff(a: &DMatrix<f64>) -> f64 {
        let cols: Vec<Vector> = a.column_iter().map(|c| c.into_owned()).collect();
        let mut diam = 0.0f64;
        for i in 0..cols.len() {
            for j in 0..cols.len() {
                diam = diam.max(crate::metrics::hilbert_cone(&cols[i], &cols[j]).unwrap());
            }
        }
        (diam / 4.0).tanh()
    }

    #[test]
    fn identity_attractor_is_seed_set() {
        let m = cone(1);
        let seeds = vec![vector(&[0.2, 0.8]), vector(&[0.6, 0.4])];
        let est = attractor(&m, &MapSpec::identity(), &seeds, &DynamicsParams::default()).unwrap();
        assert_eq!(est.boundedness, Boundedness::Bounded);
        assert_eq!(est.representatives(), seeds);
    }

    #[test]
    fn jordan_attractor_single_cluster() {
        let m = cone(1);
        let seeds = sample_seeds(&m, 100, 3);
        let est = attractor(&m, &pl(2, &[1.0, 1.0, 0.0, 1.0]), &seeds, &DynamicsParams::default()).unwrap();
        assert_eq!(est.boundedness, Boundedness::Unbounded);
        assert_eq!(est.omega_points.len(), 1);
        assert_eq!(est.dw_point, Some(vector(&[1.0, 0.0])));
        assert_eq!(m.locate(&vector(&[1.0, 0.0])).unwrap(), Location::Boundary);
    }

    #[test]
    fn denjoy_wolff_examples() {
        let m = cone(1);
        let p = DynamicsParams::default();
        let seeds = test_set(10);
        let dw = denjoy_wolff(&m, &pl(2, &[1.0, 1.0, 0.0, 1.0]), &seeds, &test_set(100), &p).unwrap();
        assert_eq!(dw.xi, vector(&[1.0, 0.0]));
        assert!(dw.final_sup() < 1e-3);
        assert!(dw.final_sup() <= 1.0 / p.n_steps as f64);
        assert!(dw.tail_increase(p.tail_fraction) <= 1e-6);
        let err = denjoy_wolff(&m, &pl(2, &[2.0, 1.0, 1.0, 2.0]), &seeds, &seeds, &p).unwrap_err();
        assert_eq!(err, DynamicsError::BoundedRegime);
    }

    #[test]
    fn semigroup_denjoy_wolff() {
        let m = cone(1);
        let sg = SemigroupSpec::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let grid: Vec<f64> = (0..=1000).map(|k| k as f64).collect();
        let p = DynamicsParams::default();
        let dw = denjoy_wolff_semigroup(&m, &sg, &test_set(10), &test_set(100), &grid, &p).unwrap();
        assert_eq!(dw.xi, vector(&[1.0, 0.0]));
        assert!(dw.final_sup() < 1e-3);
    }

    #[test]
    fn semigroup_attractor_agrees() {
        let m = cone(1);
        let sg = SemigroupSpec::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let p = DynamicsParams { n_steps: 2000, ..DynamicsParams::default() };
        let seeds = test_set(8);
        let r = semigroup_attractor(&m, &sg, 1.0, &seeds, &p).unwrap();
        assert_eq!(r.skeleton.dw_point, Some(vector(&[1.0, 0.0])));
        assert!(r.hausdorff < 1e-3, "{}", r.hausdorff);
    }

    #[test]
    fn fixed_points() {
        let m = cone(1);
        let p = DynamicsParams::default();
        let seeds = test_set(5);
        let id = fixed_point_search(&m, &MapSpec::identity(), &seeds, &p).unwrap().unwrap();
        assert_eq!((id.point, id.residual), (seeds[0].clone(), 0.0));
        let perron = fixed_point_search(&m, &pl(2, &[2.0, 1.0, 1.0, 2.0]), &seeds, &p).unwrap().unwrap();
        assert!((perron.point - vector(&[0.5, 0.5])).amax() < 1e-10);
        assert!(perron.residual < 1e-10);
        assert!(fixed_point_search(&m, &pl(2, &[1.0, 1.0, 0.0, 1.0]), &seeds, &p).unwrap().is_none());
    }

    #[test]
    fn nonexpansive_reports() {
        let m = cone(1);
        let id = verify_nonexpansive(&m, &MapSpec::identity(), 2000, 1, 1e-9);
        assert_eq!(id.max_ratio, 1.0);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let k = birkhoff(&a);
        assert!((k - 1.0 / 3.0).abs() < 1e-15);
        let r = verify_nonexpansive(&m, &MapSpec::projective_linear(a).unwrap(), 2000, 1, 1e-9);
        assert!(r.max_ratio <= k + 1e-9 && r.violations.is_empty());
    }
}
