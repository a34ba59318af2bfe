use super::{CheckContext, CheckReport, ReportBuilder, Tally};
use crate::dynamics::{
    attractor, classify_boundedness, denjoy_wolff, denjoy_wolff_semigroup, hausdorff_distance, iterate, probe_trace,
    semigroup_attractor, verify_nonexpansive, AttractorEstimate, Boundedness, DynamicsError, OrbitTrace, SelfMap,
    SemigroupSpec,
};
use crate::exec::map_slice;
use crate::geometry::{ConvexBody, Vector};
use crate::horoballs::intersection_shrink_check;
use crate::metrics::{MetricInstance, MetricSpace};

/// What [`check_wolff_denjoy`] iterates.
#[derive(Clone, Copy)]
pub enum DwTarget<'a> {
    Map(&'a dyn SelfMap),
    Semigroup { sg: &'a SemigroupSpec, t_grid: &'a [f64] },
}

/// Uniform convergence to a single Denjoy–Wolff point: the sup distance over
/// `test_set` ends below `tol_dw` and the tail of the sup curve does not rise
/// by more than `monotone_tol`.
pub fn check_wolff_denjoy(
    ctx: &CheckContext,
    instance: &str,
    metric: &MetricInstance,
    target: DwTarget<'_>,
    seeds: &[Vector],
    test_set: &[Vector],
    negative: bool,
) -> CheckReport {
    let p = &ctx.params.dynamics;
    let why = if negative {
        "discontinuous map with two boundary attractors"
    } else {
        "fixed-point-free nonexpansive dynamics on a Hilbert geometry converge to one boundary point"
    };
    let b = ReportBuilder::new(ctx, "wolff-denjoy", instance).control(negative).because(why);
    let result = match target {
        DwTarget::Map(map) => denjoy_wolff(metric, map, seeds, test_set, p),
        DwTarget::Semigroup { sg, t_grid } => denjoy_wolff_semigroup(metric, sg, seeds, test_set, t_grid, p),
    };
    match result {
        Ok(dw) => {
            let final_margin = p.tol_dw - dw.final_sup();
            let tail_margin = p.monotone_tol - dw.tail_increase(p.tail_fraction);
            let violations = usize::from(final_margin < 0.0) + usize::from(tail_margin < 0.0);
            let tally = Tally { n: test_set.len(), violations, worst: final_margin.min(tail_margin), tol: 0.0 };
            b.detail("xi", dw.xi.as_slice())
                .detail("final_sup", dw.final_sup())
                .detail("final_time", dw.times.last().copied().unwrap_or(0.0))
                .finish(tally)
        }
        Err(DynamicsError::MultipleClusters(k)) => {
            let tally = Tally { n: test_set.len(), violations: 1, worst: f64::NEG_INFINITY, tol: 0.0 };
            b.detail("omega_clusters", k).finish(tally)
        }
        Err(e) => b.inconclusive(&e.to_string()),
    }
}

/// In-ch and ch-of-ch failures of boundary points against `xi` (chart
/// coordinates of a polytope).
pub fn attractor_inclusions_at(
    body: &ConvexBody,
    omega: &[Vector],
    xi: &Vector,
    face_tol: f64,
) -> (usize, usize) {
    let mut in_ch_fail = 0;
    let mut chch_fail = 0;
    for w in omega {
        if !body.in_ch(w, xi, face_tol).unwrap_or(false) {
            in_ch_fail += 1;
        }
        if !body.ch_of_ch_membership(w, xi, face_tol).unwrap_or(false) {
            chch_fail += 1;
        }
    }
    (in_ch_fail, chch_fail)
}

/// Attractor inclusions `Omega in ch(xi)` and `Omega in ch(ch(xi))` for a map
/// on a polytope, plus the grid check that the smallest horoball trace lies
/// in `ch(xi)`. `xi` is estimated when not given.
pub fn check_attractor_inclusions(
    ctx: &CheckContext,
    instance: &str,
    metric: &MetricInstance,
    map: &dyn SelfMap,
    seeds: &[Vector],
    xi: Option<&Vector>,
    negative: bool,
) -> CheckReport {
    let p = &ctx.params;
    let why = if negative {
        "discontinuous map whose attractor leaves ch(xi)"
    } else {
        "Hilbert geometry of a polytope satisfies Axiom 2*, so the attractor lies in ch(xi)"
    };
    let b = ReportBuilder::new(ctx, "attractor-inclusions", instance).control(negative).because(why);
    let Some(body) = metric.body().filter(|b| b.is_polytope()) else {
        return b.inconclusive("needs a polytope");
    };
    let est = match attractor(metric, map, seeds, &p.dynamics) {
        Ok(e) => e,
        Err(e) => return b.inconclusive(&e.to_string()),
    };
    if est.boundedness != Boundedness::Unbounded {
        return b.inconclusive(&format!("orbits are {:?}", est.boundedness).to_lowercase());
    }
    let xi = match (xi, &est.dw_point) {
        (Some(x), _) => x.clone(),
        (None, Some(x)) => x.clone(),
        (None, None) => {
            let tally = Tally { n: est.omega_points.len(), violations: 1, worst: f64::NEG_INFINITY, tol: 0.0 };
            return b.detail("omega_clusters", est.omega_points.len()).finish(tally);
        }
    };
    let xi_chart = metric.chart(&xi);
    let omega: Vec<Vector> = est.omega_points.iter().map(|c| metric.chart(&c.representative)).collect();
    let (in_ch_fail, chch_fail) = attractor_inclusions_at(body, &omega, &xi_chart, p.face_tol);
    let mut bridge_fail = 0;
    let mut bridge_points = 0;
    if body.dim() >= 2 {
        let pole = metric.from_chart(body.interior_point());
        match intersection_shrink_check(metric, &pole, &xi, &p.shrink_radii, p.shrink_grid, &p.approach, p.pull) {
            Ok(r) => {
                bridge_points = r.final_members.len();
                bridge_fail = r
                    .final_members
                    .iter()
                    .filter(|m| !body.in_ch(m, &xi_chart, p.face_tol).unwrap_or(false))
                    .count();
            }
            Err(e) => return b.inconclusive(&e.to_string()),
        }
    }
    let n = omega.len() + bridge_points;
    let violations = in_ch_fail + chch_fail + bridge_fail;
    let tally = Tally { n, violations, worst: if violations > 0 { -1.0 } else { 0.0 }, tol: 0.0 };
    b.detail("xi", xi.as_slice())
        .detail("omega_points", omega.iter().map(|w| w.as_slice().to_vec()).collect::<Vec<_>>())
        .detail("in_ch_failures", in_ch_fail)
        .detail("ch_of_ch_failures", chch_fail)
        .detail("bridge_points", bridge_points)
        .detail("bridge_failures", bridge_fail)
        .finish(tally)
}

/// Hausdorff distance between two attractor estimates against
/// `2 * cluster_radius`.
pub fn compare_attractors(
    ctx: &CheckContext,
    instance: &str,
    metric: &dyn MetricSpace,
    a: &AttractorEstimate,
    b_est: &AttractorEstimate,
    negative: bool,
) -> CheckReport {
    let radius = ctx.params.dynamics.cluster_radius;
    let why = if negative {
        "attractors of two different semigroups"
    } else {
        "the attractor of a semigroup equals that of any of its time-t0 maps"
    };
    let b = ReportBuilder::new(ctx, "semigroup-attractor", instance).control(negative).because(why);
    if a.low_confidence || b_est.low_confidence {
        return b.inconclusive("an estimate is low-confidence");
    }
    let h = hausdorff_distance(metric, &a.representatives(), &b_est.representatives());
    let mut tally = Tally::new(0.0);
    tally.add(2.0 * radius - h);
    b.detail("hausdorff", h)
        .detail("skeleton", a.representatives().iter().map(|v| v.as_slice().to_vec()).collect::<Vec<_>>())
        .detail("dense", b_est.representatives().iter().map(|v| v.as_slice().to_vec()).collect::<Vec<_>>())
        .finish(tally)
}

/// Skeleton and dense-time attractors of a semigroup agree.
pub fn check_semigroup_attractor_equality(
    ctx: &CheckContext,
    instance: &str,
    metric: &MetricInstance,
    sg: &SemigroupSpec,
    t0: f64,
    seeds: &[Vector],
) -> CheckReport {
    match semigroup_attractor(metric, sg, t0, seeds, &ctx.params.dynamics) {
        Ok(r) => compare_attractors(ctx, instance, metric, &r.skeleton, &r.dense, false).with_detail("t0", t0),
        Err(e) => ReportBuilder::new(ctx, "semigroup-attractor", instance).inconclusive(&e.to_string()),
    }
}

impl CheckReport {
    fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), serde_json::json!(value));
        self
    }
}

fn orbit_points(trace: &OrbitTrace) -> Vec<Vector> {
    let mut pts = trace.points.clone();
    pts.extend(trace.boundary_hit.clone());
    pts
}

/// Axiom 4' at estimate resolution: orbit sequences at bounded mutual
/// distance (`premise_metric`) have the same norm limit. Sequences are pairs
/// of neighbouring seeds and shifts of one orbit by 1 and 3 steps; only
/// seeds whose orbits are unbounded in `metric` are used.
pub fn check_axiom4(
    ctx: &CheckContext,
    instance: &str,
    metric: &MetricInstance,
    premise_metric: &dyn MetricSpace,
    map: &dyn SelfMap,
    seeds: &[Vector],
    negative: bool,
) -> CheckReport {
    let p = &ctx.params.dynamics;
    let why = if negative {
        "trivial pseudo-metric: every pair looks bounded while the limits differ"
    } else {
        "the Hilbert metric satisfies Axiom 4'"
    };
    let b = ReportBuilder::new(ctx, "axiom4", instance).control(negative).because(why);
    let orbits = map_slice(seeds, |x0| -> Option<Vec<Vector>> {
        let probe = probe_trace(metric, map, x0, p.probe_len).ok()?;
        if classify_boundedness(&probe, p).ok()? != Boundedness::Unbounded {
            return None;
        }
        iterate(metric, map, x0, p.n_steps).ok().map(|t| orbit_points(&t))
    });
    let mut pairs: Vec<(&[Vector], &[Vector])> = Vec::new();
    for o in orbits.iter().flatten() {
        for shift in [1usize, 3] {
            if o.len() > shift + 1 {
                pairs.push((&o[..o.len() - shift], &o[shift..]));
            }
        }
    }
    for w in orbits.windows(2) {
        if let [Some(a), Some(c)] = w {
            pairs.push((a, c));
        }
    }
    let mut tally = Tally::new(0.0);
    let mut skipped = 0;
    for (xs, ys) in pairs {
        let n = xs.len().min(ys.len());
        let ds: Option<Vec<f64>> = (0..n).map(|i| premise_metric.distance(&xs[i], &ys[i]).ok()).collect();
        let bounded = ds.is_some_and(|ds| ds.iter().all(|d| *d <= ds[0] * (1.0 + 1e-9) + 1e-9));
        if !bounded {
            skipped += 1;
            continue;
        }
        let (ex, ey) = (&xs[n - 1], &ys[n - 1]);
        let gap = match (metric.boundary_projection(ex, p.cluster_radius), metric.boundary_projection(ey, p.cluster_radius)) {
            (Ok(a), Ok(c)) => metric.norm_distance(&a, &c),
            _ => metric.norm_distance(ex, ey),
        };
        tally.add(p.cluster_radius - gap);
    }
    let b = b.detail("skipped_pairs", skipped);
    if tally.n == 0 {
        return b.inconclusive("no unbounded orbit pair at bounded distance");
    }
    b.finish(tally)
}

/// Sampled nonexpansiveness of `map` in `metric`.
pub fn check_nonexpansive(
    ctx: &CheckContext,
    instance: &str,
    metric: &dyn MetricSpace,
    map: &dyn SelfMap,
    negative: bool,
) -> CheckReport {
    let p = &ctx.params;
    let tol = p.dynamics.nonexpansive_tol;
    let r = verify_nonexpansive(metric, map, p.n_nonexpansive, ctx.seed, tol);
    let why = if negative {
        "map constructed to stretch distances"
    } else {
        "nonnegative matrices act nonexpansively in the Hilbert metric"
    };
    let tally = Tally { n: r.n_compared, violations: r.violations.len(), worst: 1.0 - r.max_ratio, tol };
    ReportBuilder::new(ctx, "nonexpansive", instance)
        .control(negative)
        .because(why)
        .detail("max_ratio", r.max_ratio)
        .finish(tally)
}

/// `step_d` of each seed's orbit is nonincreasing up to `step_monotone_tol`.
pub fn check_step_monotone(
    ctx: &CheckContext,
    instance: &str,
    metric: &dyn MetricSpace,
    map: &dyn SelfMap,
    seeds: &[Vector],
    n_steps: usize,
    negative: bool,
) -> CheckReport {
    let p = &ctx.params;
    let incs = map_slice(seeds, |x0| iterate(metric, map, x0, n_steps).ok().map(|t| t.max_step_increase()));
    let mut tally = Tally::new(p.step_monotone_tol);
    for inc in incs.into_iter().flatten().filter(|v| v.is_finite()) {
        tally.add(-inc);
    }
    let why = if negative {
        "map constructed to stretch distances"
    } else {
        "consecutive-step distances of a nonexpansive map cannot grow"
    };
    ReportBuilder::new(ctx, "step-monotone", instance).control(negative).because(why).finish(tally)
}
