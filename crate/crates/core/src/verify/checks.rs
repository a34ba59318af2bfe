use rand::Rng;

use super::{sample_tally, CheckContext, CheckReport, ReportBuilder, Tally};
use crate::geometry::{ConvexBody, Vector};
use crate::horoballs::{intersection_shrink_check, star_shape_check, HoroballSpec, StarShapeParams};
use crate::metrics::{hilbert_norm_lower_bound, kobayashi_lower_bound, MetricError, MetricInstance, MetricSpace};

/// Condition (C): `d(s x + (1 - s) y, z) <= max(d(x, z), d(y, z))` on random
/// `(x, y, z, s)`.
pub fn check_condition_c(
    ctx: &CheckContext,
    instance: &str,
    metric: &dyn MetricSpace,
    negative: bool,
) -> CheckReport {
    let p = &ctx.params;
    let tally = sample_tally(p.n_condition_c, ctx.seed, p.condc_tol, |rng| {
        let x = metric.sample_point(rng);
        let y = metric.sample_point(rng);
        let z = metric.sample_point(rng);
        let s: f64 = rng.random();
        let u = metric.combine(&x, &y, s);
        let bound = metric.distance(&x, &z).ok()?.max(metric.distance(&y, &z).ok()?);
        Some(bound - metric.distance(&u, &z).ok()?)
    });
    let why = if negative {
        "Euclidean distance pulled back through a bend; its balls are not convex"
    } else {
        "Hilbert metric balls are convex"
    };
    ReportBuilder::new(ctx, "condition-C", instance).control(negative).because(why).finish(tally)
}

/// `d(x, y) >= 2 ln(1 + |x - y| / diam) - tol` for random pairs, norms taken
/// in chart coordinates.
pub fn check_axiom5(
    ctx: &CheckContext,
    instance: &str,
    metric: &dyn MetricSpace,
    diam: f64,
    negative: bool,
) -> CheckReport {
    let p = &ctx.params;
    let tally = sample_tally(p.n_axiom5, ctx.seed, p.axiom5_tol, |rng| {
        let x = metric.sample_point(rng);
        let y = metric.sample_point(rng);
        let d = metric.distance(&x, &y).ok()?;
        Some(d - hilbert_norm_lower_bound(diam, &metric.chart(&x), &metric.chart(&y)))
    });
    let why = if negative {
        "Hilbert distance scaled by 1/4 drops below the norm bound"
    } else {
        "quantitative Axiom 5' bound for the Hilbert metric of a bounded convex domain"
    };
    ReportBuilder::new(ctx, "axiom5", instance).control(negative).because(why).detail("diameter", diam).finish(tally)
}

/// `k(x, y) >= artanh(|x - y| / diam) - slack` for random pairs.
pub fn check_kobayashi_on(
    ctx: &CheckContext,
    instance: &str,
    metric: &dyn MetricSpace,
    diam: f64,
    negative: bool,
) -> CheckReport {
    let p = &ctx.params;
    let tally = sample_tally(p.n_kobayashi, ctx.seed, p.kobayashi_slack, |rng| {
        let x = metric.sample_point(rng);
        let y = metric.sample_point(rng);
        let k = metric.distance(&x, &y).ok()?;
        Some(k - kobayashi_lower_bound(diam, &x, &y).ok()?)
    });
    let why = if negative {
        "Poincaré distance scaled by 1/4 is not the Kobayashi distance"
    } else {
        "Kobayashi distance of a bounded convex domain dominates artanh(|x - y| / diam)"
    };
    ReportBuilder::new(ctx, "kobayashi", instance).control(negative).because(why).detail("diameter", diam).finish(tally)
}

/// The Kobayashi bound on the unit disc and the bidisc.
pub fn check_kobayashi_bound(ctx: &CheckContext) -> Vec<CheckReport> {
    let disc = MetricInstance::poincare_disc();
    let bidisc = MetricInstance::polydisc(2);
    vec![
        check_kobayashi_on(ctx, "disc", &disc, disc.diameter(), false),
        check_kobayashi_on(ctx, "bidisc", &bidisc, bidisc.diameter(), false),
    ]
}

/// Points `x + (z - x) / 2^k` and `y + (z - y) / 2^k` for `k = 1..=steps`.
pub fn pair_sequences(x: &Vector, y: &Vector, z: &Vector, steps: usize) -> Vec<(Vector, Vector)> {
    (1..=steps)
        .map(|k| {
            let h = 0.5f64.powi(k as i32);
            (x + (z - x) * h, y + (z - y) * h)
        })
        .collect()
}

/// `D_k = d(x_k, y_k) - max(d(x_k, z), d(y_k, z))` along [`pair_sequences`].
pub fn axiom2star_sequence(
    metric: &dyn MetricSpace,
    x: &Vector,
    y: &Vector,
    z: &Vector,
    steps: usize,
) -> Result<Vec<f64>, MetricError> {
    pair_sequences(x, y, z, steps)
        .iter()
        .map(|(xk, yk)| Ok(metric.distance(xk, yk)? - metric.distance(xk, z)?.max(metric.distance(yk, z)?)))
        .collect()
}

/// Increments allowed to be this negative in the "eventually increasing"
/// tail of `D_k`.
const TAIL_MONOTONE_TOL: f64 = 1e-6;

fn axiom2star_margin(d: &[f64], growth: f64) -> f64 {
    let tail = &d[d.len() / 2..];
    let min_incr = tail.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if min_incr < -TAIL_MONOTONE_TOL {
        return min_incr;
    }
    d[d.len() - 1] - d[0] - growth
}

/// Axiom 2* on explicit boundary pairs. With `enforce_premise`, pairs whose
/// segment lies in the boundary are skipped.
pub fn check_axiom2star_pairs(
    ctx: &CheckContext,
    instance: &str,
    metric: &dyn MetricSpace,
    body: &ConvexBody,
    pairs: &[(Vector, Vector)],
    enforce_premise: bool,
    negative: bool,
) -> CheckReport {
    let p = &ctx.params;
    let z = body.interior_point().clone();
    let mut tally = Tally::new(0.0);
    let mut skipped = 0usize;
    for (x, y) in pairs {
        if enforce_premise && body.segment_on_boundary(x, y, p.ch_samples).unwrap_or(true) {
            skipped += 1;
            continue;
        }
        match axiom2star_sequence(metric, &metric.from_chart(x), &metric.from_chart(y), &metric.from_chart(&z), p.sequence_steps) {
            Ok(d) if d.len() >= 2 => tally.add(axiom2star_margin(&d, p.growth)),
            _ => skipped += 1,
        }
    }
    let why = if negative {
        "pairs on a common facet with the premise ignored; D_k tends to -infinity"
    } else {
        "the Hilbert metric satisfies Axiom 2*"
    };
    let b = ReportBuilder::new(ctx, "axiom2star", instance)
        .control(negative)
        .because(why)
        .detail("skipped_pairs", skipped)
        .detail("growth", p.growth);
    if tally.n == 0 {
        return b.inconclusive("no admissible boundary pair");
    }
    b.finish(tally)
}

fn boundary_pairs(body: &ConvexBody, n: usize, seed: u64) -> Vec<(Vector, Vector)> {
    let mut rng = crate::exec::task_rng(seed, u64::MAX);
    (0..n).map(|_| (body.sample_boundary_with(&mut rng), body.sample_boundary_with(&mut rng))).collect()
}

/// Axiom 2* on random boundary pairs of `body` (chart coordinates of
/// `metric`).
pub fn check_axiom2star(ctx: &CheckContext, instance: &str, metric: &dyn MetricSpace, body: &ConvexBody) -> CheckReport {
    let pairs = boundary_pairs(body, ctx.params.n_axiom2star, ctx.seed);
    check_axiom2star_pairs(ctx, instance, metric, body, &pairs, true, false)
}

/// A3' restated: when `d(x_n, y_n) - d(y_n, w)` falls below the `a3prime`
/// threshold along [`pair_sequences`] toward `(xi, eta)`, the segment
/// `[xi, eta]` lies in the boundary. Pairs are in chart coordinates of a
/// polytope `body`; `None` samples them.
pub fn check_a3prime(
    ctx: &CheckContext,
    instance: &str,
    metric: &dyn MetricSpace,
    body: &ConvexBody,
    pairs: Option<&[(Vector, Vector)]>,
    negative: bool,
) -> CheckReport {
    let p = &ctx.params;
    let sampled;
    let pairs = match pairs {
        Some(v) => v,
        None => {
            sampled = boundary_pairs(body, p.n_a3prime, ctx.seed);
            &sampled
        }
    };
    let w = body.interior_point().clone();
    let wm = metric.from_chart(&w);
    let mut tally = Tally::new(p.face_tol);
    let mut final_values = Vec::new();
    for (xi, eta) in pairs {
        let seq = pair_sequences(xi, eta, &w, p.sequence_steps);
        let last = seq.last().and_then(|(x, y)| {
            let (x, y) = (metric.from_chart(x), metric.from_chart(y));
            Some(metric.distance(&x, &y).ok()? - metric.distance(&y, &wm).ok()?)
        });
        let Some(value) = last else { continue };
        final_values.push(value);
        if value >= p.a3prime {
            continue;
        }
        let on_boundary = body.segment_on_boundary(xi, eta, p.ch_samples).unwrap_or(false);
        let depth = body.slacks(&((xi + eta) * 0.5)).map_or(1.0, |s| s.min());
        tally.add(if on_boundary { 0.0 } else { -depth.max(p.face_tol * 2.0) });
    }
    let why = if negative {
        "depth-only pseudo-metric: different facets at equal depth look close"
    } else {
        "Hilbert metric on a polytope; the premise forces a common face"
    };
    let b = ReportBuilder::new(ctx, "a3prime", instance)
        .control(negative)
        .because(why)
        .detail("n_pairs", pairs.len())
        .detail("threshold", p.a3prime)
        .detail("min_final_value", final_values.iter().copied().fold(f64::INFINITY, f64::min));
    if tally.n == 0 {
        return b.inconclusive("no pair met the premise");
    }
    b.finish(tally)
}

/// Star shape of a big horoball with respect to its center.
pub fn check_star_shape(ctx: &CheckContext, instance: &str, metric: &MetricInstance, spec: &HoroballSpec) -> CheckReport {
    let p = &ctx.params;
    let params = StarShapeParams { pull_factor: p.pull, tol_star: p.tol_star, ..StarShapeParams::default() };
    let b = ReportBuilder::new(ctx, "star-shape", instance)
        .because("big horoballs of a Hilbert geometry are star-shaped with respect to their center")
        .detail("radius", spec.radius);
    match star_shape_check(metric, spec, p.n_star_eta, p.n_star_s, ctx.seed, &p.approach, &params) {
        Ok(r) if !r.no_members => {
            let tally = Tally { n: r.n_probes, violations: r.violations.len(), worst: -r.worst_margin, tol: p.tol_star };
            b.detail("n_eta", r.n_eta).finish(tally)
        }
        Ok(_) => b.inconclusive("no horoball members sampled"),
        Err(e) => b.inconclusive(&e.to_string()),
    }
}

/// Shrinking of the big-horoball boundary traces as the radius decreases:
/// diameters nonincreasing up to grid resolution, final one below
/// `shrink_final_max`.
pub fn check_shrink(
    ctx: &CheckContext,
    instance: &str,
    metric: &MetricInstance,
    pole: &Vector,
    center: &Vector,
    negative: bool,
) -> CheckReport {
    let p = &ctx.params;
    let why = if negative {
        "center inside a facet: the trace keeps the whole facet"
    } else {
        "the intersection of the closed horoballs is the single boundary point"
    };
    let b = ReportBuilder::new(ctx, "horoball-shrink", instance).control(negative).because(why);
    let r = match intersection_shrink_check(metric, pole, center, &p.shrink_radii, p.shrink_grid, &p.approach, p.pull) {
        Ok(r) => r,
        Err(e) => return b.inconclusive(&e.to_string()),
    };
    let mut tally = Tally::new(0.0);
    for w in r.diameters.windows(2) {
        tally.add(r.resolution - (w[1] - w[0]));
    }
    if let Some(last) = r.diameters.last() {
        tally.add(p.shrink_final_max - last);
    }
    b.detail("diameters", &r.diameters)
        .detail("member_counts", &r.member_counts)
        .detail("resolution", r.resolution)
        .finish(tally)
}
