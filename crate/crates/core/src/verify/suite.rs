use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::checks::*;
use super::controls::{DepthPseudoMetric, PowerMap, ScaledMetric, SplitMap, SqrtStretch, WarpedEuclidean};
use super::dyn_checks::*;
use super::instances::*;
use super::{CheckContext, CheckReport, Verdict};
use crate::dynamics::{sample_seeds, semigroup_attractor, MapSpec, SelfMap, SemigroupSpec};
use crate::geometry::{vector, Vector};
use crate::horoballs::{HoroballKind, HoroballSpec};
use crate::metrics::{MetricInstance, MetricKind};

/// Suite names accepted by [`run_suite`].
pub const SUITES: &[&str] = &[
    "condition-C",
    "axiom5",
    "kobayashi",
    "axiom2star",
    "a3prime",
    "axiom4",
    "wolff-denjoy",
    "attractor-inclusions",
    "semigroup-attractor",
    "nonexpansive",
    "horoballs",
    "all",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub config_digest: String,
    pub verdict: Verdict,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    fn new(suite: &str, ctx: &CheckContext, checks: Vec<CheckReport>) -> Self {
        let verdict = checks.iter().map(|c| c.verdict).max().unwrap_or(Verdict::Inconclusive);
        Self { suite: suite.to_string(), seed: ctx.seed, config_digest: ctx.config_digest.clone(), verdict, checks }
    }
}

/// A user-supplied instance added to the suites it fits.
#[derive(Clone, Debug)]
pub struct ExtraInstance {
    pub name: String,
    pub metric: MetricInstance,
    pub map: Option<MapSpec>,
    pub seeds: Vec<Vector>,
}

fn cone(n: usize) -> MetricInstance {
    MetricInstance::hilbert_cone(n).expect("simplex")
}

fn diag(entries: &[f64]) -> MapSpec {
    MapSpec::projective_linear(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries))).expect("diag")
}

fn split_segment() -> SplitMap {
    SplitMap { axis: 0, threshold: 0.5, normalize: true, upper: diag(&[2.0, 1.0]), lower: diag(&[1.0, 2.0]) }
}

fn split_triangle() -> SplitMap {
    SplitMap { axis: 0, threshold: 0.5, normalize: true, upper: diag(&[2.0, 1.0, 1.0]), lower: diag(&[0.5, 1.0, 1.0]) }
}

fn split_square() -> SplitMap {
    SplitMap {
        axis: 0,
        threshold: 0.0,
        normalize: false,
        upper: MapSpec::homothety(&vector(&[1.0, 0.0]), 0.5).expect("homothety"),
        lower: MapSpec::homothety(&vector(&[-1.0, 0.0]), 0.5).expect("homothety"),
    }
}

fn condition_c(ctx: &CheckContext, extra: Option<&ExtraInstance>) -> Vec<CheckReport> {
    let mut out: Vec<CheckReport> =
        hilbert_instances(ctx.seed).iter().map(|(name, m)| check_condition_c(ctx, name, m, false)).collect();
    if let Some(e) = extra {
        out.push(check_condition_c(ctx, &e.name, &e.metric, false));
    }
    let warped = WarpedEuclidean { body: square(), bend: 2.0 };
    out.push(check_condition_c(ctx, "warped-euclidean-square", &warped, true));
    out
}

fn axiom5(ctx: &CheckContext, extra: Option<&ExtraInstance>) -> Vec<CheckReport> {
    let sq = MetricInstance::hilbert(square());
    let mut out = vec![check_axiom5(ctx, "square", &sq, sq.diameter(), false)];
    if let Some(e) = extra.filter(|e| e.metric.body().is_some()) {
        out.push(check_axiom5(ctx, &e.name, &e.metric, e.metric.diameter(), false));
    }
    let scaled = ScaledMetric { inner: sq.clone(), factor: 0.25 };
    out.push(check_axiom5(ctx, "quarter-hilbert-square", &scaled, sq.diameter(), true));
    out
}

fn kobayashi(ctx: &CheckContext) -> Vec<CheckReport> {
    let mut out = check_kobayashi_bound(ctx);
    let disc = MetricInstance::poincare_disc();
    let scaled = ScaledMetric { inner: disc.clone(), factor: 0.25 };
    out.push(check_kobayashi_on(ctx, "quarter-poincare-disc", &scaled, disc.diameter(), true));
    out
}

fn axiom2star(ctx: &CheckContext, extra: Option<&ExtraInstance>) -> Vec<CheckReport> {
    let sq = MetricInstance::hilbert(square());
    let el = MetricInstance::hilbert(ellipse());
    let tri = cone(2);
    let mut out = vec![
        check_axiom2star(ctx, "square", &sq, &square()),
        check_axiom2star(ctx, "ellipse", &el, &ellipse()),
        check_axiom2star(ctx, "simplex-2", &tri, tri.body().expect("body")),
    ];
    if let Some(e) = extra {
        if let Some(body) = e.metric.body() {
            out.push(check_axiom2star(ctx, &e.name, &e.metric, body));
        }
    }
    let same_facet = [
        (vector(&[1.0, -0.5]), vector(&[1.0, 0.5])),
        (vector(&[-0.3, 1.0]), vector(&[0.6, 1.0])),
    ];
    out.push(check_axiom2star_pairs(ctx, "square-same-facet", &sq, &square(), &same_facet, false, true));
    out
}

fn a3prime(ctx: &CheckContext) -> Vec<CheckReport> {
    let sq = MetricInstance::hilbert(square());
    let poly = random_polygon(6, ctx.seed);
    let pm = MetricInstance::hilbert(poly.clone());
    let depth = DepthPseudoMetric { body: square() };
    let pairs = [(vector(&[1.0, 0.0]), vector(&[0.0, 1.0])), (vector(&[1.0, 0.0]), vector(&[-1.0, 0.0]))];
    vec![
        check_a3prime(ctx, "square", &sq, &square(), None, false),
        check_a3prime(ctx, "polygon-6", &pm, &poly, None, false),
        check_a3prime(ctx, "depth-pseudometric-square", &depth, &square(), Some(&pairs), true),
    ]
}

fn axiom4(ctx: &CheckContext, extra: Option<&ExtraInstance>) -> Vec<CheckReport> {
    let m = cone(1);
    let seeds = sample_seeds(&m, ctx.params.n_seeds, ctx.seed);
    let mut out = vec![check_axiom4(ctx, "jordan-2", &m, &m, &jordan2(), &seeds, false)];
    if let Some(e) = extra {
        if let Some(map) = &e.map {
            out.push(check_axiom4(ctx, &e.name, &e.metric, &e.metric, map, &e.seeds, false));
        }
    }
    let zero = ScaledMetric { inner: m.clone(), factor: 0.0 };
    out.push(check_axiom4(ctx, "split-segment-zero-metric", &m, &zero, &split_segment(), &seeds, true));
    out
}

fn wolff_denjoy(ctx: &CheckContext, extra: Option<&ExtraInstance>) -> Vec<CheckReport> {
    let n = ctx.params.n_seeds;
    let m1 = cone(1);
    let m2 = cone(2);
    let seg = segment_test_set(n);
    let tri = triangle_test_set(13);
    let grid: Vec<f64> = (0..=1000).map(f64::from).collect();
    let nil = nilpotent();
    let split = split_segment();
    let seeds = sample_seeds(&m1, n, ctx.seed);
    let mut out = vec![
        check_wolff_denjoy(ctx, "jordan-2", &m1, DwTarget::Map(&jordan2()), &seg, &seg, false),
        check_wolff_denjoy(ctx, "jordan-3", &m2, DwTarget::Map(&jordan3()), &tri, &tri, false),
        check_wolff_denjoy(ctx, "nilpotent-flow", &m1, DwTarget::Semigroup { sg: &nil, t_grid: &grid }, &seg, &seg, false),
    ];
    if let Some(e) = extra {
        if let Some(map) = &e.map {
            out.push(check_wolff_denjoy(ctx, &e.name, &e.metric, DwTarget::Map(map), &e.seeds, &e.seeds, false));
        }
    }
    out.push(check_wolff_denjoy(ctx, "split-segment", &m1, DwTarget::Map(&split), &seeds, &seg, true));
    out
}

fn attractor_inclusions(ctx: &CheckContext, extra: Option<&ExtraInstance>) -> Vec<CheckReport> {
    let n = ctx.params.n_seeds;
    let m1 = cone(1);
    let m2 = cone(2);
    let sq = MetricInstance::hilbert(square());
    let s2 = sample_seeds(&m2, n, ctx.seed);
    let ssq = sample_seeds(&sq, n, ctx.seed);
    // Convergence is uniform on bounded sets only, so the estimates use the
    // fixed test sets rather than seeds from the whole simplex.
    let mut out = vec![
        check_attractor_inclusions(ctx, "jordan-2", &m1, &jordan2(), &segment_test_set(n), None, false),
        check_attractor_inclusions(ctx, "jordan-3", &m2, &jordan3(), &triangle_test_set(13), None, false),
    ];
    if let Some(e) = extra {
        if let Some(map) = &e.map {
            out.push(check_attractor_inclusions(ctx, &e.name, &e.metric, map, &e.seeds, None, false));
        }
    }
    let e1 = vector(&[1.0, 0.0, 0.0]);
    out.push(check_attractor_inclusions(ctx, "split-triangle", &m2, &split_triangle(), &s2, Some(&e1), true));
    let right = vector(&[1.0, 0.0]);
    out.push(check_attractor_inclusions(ctx, "split-square", &sq, &split_square(), &ssq, Some(&right), true));
    out
}

fn semigroup(ctx: &CheckContext) -> Vec<CheckReport> {
    let m = cone(1);
    let seeds = sample_seeds(&m, ctx.params.n_seeds, ctx.seed);
    let nil = nilpotent();
    let mut out = vec![
        check_semigroup_attractor_equality(ctx, "nilpotent-t0-1", &m, &nil, 1.0, &seeds),
        check_semigroup_attractor_equality(ctx, "nilpotent-t0-0.37", &m, &nil, 0.37, &seeds),
        check_semigroup_attractor_equality(ctx, "mixing-t0-1", &m, &mixing(), 1.0, &seeds),
    ];
    let transposed = SemigroupSpec::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).expect("generator");
    let p = &ctx.params.dynamics;
    let control = semigroup_attractor(&m, &nil, 1.0, &seeds, p)
        .and_then(|a| semigroup_attractor(&m, &transposed, 1.0, &seeds, p).map(|b| (a, b)));
    if let Ok((a, b)) = control {
        out.push(compare_attractors(ctx, "nilpotent-vs-transposed", &m, &a.skeleton, &b.dense, true));
    }
    out
}

fn nonexpansive(ctx: &CheckContext, extra: Option<&ExtraInstance>) -> Vec<CheckReport> {
    let n = ctx.params.n_seeds;
    let steps = ctx.params.dynamics.n_steps;
    let m1 = cone(1);
    let m2 = cone(2);
    let s1 = sample_seeds(&m1, n, ctx.seed);
    let s2 = sample_seeds(&m2, n, ctx.seed);
    let (j2, p2, j3) = (jordan2(), perron2(), jordan3());
    let nil_map = nilpotent().time_map(1.0).expect("time map");
    let mix_map = mixing().time_map(1.0).expect("time map");
    let cases: Vec<(&str, &MetricInstance, &dyn SelfMap, &[Vector])> = vec![
        ("jordan-2", &m1, &j2, &s1),
        ("perron-2", &m1, &p2, &s1),
        ("jordan-3", &m2, &j3, &s2),
        ("nilpotent-time-1", &m1, &nil_map, &s1),
        ("mixing-time-1", &m1, &mix_map, &s1),
    ];
    let mut out = Vec::new();
    for (name, m, f, seeds) in cases {
        out.push(check_nonexpansive(ctx, name, m, f, false));
        out.push(check_step_monotone(ctx, name, m, f, seeds, steps, false));
    }
    if let Some(e) = extra {
        if let Some(map) = &e.map {
            out.push(check_nonexpansive(ctx, &e.name, &e.metric, map, false));
            out.push(check_step_monotone(ctx, &e.name, &e.metric, map, &e.seeds, steps, false));
        }
    }
    let power = PowerMap { exponent: 2.0 };
    out.push(check_nonexpansive(ctx, "power-map", &m1, &power, true));
    out.push(check_step_monotone(ctx, "power-map", &m1, &power, &s1, 64, true));
    let sq = MetricInstance::hilbert(square());
    out.push(check_nonexpansive(ctx, "sqrt-stretch-square", &sq, &SqrtStretch, true));
    out
}

fn horoballs(ctx: &CheckContext) -> Vec<CheckReport> {
    let sq = MetricInstance::hilbert(square());
    let interval = MetricInstance::hilbert(crate::geometry::ConvexBody::interval(-1.0, 1.0).expect("interval"));
    let origin = vector(&[0.0, 0.0]);
    let mut out = Vec::new();
    match HoroballSpec::new(&sq, vector(&[0.2, -0.3]), vector(&[1.0, 0.4]), 0.5, HoroballKind::Big) {
        Ok(spec) => out.push(check_star_shape(ctx, "square", &sq, &spec)),
        Err(e) => out.push(super::ReportBuilder::new(ctx, "star-shape", "square").inconclusive(&e.to_string())),
    }
    out.push(check_shrink(ctx, "interval", &interval, &vector(&[0.0]), &vector(&[1.0]), false));
    out.push(check_shrink(ctx, "square-corner", &sq, &origin, &vector(&[1.0, 1.0]), false));
    out.push(check_shrink(ctx, "square-facet-center", &sq, &origin, &vector(&[1.0, 0.0]), true));
    out
}

/// Runs the named suite. `extra` adds a configured instance to the suites
/// it fits. Returns `None` for an unknown suite name.
pub fn run_suite(name: &str, ctx: &CheckContext, extra: Option<&ExtraInstance>) -> Option<SuiteReport> {
    let extra = extra.filter(|e| e.metric.kind() != MetricKind::Polydisc && e.metric.kind() != MetricKind::PoincareDisc);
    let checks = match name {
        "condition-C" => condition_c(ctx, extra),
        "axiom5" => axiom5(ctx, extra),
        "kobayashi" => kobayashi(ctx),
        "axiom2star" => axiom2star(ctx, extra),
        "a3prime" => a3prime(ctx),
        "axiom4" => axiom4(ctx, extra),
        "wolff-denjoy" => wolff_denjoy(ctx, extra),
        "attractor-inclusions" => attractor_inclusions(ctx, extra),
        "semigroup-attractor" => semigroup(ctx),
        "nonexpansive" => nonexpansive(ctx, extra),
        "horoballs" => horoballs(ctx),
        "all" => SUITES
            .iter()
            .filter(|s| **s != "all")
            .flat_map(|s| run_suite(s, ctx, extra).map(|r| r.checks).unwrap_or_default())
            .collect(),
        _ => return None,
    };
    Some(SuiteReport::new(name, ctx, checks))
}
