//! The stock domains and maps the suites run on.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::dynamics::{MapSpec, SemigroupSpec};
use crate::exec::task_rng;
use crate::geometry::{vector, ConvexBody, Vector};
use crate::metrics::MetricInstance;

/// The square `(-1, 1)^2`.
pub fn square() -> ConvexBody {
    ConvexBody::cube(2).expect("square")
}

/// The ellipse `x^2 / 4 + y^2 < 1`.
pub fn ellipse() -> ConvexBody {
    ConvexBody::ellipsoid(vector(&[0.0, 0.0]), DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0])).expect("ellipse")
}

/// A polygon with `m` facets around the origin: jittered outward normals and
/// offsets in `[0.7, 1.3]`.
pub fn random_polygon(m: usize, seed: u64) -> ConvexBody {
    let mut rng = task_rng(seed, 0);
    let mut a = DMatrix::zeros(m, 2);
    let mut b = DVector::zeros(m);
    for i in 0..m {
        let theta = TAU * (i as f64 + rng.random_range(-0.3..0.3)) / m as f64;
        a[(i, 0)] = theta.cos();
        a[(i, 1)] = theta.sin();
        b[i] = rng.random_range(0.7..1.3);
    }
    ConvexBody::hpolytope(a, b).expect("bounded polygon")
}

/// Hilbert instances used by the sampling suites, with their names.
pub fn hilbert_instances(seed: u64) -> Vec<(String, MetricInstance)> {
    vec![
        ("square".into(), MetricInstance::hilbert(square())),
        ("polygon-6".into(), MetricInstance::hilbert(random_polygon(6, seed))),
        ("ellipse".into(), MetricInstance::hilbert(ellipse())),
        ("simplex-2".into(), MetricInstance::hilbert_cone(2).expect("simplex")),
    ]
}

fn pl(n: usize, rows: &[f64]) -> MapSpec {
    MapSpec::projective_linear(DMatrix::from_row_slice(n, n, rows)).expect("valid matrix")
}

/// `[[1, 1], [0, 1]]`: orbits run to the vertex `(1, 0)`.
pub fn jordan2() -> MapSpec {
    pl(2, &[1.0, 1.0, 0.0, 1.0])
}

/// `[[1, 1, 0], [0, 1, 0], [0, 0, 1]]` on the 2-simplex.
pub fn jordan3() -> MapSpec {
    pl(3, &[1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0])
}

/// `[[2, 1], [1, 2]]`: interior Perron fixed point `(1/2, 1/2)`.
pub fn perron2() -> MapSpec {
    pl(2, &[2.0, 1.0, 1.0, 2.0])
}

/// Generator `[[0, 1], [0, 0]]`, `exp(tA) = [[1, t], [0, 1]]`.
pub fn nilpotent() -> SemigroupSpec {
    SemigroupSpec::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).expect("generator")
}

/// Generator `[[-1, 1], [1, -1]]` with interior equilibrium `(1/2, 1/2)`.
pub fn mixing() -> SemigroupSpec {
    SemigroupSpec::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).expect("generator")
}

/// Evenly spaced points of the open 1-simplex with both coordinates in
/// `[0.1, 0.9]`.
pub fn segment_test_set(k: usize) -> Vec<Vector> {
    (0..k)
        .map(|i| {
            let a = 0.1 + 0.8 * i as f64 / (k.max(2) - 1) as f64;
            vector(&[a, 1.0 - a])
        })
        .collect()
}

/// Points of the open 2-simplex with every coordinate at least 0.1, from a
/// triangular lattice.
pub fn triangle_test_set(per_side: usize) -> Vec<Vector> {
    let mut out = Vec::new();
    let n = per_side.max(1);
    for i in 0..=n {
        for j in 0..=(n - i) {
            let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
            let c = 1.0 - a - b;
            out.push(vector(&[0.1 + 0.7 * a, 0.1 + 0.7 * b, 0.1 + 0.7 * c]));
        }
    }
    out
}
