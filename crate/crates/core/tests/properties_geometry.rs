use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hilbert_dynamics::geometry::{vector, ConvexBody, Location, Vector, DEFAULT_FACE_TOL};
use hilbert_dynamics::horoballs::{horofunction_estimate, ApproachPolicy, HoroballKind, HoroballSpec};
use hilbert_dynamics::metrics::{
    hilbert_cone, hilbert_cross_ratio, hilbert_norm_lower_bound, kobayashi_lower_bound, lift_simplex, MetricInstance,
    MetricSpace,
};
use hilbert_dynamics::verify::instances::{ellipse, random_polygon, square};

fn bodies() -> Vec<(&'static str, ConvexBody)> {
    vec![
        ("square", square()),
        ("polygon-6", random_polygon(6, 7)),
        ("ellipse", ellipse()),
        ("simplex-2", ConvexBody::simplex(2).unwrap()),
        ("simplex-3", ConvexBody::simplex(3).unwrap()),
        ("cube-3", ConvexBody::cube(3).unwrap()),
    ]
}

fn polytopes() -> Vec<ConvexBody> {
    vec![square(), random_polygon(6, 7), ConvexBody::simplex(2).unwrap()]
}

/// A vertex, an edge midpoint or a random boundary point of a polygon.
fn boundary_point(body: &ConvexBody, pick: u8, seed: u64) -> Vector {
    let mut verts = body.vertices().unwrap();
    let c = body.interior_point().clone();
    verts.sort_by(|a, b| (a[1] - c[1]).atan2(a[0] - c[0]).total_cmp(&(b[1] - c[1]).atan2(b[0] - c[0])));
    let i = seed as usize % verts.len();
    match pick % 3 {
        0 => verts[i].clone(),
        1 => (&verts[i] + &verts[(i + 1) % verts.len()]) / 2.0,
        _ => body.sample_boundary_with(&mut ChaCha8Rng::seed_from_u64(seed)),
    }
}

fn close(a: &Vector, b: &Vector, tol: f64) -> bool {
    (a - b).amax() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chord_order_and_consistency(which in 0usize..6, s1: u64, s2: u64) {
        let (_, body) = &bodies()[which];
        let x = body.sample_interior(s1);
        let y = body.sample_interior(s2);
        prop_assume!((&x - &y).norm() > 1e-9);
        let c = body.chord_endpoints(&x, &y).unwrap();
        prop_assert!(c.t_lo < 0.0 && c.t_hi > 1.0);
        prop_assert_eq!(body.classify(&c.a).unwrap(), Location::Boundary);
        prop_assert_eq!(body.classify(&c.b).unwrap(), Location::Boundary);
        let r = body.chord_endpoints(&y, &x).unwrap();
        prop_assert!(close(&c.a, &r.b, 1e-9) && close(&c.b, &r.a, 1e-9));
    }

    #[test]
    fn samples_are_interior_and_reproducible(which in 0usize..6, seed: u64) {
        let (_, body) = &bodies()[which];
        let x = body.sample_interior(seed);
        prop_assert_eq!(body.classify(&x).unwrap(), Location::Interior);
        prop_assert_eq!(x, body.sample_interior(seed));
    }

    #[test]
    fn in_ch_is_symmetric(which in 0usize..3, p1: u8, p2: u8, s1: u64, s2: u64) {
        let body = &polytopes()[which];
        let x = boundary_point(body, p1, s1);
        let xi = boundary_point(body, p2, s2);
        prop_assert_eq!(
            body.in_ch(&x, &xi, DEFAULT_FACE_TOL).unwrap(),
            body.in_ch(&xi, &x, DEFAULT_FACE_TOL).unwrap()
        );
    }

    #[test]
    fn ellipse_segments_leave_the_boundary(s1: u64, s2: u64) {
        let body = ellipse();
        let x = body.sample_boundary_with(&mut ChaCha8Rng::seed_from_u64(s1));
        let y = body.sample_boundary_with(&mut ChaCha8Rng::seed_from_u64(s2));
        prop_assume!((&x - &y).norm() > 1e-6);
        prop_assert!(!body.segment_on_boundary(&x, &y, 16).unwrap());
    }

    #[test]
    fn cross_ratio_matches_cone(n in 2usize..4, s1: u64, s2: u64) {
        let body = ConvexBody::simplex(n).unwrap();
        let x = body.sample_interior(s1);
        let y = body.sample_interior(s2);
        let d = hilbert_cross_ratio(&body, &x, &y).unwrap();
        let e = hilbert_cone(&lift_simplex(&x), &lift_simplex(&y)).unwrap();
        prop_assert!((d - e).abs() <= 1e-9 * (1.0 + d));
    }

    #[test]
    fn metric_axioms(which in 0usize..6, s1: u64, s2: u64, s3: u64) {
        let (_, body) = &bodies()[which];
        let m = MetricInstance::hilbert(body.clone());
        let (x, y, z) = (body.sample_interior(s1), body.sample_interior(s2), body.sample_interior(s3));
        let dxy = m.distance(&x, &y).unwrap();
        prop_assert!(dxy >= 0.0);
        prop_assert!((dxy - m.distance(&y, &x).unwrap()).abs() <= 1e-12 * (1.0 + dxy));
        prop_assert!(dxy <= m.distance(&x, &z).unwrap() + m.distance(&z, &y).unwrap() + 1e-9);
        prop_assert_eq!(m.distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn cone_scaling_invariance(s1: u64, s2: u64, lambda in proptest::collection::vec(1e-3f64..1e3, 4)) {
        let m = MetricInstance::hilbert_cone(3).unwrap();
        let x = m.sample_point(&mut ChaCha8Rng::seed_from_u64(s1));
        let y = m.sample_point(&mut ChaCha8Rng::seed_from_u64(s2));
        let l = Vector::from_vec(lambda);
        let d = hilbert_cone(&x, &y).unwrap();
        let e = hilbert_cone(&x.component_mul(&l), &y.component_mul(&l)).unwrap();
        prop_assert!((d - e).abs() <= 1e-12 * (1.0 + d));
    }

    #[test]
    fn condition_c_hilbert_and_polydisc(which in 0usize..7, s1: u64, s2: u64, s3: u64, s in 0.0f64..=1.0) {
        let m = match bodies().into_iter().nth(which) {
            Some((_, body)) => MetricInstance::hilbert(body),
            None => MetricInstance::polydisc(2),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(s1 ^ s2.rotate_left(17) ^ s3.rotate_left(41));
        let (x, y, z) = (m.sample_point(&mut rng), m.sample_point(&mut rng), m.sample_point(&mut rng));
        let u = m.combine(&x, &y, s);
        let bound = m.distance(&x, &z).unwrap().max(m.distance(&y, &z).unwrap());
        prop_assert!(m.distance(&u, &z).unwrap() <= bound + 1e-9);
    }

    #[test]
    fn lower_bounds_hold(which in 0usize..6, s1: u64, s2: u64, zr in 0.0f64..0.999, za in 0.0f64..6.3, wr in 0.0f64..0.999, wa in 0.0f64..6.3) {
        let (_, body) = &bodies()[which];
        let m = MetricInstance::hilbert(body.clone());
        let (x, y) = (body.sample_interior(s1), body.sample_interior(s2));
        prop_assert!(m.distance(&x, &y).unwrap() >= hilbert_norm_lower_bound(m.diameter(), &x, &y) - 1e-9);

        let disc = MetricInstance::poincare_disc();
        let z = vector(&[zr * za.cos(), zr * za.sin()]);
        let w = vector(&[wr * wa.cos(), wr * wa.sin()]);
        let k = disc.distance(&z, &w).unwrap();
        prop_assert!(kobayashi_lower_bound(2.0, &z, &w).unwrap() <= k + 1e-12);
    }
}

fn horoball_setup(which: usize) -> (MetricInstance, Vector, Vector) {
    match which {
        0 => {
            let m = MetricInstance::hilbert(ConvexBody::interval(-1.0, 1.0).unwrap());
            (m, vector(&[0.0]), vector(&[1.0]))
        }
        1 => (MetricInstance::hilbert(square()), vector(&[0.0, 0.0]), vector(&[1.0, 0.3])),
        _ => (MetricInstance::hilbert(ellipse()), vector(&[0.0, 0.0]), vector(&[0.0, 1.0])),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn horoball_monotone_in_radius(which in 0usize..3, seed: u64, r1 in -5.0f64..5.0, dr in 0.0f64..5.0) {
        let (m, pole, center) = horoball_setup(which);
        let policy = ApproachPolicy::default();
        let y = m.body().unwrap().sample_interior(seed);
        let spec = HoroballSpec::new(&m, pole, center, r1, HoroballKind::Big).unwrap();
        let est = horofunction_estimate(&m, &spec, &y, &policy).unwrap();
        if est.is_member(HoroballKind::Big, r1) {
            prop_assert!(est.is_member(HoroballKind::Big, r1 + dr));
        }
        if est.is_member(HoroballKind::Small, r1) {
            prop_assert!(est.is_member(HoroballKind::Big, r1));
        }
    }

    /// Strictly convex bodies have one horofunction per boundary point, so
    /// moving the pole changes it by at most the pole shift.
    #[test]
    fn pole_shift_bound(which in prop::sample::select(vec![0usize, 2]), s_y: u64, s_p: u64) {
        let (m, pole, center) = horoball_setup(which);
        let policy = ApproachPolicy::default();
        let body = m.body().unwrap();
        let y = body.sample_interior(s_y);
        let pole2 = body.sample_interior(s_p);
        let a = horofunction_estimate(&m, &HoroballSpec::new(&m, pole.clone(), center.clone(), 0.0, HoroballKind::Big).unwrap(), &y, &policy).unwrap();
        let b = horofunction_estimate(&m, &HoroballSpec::new(&m, pole2.clone(), center, 0.0, HoroballKind::Big).unwrap(), &y, &policy).unwrap();
        let shift = m.distance(&pole, &pole2).unwrap();
        prop_assert!(a.lo - b.hi <= shift + 1e-5);
        prop_assert!(b.lo - a.hi <= shift + 1e-5);
    }
}
