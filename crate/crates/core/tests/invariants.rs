//! Property tests for the geometric invariants the operators rely on.

use proptest::prelude::*;

use convexop::geometry::{
    hausdorff_distance, linear_image, minkowski_sum, project, reflect, scale, support_gap, translate, LinearMap,
    Subspace,
};
use convexop::harness::io::{body_from_json, body_to_json};
use convexop::measures::{mixed_volume, volume, MixedVolumeQuery};
use convexop::operators::{apply, apply_msum, difference_body, msum_support, ApplyContext, OperatorSpec, PlanarBody};
use convexop::rng::{stream, unit_vector};
use convexop::{Body, Point};

fn points(n: usize, min: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-4.0f64..4.0, n), min..=max)
}

fn body_in(n: usize) -> impl Strategy<Value = Body> {
    points(n, 1, 10).prop_map(|rows| Body::from_rows(&rows).unwrap())
}

fn full_body_in(n: usize) -> impl Strategy<Value = Body> {
    points(n, n + 3, 12)
        .prop_map(|rows| Body::from_rows(&rows).unwrap())
        .prop_filter("full-dimensional", |b| b.is_full_dimensional() && volume(b) > 1e-3)
}

fn any_body() -> impl Strategy<Value = Body> {
    (2usize..=4).prop_flat_map(body_in)
}

fn direction(n: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-1.0f64..1.0, n)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        .prop_map(|v| Point::from_vec(v).normalize())
}

fn dirs(n: usize, seed: u64, count: usize) -> Vec<Point> {
    let mut rng = stream(seed, 0);
    (0..count).map(|_| unit_vector(&mut rng, n)).collect()
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn support_is_sublinear((k, u, v, t) in (2usize..=4).prop_flat_map(|n| (body_in(n), direction(n), direction(n), 0.0f64..5.0))) {
        let s = k.scale();
        prop_assert!(k.support(&(&u + &v)) <= k.support(&u) + k.support(&v) + 1e-12 * s.max(1.0));
        prop_assert!(close(k.support(&(&u * t)), t * k.support(&u), s * t));
    }

    #[test]
    fn support_is_additive_under_minkowski_sums((k, l) in (2usize..=4).prop_flat_map(|n| (body_in(n), body_in(n))), seed in any::<u64>()) {
        let sum = minkowski_sum(&k, &l).unwrap();
        let s = sum.scale();
        for u in dirs(k.ambient_dim(), seed, 40) {
            prop_assert!(close(sum.support(&u), k.support(&u) + l.support(&u), s));
        }
    }

    #[test]
    fn reflection_is_an_involution(k in any_body()) {
        prop_assert_eq!(reflect(&reflect(&k)), k.clone());
        let d = difference_body(&k).unwrap();
        prop_assert_eq!(reflect(&d), d);
    }

    #[test]
    fn projection_matches_support_and_is_idempotent((k, dim) in (2usize..=4).prop_flat_map(|n| (body_in(n), 1..n)), seed in any::<u64>()) {
        let n = k.ambient_dim();
        let e = Subspace::random(&mut stream(seed, 1), n, dim).unwrap();
        let p = project(&k, &e).unwrap();
        prop_assert_eq!(p.ambient_dim(), dim);
        for w in dirs(dim, seed, 30) {
            prop_assert!(close(p.support(&w), k.support(&e.embed(&w)), k.scale()));
        }
        let lifted = Body::canonicalize(&p.vertices().iter().map(|w| e.embed(w)).collect::<Vec<_>>()).unwrap();
        let again = project(&lifted, &e).unwrap();
        prop_assert!(hausdorff_distance(&again, &p).unwrap() <= 1e-9 * p.scale().max(1.0));
    }

    #[test]
    fn hausdorff_dominates_support_gap((k, l) in (2usize..=3).prop_flat_map(|n| (body_in(n), body_in(n))), seed in any::<u64>()) {
        let d = hausdorff_distance(&k, &l).unwrap();
        prop_assert!(close(d, hausdorff_distance(&l, &k).unwrap(), d));
        let gap = support_gap(&k, &l, &dirs(k.ambient_dim(), seed, 200));
        prop_assert!(gap <= d + 1e-9 * k.scale().max(l.scale()).max(1.0));
        prop_assert_eq!(hausdorff_distance(&k, &k).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_of_a_translate_is_the_shift((k, t) in (2usize..=3).prop_flat_map(|n| (body_in(n), prop::collection::vec(-2.0f64..2.0, n)))) {
        let t = Point::from_vec(t);
        let moved = translate(&k, &t).unwrap();
        prop_assert!(close(hausdorff_distance(&k, &moved).unwrap(), t.norm(), k.scale() + t.norm()));
    }

    #[test]
    fn volume_scales_with_the_determinant(k in (2usize..=4).prop_flat_map(full_body_in), seed in any::<u64>()) {
        let a = LinearMap::random_gl(&mut stream(seed, 2), k.ambient_dim());
        let img = linear_image(&k, &a).unwrap();
        let (v, w) = (volume(&k), volume(&img));
        prop_assert!((w - a.det().abs() * v).abs() <= 1e-8 * w.max(1.0));
    }

    #[test]
    fn planar_mixed_volume_is_symmetric_and_polarizes((k, l) in (full_body_in(2), full_body_in(2))) {
        let q = |a: &Body, b: &Body| MixedVolumeQuery { bodies: vec![a.clone(), b.clone()], multiplicity: vec![1, 1] };
        let vkl = mixed_volume(&q(&k, &l)).unwrap();
        let vlk = mixed_volume(&q(&l, &k)).unwrap();
        let sum = volume(&minkowski_sum(&k, &l).unwrap());
        prop_assert!((vkl - vlk).abs() <= 1e-8 * sum);
        prop_assert!((sum - volume(&k) - 2.0 * vkl - volume(&l)).abs() <= 1e-8 * sum);
        let vkk = mixed_volume(&q(&k, &k)).unwrap();
        prop_assert!((vkk - volume(&k)).abs() <= 1e-8 * volume(&k).max(1.0));
    }

    #[test]
    fn flat_bodies_have_a_zero_width((rows, c) in (2usize..=4).prop_flat_map(|n| (points(n - 1, 1, 8), -3.0f64..3.0))) {
        let n = rows[0].len() + 1;
        let lifted: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().copied().chain([c]).collect()).collect();
        let k = Body::from_rows(&lifted).unwrap();
        prop_assert!(k.dimension() < n);
        let mut e = Point::zeros(n);
        e[n - 1] = 1.0;
        prop_assert_eq!(k.width(&e), 0.0);
        prop_assert_eq!(volume(&k), 0.0);
    }

    #[test]
    fn full_bodies_have_positive_widths(k in (2usize..=4).prop_flat_map(full_body_in), seed in any::<u64>()) {
        prop_assert_eq!(k.dimension(), k.ambient_dim());
        for u in dirs(k.ambient_dim(), seed, 50) {
            prop_assert!(k.width(&u) > 0.0);
        }
    }

    #[test]
    fn msum_support_composition(
        (k, m) in (2usize..=3).prop_flat_map(|n| (body_in(n), prop::collection::vec((0.0f64..3.0, 0.0f64..3.0), 1..5))),
        seed in any::<u64>(),
    ) {
        let m = PlanarBody::from_points(&m).unwrap();
        let img = apply_msum(&m, &k).unwrap();
        let s = img.scale().max(k.scale()).max(1.0);
        for u in dirs(k.ambient_dim(), seed, 100) {
            let want = msum_support(&m, k.support(&u), k.support(&-&u));
            prop_assert!((img.support(&u) - want).abs() <= 1e-9 * s);
        }
    }

    #[test]
    fn wannerer_equals_its_associated_msum(
        k in (2usize..=3).prop_flat_map(body_in),
        (a, b, c, d) in (0.0f64..3.0, 0.0f64..3.0, 0.0f64..3.0, 0.0f64..3.0),
    ) {
        let w = apply(&OperatorSpec::Wannerer { a, b, c, d }, &k, &ApplyContext::default()).unwrap();
        let m = PlanarBody::from_points(&[(a, b), (a + c, b), (a, b + d), (a + c, b + d)]).unwrap();
        let direct = apply_msum(&m, &k).unwrap();
        prop_assert!(hausdorff_distance(&w, &direct).unwrap() <= 1e-9 * w.scale().max(1.0));
    }

    #[test]
    fn scaled_difference_body(k in any_body(), lambda in 0.0f64..4.0) {
        let img = apply(&OperatorSpec::DifferenceBody { lambda }, &k, &ApplyContext::default()).unwrap();
        let want = scale(&difference_body(&k).unwrap(), lambda).unwrap();
        prop_assert!(hausdorff_distance(&img, &want).unwrap() <= 1e-12 * want.scale().max(1.0));
    }

    #[test]
    fn body_json_round_trips(k in any_body()) {
        let text = body_to_json(&k);
        let back = body_from_json(&text).unwrap();
        prop_assert_eq!(body_to_json(&back), text);
        prop_assert_eq!(back, k);
    }
}
