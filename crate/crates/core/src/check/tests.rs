use super::*;
use crate::operators::PlanarBody;

fn d() -> OperatorSpec {
    OperatorSpec::DifferenceBody { lambda: 1.0 }
}

fn check(spec: &OperatorSpec, prop: PropertyKind, n: usize, trials: usize) -> CheckReport {
    run_check(spec, prop, &CheckConfig::new(n, trials, 7)).unwrap()
}

#[test]
fn difference_body_ratios_in_the_plane() {
    let cfg = CheckConfig::new(2, 200, 1).with_bound(6.0);
    let rs = run_check(&d(), PropertyKind::RS, &cfg).unwrap();
    assert_eq!(rs.verdict, Verdict::Pass, "{:?}", rs.witness);
    let max = rs.empirical_constant.unwrap();
    assert!((5.9..=6.0 + 1e-9).contains(&max), "max ratio {max}");
    assert!(rs.lowdim_inputs > 0);

    let cfg = CheckConfig::new(2, 200, 1).with_bound(4.0);
    let bm = run_check(&d(), PropertyKind::BM, &cfg).unwrap();
    assert_eq!(bm.verdict, Verdict::Pass);
    assert!((bm.empirical_constant.unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn volume_ball_is_not_a_valuation() {
    let r = check(&OperatorSpec::VolumeBall, PropertyKind::Valuation, 2, 20);
    assert_eq!(r.verdict, Verdict::Fail);
    let w = r.witness.as_ref().unwrap();
    assert_eq!(w.input.bodies.len(), 3);
    assert!(w.margin > 10.0 * r.effective_tolerance);
}

#[test]
fn volume_scaled_d_covariance() {
    let gl = check(&OperatorSpec::VolumeScaledD, PropertyKind::GLCovariance, 3, 20);
    assert_eq!(gl.verdict, Verdict::Fail);
    assert!(gl.witness.unwrap().margin > 1e-6);
    let sl = check(&OperatorSpec::VolumeScaledD, PropertyKind::SLCovariance, 3, 20);
    assert_eq!(sl.verdict, Verdict::Pass, "{:?}", sl.witness);
}

#[test]
fn wannerer_is_a_valuation() {
    let w = OperatorSpec::Wannerer {
        a: 1.0,
        b: 2.0,
        c: 3.0,
        d: 4.0,
    };
    for n in [2, 3] {
        let r = check(&w, PropertyKind::Valuation, n, 20);
        assert_eq!(r.verdict, Verdict::Pass, "n={n}: {:?}", r.witness);
    }
}

#[test]
fn zero_msum_is_trivial() {
    let m = OperatorSpec::MSum {
        m: PlanarBody::from_points(&[(0.0, 0.0)]).unwrap(),
    };
    let r = check(&m, PropertyKind::TrivialityFromM, 3, 30);
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.max_margin, 0.0);
    let r = check(&d(), PropertyKind::TrivialityFromM, 3, 30);
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(matches!(
        run_check(&OperatorSpec::VolumeBall, PropertyKind::TrivialityFromM, &CheckConfig::new(2, 5, 0)),
        Err(Error::SpecNotApplicable { .. })
    ));
}

#[test]
fn additivity_matrix() {
    let lc = OperatorSpec::LinearComb { a: 2.0, b: 0.5 };
    assert_eq!(check(&lc, PropertyKind::Additivity, 2, 30).verdict, Verdict::Pass);
    let hull = OperatorSpec::Wannerer {
        a: 0.0,
        b: 0.0,
        c: 1.0,
        d: 0.0,
    };
    let r = check(&hull, PropertyKind::Additivity, 2, 30);
    assert_eq!(r.verdict, Verdict::Fail);
}

#[test]
fn witnesses_revalidate_standalone() {
    let r = check(&OperatorSpec::VolumeScaledD, PropertyKind::GLCovariance, 2, 10);
    let doc = r.witness_document().unwrap();
    let text = serde_json::to_string(&doc).unwrap();
    let back: Value = serde_json::from_str(&text).unwrap();
    let rv = revalidate_document(&back).unwrap();
    assert!(rv.violated && rv.margin > rv.tolerance);
    assert!((rv.margin - r.witness.as_ref().unwrap().margin).abs() <= 1e-12);
    let full: Value = serde_json::from_str(&r.to_json()).unwrap();
    assert!(revalidate_document(&full).unwrap().violated);
}

#[test]
fn reports_are_reproducible() {
    let a = check(&OperatorSpec::HullOrigin, PropertyKind::RS, 2, 40);
    let b = check(&OperatorSpec::HullOrigin, PropertyKind::RS, 2, 40);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.trials_csv().unwrap(), b.trials_csv().unwrap());
}

#[test]
fn hull_with_origin_jumps_dimension() {
    let r = check(&OperatorSpec::HullOrigin, PropertyKind::RS, 2, 40);
    assert_eq!(r.verdict, Verdict::Fail);
    let w = r.witness.unwrap();
    assert!(w.input.bodies[0].dimension() < 2);
}

#[test]
fn quermass_dimension_jump() {
    let hull = OperatorSpec::Wannerer {
        a: 0.0,
        b: 0.0,
        c: 1.0,
        d: 0.0,
    };
    let points = CorpusSpec::new(CorpusKind::LowdimEmbed {
        k: 0,
        inner: Box::new(CorpusKind::Segment),
    });
    let cfg = CheckConfig::new(3, 10, 3).with_corpus(points);
    let r = rs_quermass_check(&hull, 2, &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.notes.iter().any(|n| n.contains("0 -> 1")), "{:?}", r.notes);

    let lc = OperatorSpec::LinearComb { a: 1.0, b: 1.0 };
    let r = rs_quermass_check(&lc, 1, &CheckConfig::new(3, 40, 3)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.witness);
}

#[test]
fn difference_body_on_symmetric_bodies_scales_quermassintegrals() {
    let sym = CorpusSpec::new(CorpusKind::SymmetricRandom { m: 5 });
    let cfg = CheckConfig::new(3, 20, 2).with_corpus(sym);
    for (l, expected) in [(1, 4.0), (2, 2.0)] {
        let r = rs_quermass_check(&d(), l, &cfg).unwrap();
        let c = r.empirical_constant.unwrap();
        assert!((c - expected).abs() < 1e-9, "l={l}: {c}");
    }
}

#[test]
fn continuity_sampling() {
    let gated = OperatorSpec::DimGatedD { fallback: None };
    let r = check(&gated, PropertyKind::LipschitzSample, 2, 20);
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(r.continuity_label(), Some("violated"));
    let r = check(&d(), PropertyKind::LipschitzSample, 2, 20);
    assert_eq!(r.continuity_label(), Some("consistent"));
}

#[test]
fn identity_properties_of_difference_body() {
    for prop in [
        PropertyKind::GLCovariance,
        PropertyKind::TranslationInvariance,
        PropertyKind::ProjectionCovariance,
        PropertyKind::Additivity,
        PropertyKind::Monotonicity,
        PropertyKind::Homogeneity(1.0),
        PropertyKind::OSymmetrization,
        PropertyKind::Homothety,
        PropertyKind::DimensionPreservation(1),
    ] {
        for n in [2, 3] {
            let r = check(&d(), prop, n, 12);
            assert_eq!(r.verdict, Verdict::Pass, "{prop} n={n}: {:?}", r.witness);
        }
    }
    let r = check(&d(), PropertyKind::Homothety, 3, 12);
    assert!((r.empirical_constant.unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn failing_identities() {
    assert_eq!(check(&OperatorSpec::HullOrigin, PropertyKind::TranslationInvariance, 2, 10).verdict, Verdict::Fail);
    assert_eq!(check(&OperatorSpec::HullOrigin, PropertyKind::OSymmetrization, 2, 10).verdict, Verdict::Fail);
    assert_eq!(check(&d(), PropertyKind::Homogeneity(2.0), 2, 10).verdict, Verdict::Fail);
    let ball = OperatorSpec::IntersectUnitBall;
    assert_eq!(check(&ball, PropertyKind::ProjectionCovariance, 2, 10).verdict, Verdict::Fail);
}

#[test]
fn sweep_uses_sharp_constants() {
    let cfg = CheckConfig::new(2, 60, 4);
    let rows = empirical_constant_sweep(&OperatorSpec::LinearComb { a: 1.0, b: 0.0 }, PropertyKind::RS, &[2, 3], &cfg).unwrap();
    for row in rows {
        assert_eq!(row.paper_bound, Some(1.0));
        assert!((row.empirical_constant.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(row.verdict, Verdict::Pass);
    }
    assert!(empirical_constant_sweep(&d(), PropertyKind::RS, &[5], &cfg).is_err());
}

#[test]
fn scale_sweep_catches_unbounded_ratios() {
    let r = check(&OperatorSpec::VolumeScaledD, PropertyKind::RS, 2, 20);
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.witness.unwrap().input.tag.starts_with("sweep"));
    let r = check(&OperatorSpec::VolumeBall, PropertyKind::RS, 2, 20);
    assert_eq!(r.verdict, Verdict::Pass);
    let r = check(&OperatorSpec::IntersectUnitBall, PropertyKind::BM, 2, 20);
    assert_eq!(r.verdict, Verdict::Fail);
}

#[test]
fn config_errors() {
    let bad_n = CheckConfig::new(5, 10, 0);
    assert!(matches!(run_check(&d(), PropertyKind::RS, &bad_n), Err(Error::UnsupportedDimension(5))));
    let no_trials = CheckConfig::new(2, 0, 0);
    assert!(run_check(&d(), PropertyKind::RS, &no_trials).is_err());
    let small = CheckConfig::new(2, 10, 0).with_corpus(CorpusSpec::new(CorpusKind::Cube).with_count(3));
    assert!(matches!(run_check(&d(), PropertyKind::RS, &small), Err(Error::CorpusExhausted(3))));
    let ball4 = CheckConfig::new(4, 10, 0);
    assert!(matches!(
        run_check(&OperatorSpec::VolumeBall, PropertyKind::RS, &ball4),
        Err(Error::SpecNotApplicable { .. })
    ));
}
